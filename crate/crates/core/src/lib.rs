//! Noise-assisted excitation transfer in small Lindblad networks.
//!
//! Builds network Hamiltonians (fully connected networks and the FMO
//! complex), adds dephasing, radiative loss, a trapping sink and optional
//! damped local modes, propagates the master equation and analyses or
//! optimizes the transfer efficiency.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod optimize;
pub mod propagate;
#[cfg(test)]
mod testing;
pub mod units;

pub use error::{Error, Result};
pub use model::{BasisTransform, FmoSystem, NetworkHamiltonian};
pub use noise::{DephasingSpec, GeneratorSet, LocalModeSpec, NoiseSpec, SinkSpec, SpaceLayout};
pub use optimize::{FreeParameters, OptimizationProblem, OptimizationResult};
pub use propagate::{evolve, evolve_with, DensityMatrix, IntegratorConfig, Observables, Trajectory};
pub use units::{RateConvention, UnitSystem};
