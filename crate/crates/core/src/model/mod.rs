//! Network Hamiltonians, basis changes and the bundled FMO complex.

mod basis;
mod fmo;
mod hamiltonian;
mod io;

pub use basis::{edit_coupling, hybrid_transform, transform_hamiltonian, transform_matrix, BasisTransform};
pub use fmo::{calibrate_sink_rate, FmoSystem, SinkCalibration, DEFAULT_RADIATIVE_RATE};
pub use hamiltonian::{build_fcn, disordered_energies, NetworkHamiltonian};
pub use io::{load_network, parse_network, save_network, NetworkFile, SinkEntry};

use crate::error::{Error, Result};

/// Converts a 1-based site index into a 0-based offset.
pub(crate) fn site_offset(site: usize, n_sites: usize) -> Result<usize> {
    if site == 0 || site > n_sites {
        return Err(Error::IndexOutOfRange {
            index: site,
            max: n_sites,
        });
    }
    Ok(site - 1)
}
