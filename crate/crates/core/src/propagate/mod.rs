//! Fixed-step integration of the master equation and observable recording.

mod density;
mod export;
mod integrator;

pub use density::{reduced_electronic_state, DensityMatrix};
pub use export::{trajectory_csv, trajectory_json};
pub use integrator::{evolve, evolve_with, rhs, IntegratorConfig, Observables};

use serde::Serialize;

use crate::linalg::C64;

/// Integrator bookkeeping for one accepted run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunDiagnostics {
    /// Internal RK4 step actually used.
    pub step: f64,
    /// Internal steps per configured `dt`.
    pub substeps: usize,
    /// Step halvings needed after positivity or guard failures.
    pub refinements: usize,
    pub steps: usize,
    pub max_trace_error: f64,
    pub max_hermitian_deviation: f64,
    pub max_sink_discrepancy: f64,
    pub positivity_checks: usize,
    /// |p_sink(t_final)| change between step h and 2h, when guarded.
    pub guard_change: Option<f64>,
}

/// Time series recorded by [`evolve`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Per sample, populations of sites 1..=N.
    pub site_populations: Vec<Vec<f64>>,
    pub ground_population: Vec<f64>,
    /// Direct readout of the sink level.
    pub sink_population: Vec<f64>,
    /// 2Γ_{N+1} ∫ ρ_kk dt by the trapezoidal rule on the integrator grid.
    pub sink_population_integral: Vec<f64>,
    pub coherence_pair: (usize, usize),
    pub coherences: Vec<C64>,
    /// Populations in a registered basis, if any.
    pub hybrid_populations: Option<Vec<Vec<f64>>>,
    pub hybrid_pair: Option<(usize, usize)>,
    /// Largest excited-state population reached by each mode.
    pub mode_excitation_max: Vec<f64>,
    pub diagnostics: RunDiagnostics,
    pub final_state: DensityMatrix,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_sink(&self) -> f64 {
        *self.sink_population.last().unwrap_or(&0.0)
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Population of site `j` (1-based) over time.
    pub fn site_series(&self, j: usize) -> Vec<f64> {
        self.site_populations.iter().map(|p| p[j - 1]).collect()
    }

    /// Sum of the populations of `sites` over time.
    pub fn combined_series(&self, sites: &[usize]) -> Vec<f64> {
        self.site_populations
            .iter()
            .map(|p| sites.iter().map(|&j| p[j - 1]).sum())
            .collect()
    }

    /// Population of hybrid basis state `index` (1-based) over time.
    pub fn hybrid_series(&self, index: usize) -> Option<Vec<f64>> {
        self.hybrid_populations
            .as_ref()
            .map(|h| h.iter().map(|p| p[index - 1]).collect())
    }

    /// Earliest recorded time after which |ρ_ij| of the coherence pair stays
    /// below `threshold`.
    pub fn coherence_lifetime(&self, threshold: f64) -> f64 {
        let last_above = self.coherences.iter().rposition(|c| c.norm() >= threshold);
        match last_above {
            None => self.times.first().copied().unwrap_or(0.0),
            Some(i) => self.times.get(i + 1).copied().unwrap_or(f64::INFINITY),
        }
    }
}

/// Direct and integrated sink population at every sample.
pub fn sink_population_dual(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.sink_population
        .iter()
        .copied()
        .zip(traj.sink_population_integral.iter().copied())
        .collect()
}
