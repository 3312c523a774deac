//! Fixtures shared by the benchmarks.

use dat_core::{DensityMatrix, DephasingSpec, FmoSystem, GeneratorSet, IntegratorConfig, LocalModeSpec, Result};

/// Bundled FMO with uniform dephasing and, optionally, modes on the first
/// `mode_sites` sites.
pub fn fmo_generators(mode_sites: usize) -> Result<(GeneratorSet, DensityMatrix)> {
    let fmo = FmoSystem::bundled()?;
    let dephasing = Some(DephasingSpec::uniform(7, 20.0)?);
    let noise = if mode_sites == 0 {
        fmo.noise(dephasing)
    } else {
        fmo.noise_with_modes(dephasing, LocalModeSpec::new((1..=mode_sites).collect(), 1.0))
    };
    let g = GeneratorSet::build(&fmo.hamiltonian, &noise)?;
    let rho0 = fmo.initial_state(&g)?;
    Ok((g, rho0))
}

/// Spectroscopic run over `t_final` ps without the step-halving guard.
pub fn unguarded(t_final: f64) -> IntegratorConfig {
    IntegratorConfig {
        guard: false,
        ..IntegratorConfig::spectroscopic(t_final)
    }
}
