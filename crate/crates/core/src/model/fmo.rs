use crate::error::{Error, Result};
use crate::model::{parse_network, site_offset, NetworkFile, NetworkHamiltonian};
use crate::noise::{DephasingSpec, GeneratorSet, LocalModeSpec, NoiseSpec, SinkSpec};
use crate::propagate::{evolve, DensityMatrix, IntegratorConfig, Trajectory};

/// Radiative rate Γ_j on every site, ps⁻¹ (population lifetime 1 ns).
pub const DEFAULT_RADIATIVE_RATE: f64 = 5e-4;

const BUNDLED: &str = include_str!("../../data/fmo_paestuarii.json");

/// A network with a fixed source site, sink site and loss rates.
#[derive(Debug, Clone)]
pub struct FmoSystem {
    pub hamiltonian: NetworkHamiltonian,
    pub source_site: usize,
    pub sink_site: usize,
    pub sink_rate: f64,
    pub radiative_rate: f64,
}

impl FmoSystem {
    pub fn new(
        hamiltonian: NetworkHamiltonian,
        source_site: usize,
        sink_site: usize,
        sink_rate: f64,
        radiative_rate: f64,
    ) -> Result<Self> {
        let n = hamiltonian.n_sites();
        site_offset(source_site, n)?;
        site_offset(sink_site, n)?;
        if !(sink_rate >= 0.0 && sink_rate.is_finite() && radiative_rate >= 0.0 && radiative_rate.is_finite()) {
            return Err(Error::Validation("loss rates must be finite and non-negative".into()));
        }
        Ok(FmoSystem {
            hamiltonian,
            source_site,
            sink_site,
            sink_rate,
            radiative_rate,
        })
    }

    /// A network started on site 1 and drained from site N, without
    /// radiative loss.
    pub fn fcn(hamiltonian: NetworkHamiltonian, sink_rate: f64) -> Result<Self> {
        let n = hamiltonian.n_sites();
        Self::new(hamiltonian, 1, n, sink_rate, 0.0)
    }

    /// The bundled 7-site FMO monomer with its calibrated sink rate.
    pub fn bundled() -> Result<Self> {
        Self::from_file(&parse_network(BUNDLED)?)
    }

    pub fn bundled_file() -> Result<NetworkFile> {
        parse_network(BUNDLED)
    }

    pub fn from_file(file: &NetworkFile) -> Result<Self> {
        let hamiltonian = file.hamiltonian()?;
        let sink = file
            .sink
            .as_ref()
            .ok_or_else(|| Error::Validation("network file has no sink entry".into()))?;
        Ok(FmoSystem {
            hamiltonian,
            source_site: file.source.unwrap_or(1),
            sink_site: sink.site,
            sink_rate: sink.rate,
            radiative_rate: DEFAULT_RADIATIVE_RATE,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.hamiltonian.n_sites()
    }

    /// Radiative losses, sink and the given dephasing.
    pub fn noise(&self, dephasing: Option<DephasingSpec>) -> NoiseSpec {
        NoiseSpec {
            dephasing,
            radiative: vec![self.radiative_rate; self.n_sites()],
            sink: Some(SinkSpec {
                site: self.sink_site,
                rate: self.sink_rate,
            }),
            modes: None,
        }
    }

    pub fn noise_with_modes(&self, dephasing: Option<DephasingSpec>, modes: LocalModeSpec) -> NoiseSpec {
        NoiseSpec {
            modes: Some(modes),
            ..self.noise(dephasing)
        }
    }

    pub fn generators(&self, dephasing: Option<DephasingSpec>) -> Result<GeneratorSet> {
        GeneratorSet::build(&self.hamiltonian, &self.noise(dephasing))
    }

    pub fn initial_state(&self, generators: &GeneratorSet) -> Result<DensityMatrix> {
        DensityMatrix::pure_site(generators.layout().clone(), self.source_site)
    }

    /// Full trajectory from the source site.
    pub fn run(&self, noise: &NoiseSpec, config: &IntegratorConfig) -> Result<Trajectory> {
        let g = GeneratorSet::build(&self.hamiltonian, noise)?;
        let rho0 = self.initial_state(&g)?;
        evolve(&rho0, &g, config)
    }

    /// p_sink(t_final) from the source site.
    pub fn sink_yield(&self, dephasing: Option<DephasingSpec>, config: &IntegratorConfig) -> Result<f64> {
        Ok(self.run(&self.noise(dephasing), config)?.final_sink())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkCalibration {
    pub rate: f64,
    pub achieved: f64,
    pub evaluations: usize,
}

/// Smallest Γ_{N+1} on a log grid whose noiseless p_sink(t) reaches
/// `target`, refined by bisection in log Γ.
///
/// `system.sink_rate` is ignored. Fails when no grid rate reaches the target.
pub fn calibrate_sink_rate(
    system: &FmoSystem,
    target: f64,
    config: &IntegratorConfig,
) -> Result<SinkCalibration> {
    let mut evaluations = 0;
    let mut eval = |rate: f64| -> Result<f64> {
        evaluations += 1;
        let s = FmoSystem {
            sink_rate: rate,
            ..system.clone()
        };
        s.sink_yield(None, config)
    };
    let grid: Vec<f64> = (0..=50).map(|k| 10f64.powf(-2.0 + 0.1 * k as f64)).collect();
    let mut bracket = None;
    let mut prev = None;
    for &rate in &grid {
        if eval(rate)? >= target {
            bracket = Some((prev.unwrap_or(rate), rate));
            break;
        }
        prev = Some(rate);
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Err(Error::Validation(format!(
            "no sink rate in [1e-2, 1e3] reaches p_sink = {target}"
        )));
    };
    while (hi / lo).ln() > 1e-12 {
        let mid = (lo * hi).sqrt();
        if eval(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let achieved = eval(hi)?;
    Ok(SinkCalibration {
        rate: hi,
        achieved,
        evaluations,
    })
}
