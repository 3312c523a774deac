//! Dissipative processes: local and correlated dephasing, radiative decay,
//! sink trapping and damped local vibrational modes.

mod compiled;
mod generator;
mod modes;

pub use compiled::Liouvillian;
pub use generator::{Dissipator, GeneratorSet, SpaceLayout};
pub use modes::{extend_with_modes, DEFAULT_DIMENSION_CAP};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, CMatrix};
use crate::model::site_offset;
use crate::propagate::DensityMatrix;
use crate::units::RateConvention;

/// Symmetry tolerance for correlated rate matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Smallest eigenvalue tolerated in a correlated rate matrix.
pub const PSD_FLOOR: f64 = -1e-10;

/// Pure dephasing, either site-local or spatially correlated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DephasingSpec {
    Local { rates: Vec<f64> },
    Correlated { matrix: Vec<Vec<f64>> },
}

impl DephasingSpec {
    pub fn local(rates: Vec<f64>) -> Result<Self> {
        let spec = DephasingSpec::Local { rates };
        spec.validate()?;
        Ok(spec)
    }

    pub fn correlated(matrix: &DMatrix<f64>) -> Result<Self> {
        let spec = DephasingSpec::Correlated {
            matrix: (0..matrix.nrows())
                .map(|i| matrix.row(i).iter().copied().collect())
                .collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(n: usize, gamma: f64) -> Result<Self> {
        Self::local(vec![gamma; n])
    }

    pub fn n_sites(&self) -> usize {
        match self {
            DephasingSpec::Local { rates } => rates.len(),
            DephasingSpec::Correlated { matrix } => matrix.len(),
        }
    }

    /// The N×N rate matrix γ_mn (diagonal for local dephasing).
    pub fn rate_matrix(&self) -> DMatrix<f64> {
        match self {
            DephasingSpec::Local { rates } => DMatrix::from_diagonal(&rates.clone().into()),
            DephasingSpec::Correlated { matrix } => {
                let n = matrix.len();
                DMatrix::from_fn(n, n, |i, j| matrix[i].get(j).copied().unwrap_or(f64::NAN))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DephasingSpec::Local { rates } => {
                if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
                    return Err(Error::Validation(format!(
                        "dephasing rate {r} must be finite and non-negative"
                    )));
                }
                Ok(())
            }
            DephasingSpec::Correlated { matrix } => {
                let n = matrix.len();
                if matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::Format("correlated matrix must be square".into()));
                }
                validate_rate_matrix(&self.rate_matrix())
            }
        }
    }
}

/// Checks symmetry and positive semidefiniteness of a correlated rate matrix.
pub fn validate_rate_matrix(gamma: &DMatrix<f64>) -> Result<()> {
    if !gamma.is_square() {
        return Err(Error::dims(gamma.nrows(), gamma.ncols()));
    }
    if gamma.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("non-finite dephasing rate".into()));
    }
    let asym = (gamma - gamma.transpose()).amax();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::Validation(format!(
            "correlated rate matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    if gamma.nrows() > 0 {
        let min = symmetric_eigenvalues(gamma)[0];
        if min < PSD_FLOOR {
            return Err(Error::Validation(format!(
                "correlated rate matrix is not positive semidefinite (min eigenvalue {min:e}); \
                 the generator would not be completely positive"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkSpec {
    /// 1-based site feeding the sink.
    pub site: usize,
    /// Γ_{N+1}; the sink fills at 2Γ_{N+1} ρ_kk.
    pub rate: f64,
}

/// Radiative losses and sink trapping.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DissipationSpec {
    /// Γ_j per site; site j empties into the ground state at 2Γ_j.
    #[serde(default)]
    pub radiative_rates: Vec<f64>,
    #[serde(default)]
    pub sink: Option<SinkSpec>,
}

impl DissipationSpec {
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if !self.radiative_rates.is_empty() && self.radiative_rates.len() != n_sites {
            return Err(Error::dims(n_sites, self.radiative_rates.len()));
        }
        if self.radiative_rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Validation("radiative rates must be non-negative".into()));
        }
        if let Some(s) = &self.sink {
            site_offset(s.site, n_sites)?;
            if !(s.rate > 0.0 && s.rate.is_finite()) {
                return Err(Error::Validation("sink rate must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Two-level local vibrational modes, one per attached site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalModeSpec {
    /// Mode frequency ω_H in energy units (cm⁻¹ for spectroscopic networks).
    #[serde(default = "LocalModeSpec::default_omega")]
    pub omega_h: f64,
    /// Huang–Rhys factor S_H.
    #[serde(default = "LocalModeSpec::default_huang_rhys")]
    pub s_h: f64,
    /// Mode damping Γ in energy units; each mode decays at 2Γ.
    #[serde(default)]
    pub damping: f64,
    /// 1-based sites carrying a mode.
    pub sites: Vec<usize>,
    #[serde(default)]
    pub damping_convention: RateConvention,
}

impl LocalModeSpec {
    fn default_omega() -> f64 {
        180.0
    }

    fn default_huang_rhys() -> f64 {
        0.22
    }

    pub fn new(sites: Vec<usize>, damping: f64) -> Self {
        LocalModeSpec {
            omega_h: Self::default_omega(),
            s_h: Self::default_huang_rhys(),
            damping,
            sites,
            damping_convention: RateConvention::Kappa,
        }
    }

    /// Exciton–mode coupling g = √S_H · ω_H.
    pub fn coupling(&self) -> f64 {
        self.s_h.sqrt() * self.omega_h
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if !(self.omega_h > 0.0) {
            return Err(Error::Validation("mode frequency must be positive".into()));
        }
        if !(self.s_h >= 0.0) || !(self.damping >= 0.0) {
            return Err(Error::Validation(
                "Huang-Rhys factor and damping must be non-negative".into(),
            ));
        }
        if self.sites.is_empty() {
            return Err(Error::Validation("at least one site must carry a mode".into()));
        }
        let mut seen = vec![false; n_sites];
        for &s in &self.sites {
            let o = site_offset(s, n_sites)?;
            if seen[o] {
                return Err(Error::Validation(format!("site {s} listed twice for modes")));
            }
            seen[o] = true;
        }
        Ok(())
    }
}

/// Complete dissipative description of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing: Option<DephasingSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radiative: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<SinkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<LocalModeSpec>,
}

impl NoiseSpec {
    pub fn dissipation(&self) -> DissipationSpec {
        DissipationSpec {
            radiative_rates: self.radiative.clone(),
            sink: self.sink,
        }
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if let Some(d) = &self.dephasing {
            if d.n_sites() != n_sites {
                return Err(Error::dims(n_sites, d.n_sites()));
            }
            d.validate()?;
        }
        self.dissipation().validate(n_sites)?;
        if let Some(m) = &self.modes {
            m.validate(n_sites)?;
        }
        Ok(())
    }
}

fn check_dims(rho: &DensityMatrix, n_sites: usize) -> Result<()> {
    if rho.layout().n_sites() != n_sites {
        return Err(Error::dims(n_sites, rho.layout().n_sites()));
    }
    Ok(())
}

/// Σ_j γ_j [−{n_j, ρ} + 2 n_j ρ n_j] with n_j the site-j projector.
pub fn apply_local_dephasing(rho: &DensityMatrix, spec: &DephasingSpec) -> Result<CMatrix> {
    let DephasingSpec::Local { .. } = spec else {
        return Err(Error::Validation("expected local dephasing".into()));
    };
    check_dims(rho, spec.n_sites())?;
    spec.validate()?;
    let term = Dissipator::Dephasing {
        gamma: spec.rate_matrix(),
    };
    Ok(term.apply(rho.matrix(), rho.layout()))
}

/// −Σ_mn γ_mn [A_m, [A_n, ρ]] with A_m the site-m projector.
pub fn apply_correlated_dephasing(rho: &DensityMatrix, gamma: &DMatrix<f64>) -> Result<CMatrix> {
    validate_rate_matrix(gamma)?;
    check_dims(rho, gamma.nrows())?;
    let term = Dissipator::Dephasing {
        gamma: gamma.clone(),
    };
    Ok(term.apply(rho.matrix(), rho.layout()))
}

/// Σ_j Γ_j [−{n_j, ρ} + 2 σ_j⁻ ρ σ_j⁺].
pub fn apply_radiative(rho: &DensityMatrix, spec: &DissipationSpec) -> Result<CMatrix> {
    let layout = rho.layout();
    spec.validate(layout.n_sites())?;
    let mut out = CMatrix::zeros(layout.dim(), layout.dim());
    for term in generator::radiative_terms(layout, &spec.radiative_rates) {
        out += term.apply(rho.matrix(), layout);
    }
    Ok(out)
}

/// Γ_{N+1} [2 σ_{N+1}⁺σ_k⁻ ρ σ_k⁺σ_{N+1}⁻ − {n_k, ρ}].
pub fn apply_sink(rho: &DensityMatrix, spec: &DissipationSpec) -> Result<CMatrix> {
    let layout = rho.layout();
    spec.validate(layout.n_sites())?;
    Ok(match &spec.sink {
        Some(s) => generator::sink_term(layout, s).apply(rho.matrix(), layout),
        None => CMatrix::zeros(layout.dim(), layout.dim()),
    })
}
