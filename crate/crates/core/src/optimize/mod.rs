//! Dephasing-rate optimization of the sink population, sweeps and
//! robustness scans.

mod nelder_mead;
mod sampling;

pub use nelder_mead::{maximize, NelderMeadOptions, SearchOutcome, TracePoint};
pub use sampling::latin_hypercube;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{site_offset, FmoSystem};
use crate::noise::DephasingSpec;
use crate::propagate::IntegratorConfig;

/// Which dephasing parameters the search may change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FreeParameters {
    /// Local rates on the listed sites (1-based); other sites get γ = 0.
    LocalRates { sites: Vec<usize> },
    /// Full PSD rate matrix γ = L Lᵀ, L = D^{1/2} C lower-triangular.
    ///
    /// D holds the diagonal rates (log₁₀ coordinates). Row i of C is
    /// (c_i1, …, c_i,i−1, 1) normalized to unit length, with raw entries in
    /// [−`off_diagonal_bound`, `off_diagonal_bound`]. With `diagonal_only`
    /// the raw entries are fixed at 0 and γ is diagonal.
    CorrelatedMatrix {
        #[serde(default = "default_off_diagonal_bound")]
        off_diagonal_bound: f64,
        #[serde(default)]
        diagonal_only: bool,
    },
}

fn default_off_diagonal_bound() -> f64 {
    3.0
}

/// Maximize p_sink(`target_time`) over dephasing parameters.
#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    pub system: FmoSystem,
    pub free_parameters: FreeParameters,
    pub target_time: f64,
    /// log₁₀ bounds on every rate, rates in the system's inverse time unit.
    pub bounds: (f64, f64),
    pub restarts: usize,
    /// Objective evaluations per restart.
    pub max_evaluations: usize,
    pub seed: u64,
    /// Integrator step for each objective evaluation.
    pub dt: f64,
    pub initial_step: f64,
    /// Local rates (all sites) used as the first restart's starting point.
    pub warm_start: Option<Vec<f64>>,
}

impl OptimizationProblem {
    pub fn new(system: FmoSystem, free_parameters: FreeParameters) -> Self {
        OptimizationProblem {
            system,
            free_parameters,
            target_time: 5.0,
            bounds: (-3.0, 3.0),
            restarts: 16,
            max_evaluations: 400,
            seed: 0,
            dt: 1e-3,
            initial_step: 0.5,
            warm_start: None,
        }
    }

    pub fn local(system: FmoSystem, sites: Vec<usize>) -> Self {
        Self::new(system, FreeParameters::LocalRates { sites })
    }

    pub fn correlated(system: FmoSystem) -> Self {
        Self::new(
            system,
            FreeParameters::CorrelatedMatrix {
                off_diagonal_bound: default_off_diagonal_bound(),
                diagonal_only: false,
            },
        )
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Validation("rate bounds must be finite with lower < upper".into()));
        }
        if !(self.target_time > 0.0 && self.target_time.is_finite()) {
            return Err(Error::Validation("target time must be positive".into()));
        }
        if self.restarts == 0 || self.max_evaluations == 0 {
            return Err(Error::Validation("restarts and evaluations must be at least 1".into()));
        }
        self.integrator().validate()?;
        let n = self.system.n_sites();
        match &self.free_parameters {
            FreeParameters::LocalRates { sites } => {
                if sites.is_empty() {
                    return Err(Error::Validation("no free sites".into()));
                }
                let mut seen = vec![false; n];
                for &s in sites {
                    let o = site_offset(s, n)?;
                    if std::mem::replace(&mut seen[o], true) {
                        return Err(Error::Validation(format!("site {s} listed twice")));
                    }
                }
            }
            FreeParameters::CorrelatedMatrix { off_diagonal_bound, .. } => {
                if !(off_diagonal_bound.is_finite() && *off_diagonal_bound >= 0.0) {
                    return Err(Error::Validation("off-diagonal bound must be finite".into()));
                }
            }
        }
        if let Some(w) = &self.warm_start {
            if w.len() != n {
                return Err(Error::dims(n, w.len()));
            }
        }
        Ok(())
    }

    /// Integrator settings of one objective evaluation.
    pub fn integrator(&self) -> IntegratorConfig {
        let steps = (self.target_time / self.dt).round().max(1.0) as usize;
        IntegratorConfig {
            dt: self.dt,
            t_final: self.target_time,
            record_stride: steps,
            ..IntegratorConfig::spectroscopic(self.target_time)
        }
    }

    /// Box of the search coordinates.
    pub fn search_bounds(&self) -> Vec<(f64, f64)> {
        let n = self.system.n_sites();
        match &self.free_parameters {
            FreeParameters::LocalRates { sites } => vec![self.bounds; sites.len()],
            FreeParameters::CorrelatedMatrix { off_diagonal_bound, diagonal_only } => {
                let mut b = vec![self.bounds; n];
                if !diagonal_only {
                    let c = *off_diagonal_bound;
                    b.extend(std::iter::repeat((-c, c)).take(n * (n - 1) / 2));
                }
                b
            }
        }
    }

    /// Dephasing described by search coordinates `x`.
    pub fn dephasing_for(&self, x: &[f64]) -> Result<DephasingSpec> {
        let n = self.system.n_sites();
        match &self.free_parameters {
            FreeParameters::LocalRates { sites } => {
                if x.len() != sites.len() {
                    return Err(Error::dims(sites.len(), x.len()));
                }
                let mut rates = vec![0.0; n];
                for (&s, &v) in sites.iter().zip(x) {
                    rates[s - 1] = 10f64.powf(v);
                }
                DephasingSpec::local(rates)
            }
            FreeParameters::CorrelatedMatrix { .. } => {
                let l = correlated_factor(x, n)?;
                DephasingSpec::correlated(&(&l * l.transpose()))
            }
        }
    }

    /// p_sink(target_time) for the given dephasing (`None`: noiseless).
    pub fn objective_for(&self, dephasing: Option<DephasingSpec>) -> Result<f64> {
        self.system.sink_yield(dephasing, &self.integrator())
    }

    /// p_sink(target_time) at search coordinates `x`.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        self.objective_for(Some(self.dephasing_for(x)?))
    }

    /// p_sink(target_time) with γ = L Lᵀ for an explicit factor L.
    pub fn objective_for_factor(&self, l: &DMatrix<f64>) -> Result<f64> {
        let n = self.system.n_sites();
        if l.nrows() != n || l.ncols() != n {
            return Err(Error::dims(n, l.nrows()));
        }
        self.objective_for(Some(DephasingSpec::correlated(&(l * l.transpose()))?))
    }

    fn starting_points(&self) -> Vec<Vec<f64>> {
        let bounds = self.search_bounds();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut starts = latin_hypercube(self.restarts, &bounds, &mut rng);
        if let Some(rates) = &self.warm_start {
            let log = |r: f64| {
                if r > 0.0 {
                    r.log10().clamp(self.bounds.0, self.bounds.1)
                } else {
                    self.bounds.0
                }
            };
            let mut x: Vec<f64> = match &self.free_parameters {
                FreeParameters::LocalRates { sites } => sites.iter().map(|&s| log(rates[s - 1])).collect(),
                FreeParameters::CorrelatedMatrix { .. } => rates.iter().map(|&r| log(r)).collect(),
            };
            x.resize(bounds.len(), 0.0);
            starts[0] = x;
        }
        starts
    }
}

/// L = D^{1/2} C from correlated search coordinates.
pub fn correlated_factor(x: &[f64], n: usize) -> Result<DMatrix<f64>> {
    let off = n * (n - 1) / 2;
    if x.len() != n && x.len() != n + off {
        return Err(Error::dims(n + off, x.len()));
    }
    let mut l = DMatrix::zeros(n, n);
    let mut k = n;
    for i in 0..n {
        let mut row = vec![0.0; i + 1];
        for r in row.iter_mut().take(i) {
            if x.len() > n {
                *r = x[k];
                k += 1;
            }
        }
        row[i] = 1.0;
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = 10f64.powf(x[i]).sqrt() / norm;
        for (j, v) in row.iter().enumerate() {
            l[(i, j)] = v * scale;
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartRecord {
    pub index: usize,
    pub start: Vec<f64>,
    pub best_parameters: Vec<f64>,
    pub best_objective: f64,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Budget {
    pub restarts: usize,
    pub max_evaluations_per_restart: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub free_parameters: FreeParameters,
    /// Search coordinates of the best point.
    #[serde(rename = "parameters")]
    pub best_parameters: Vec<f64>,
    #[serde(rename = "objective")]
    pub best_objective: f64,
    /// Diagonal rates γ_jj at the best point, per site.
    pub rates: Vec<f64>,
    /// Full rate matrix at the best point.
    pub gamma_matrix: Vec<Vec<f64>>,
    pub best_restart: usize,
    pub restarts: Vec<RestartRecord>,
    pub evaluations: usize,
    pub seed: u64,
    pub budget: Budget,
    pub target_time: f64,
    pub bounds: (f64, f64),
}

impl OptimizationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn gamma(&self) -> DMatrix<f64> {
        let n = self.gamma_matrix.len();
        DMatrix::from_fn(n, n, |i, j| self.gamma_matrix[i][j])
    }
}

fn run_search(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    problem.validate()?;
    let bounds = problem.search_bounds();
    let options = NelderMeadOptions {
        max_evaluations: problem.max_evaluations,
        initial_step: problem.initial_step,
        ..Default::default()
    };
    let starts = problem.starting_points();
    let records: Vec<RestartRecord> = starts
        .into_par_iter()
        .enumerate()
        .map(|(index, start)| {
            let objective = |x: &[f64]| match problem.objective(x) {
                Ok(v) => v,
                Err(e) => {
                    log::warn!("restart {index}: evaluation at {x:?} failed: {e}");
                    f64::NEG_INFINITY
                }
            };
            let out = maximize(objective, &start, &bounds, &options);
            RestartRecord {
                index,
                start,
                best_parameters: out.best_x,
                best_objective: out.best_f,
                evaluations: out.evaluations,
                trace: out.trace,
            }
        })
        .collect();
    let mut best = 0;
    for (i, r) in records.iter().enumerate() {
        if r.best_objective > records[best].best_objective {
            best = i;
        }
    }
    let rec = &records[best];
    if !rec.best_objective.is_finite() {
        return Err(Error::NumericalInstability {
            time: problem.target_time,
            detail: "every objective evaluation failed".into(),
        });
    }
    let gamma = problem.dephasing_for(&rec.best_parameters)?.rate_matrix();
    let n = gamma.nrows();
    Ok(OptimizationResult {
        free_parameters: problem.free_parameters.clone(),
        best_parameters: rec.best_parameters.clone(),
        best_objective: rec.best_objective,
        rates: (0..n).map(|i| gamma[(i, i)]).collect(),
        gamma_matrix: (0..n).map(|i| gamma.row(i).iter().copied().collect()).collect(),
        best_restart: best,
        evaluations: records.iter().map(|r| r.evaluations).sum(),
        restarts: records,
        seed: problem.seed,
        budget: Budget {
            restarts: problem.restarts,
            max_evaluations_per_restart: problem.max_evaluations,
        },
        target_time: problem.target_time,
        bounds: problem.bounds,
    })
}

/// Multi-start bounded simplex search over local log₁₀ rates.
///
/// Starting points come from a seeded Latin hypercube (the first one is
/// replaced by `warm_start` when given). Restarts run in parallel; the best
/// restart wins, ties going to the lowest index. Failed evaluations score
/// −∞ and are logged.
pub fn optimize_local(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    if !matches!(problem.free_parameters, FreeParameters::LocalRates { .. }) {
        return Err(Error::Validation("optimize_local needs local-rate parameters".into()));
    }
    run_search(problem)
}

/// As [`optimize_local`] over the correlated rate matrix γ = L Lᵀ.
pub fn optimize_correlated(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    if !matches!(problem.free_parameters, FreeParameters::CorrelatedMatrix { .. }) {
        return Err(Error::Validation(
            "optimize_correlated needs correlated-matrix parameters".into(),
        ));
    }
    run_search(problem)
}

/// p_sink(config.t_final) under uniform local dephasing γ for every γ of
/// `grid`, in grid order.
pub fn dephasing_sweep(system: &FmoSystem, grid: &[f64], config: &IntegratorConfig) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(Error::Validation("empty dephasing grid".into()));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) || grid.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
        return Err(Error::Validation(
            "dephasing grid must be finite, non-negative and ascending".into(),
        ));
    }
    let n = system.n_sites();
    grid.par_iter()
        .map(|&g| {
            let deph = DephasingSpec::uniform(n, g)?;
            Ok((g, system.sink_yield(Some(deph), config)?))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessRow {
    pub perturbation: String,
    pub factor: f64,
    pub objective: f64,
    /// best objective − objective.
    pub degradation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessTable {
    pub best_objective: f64,
    pub rows: Vec<RobustnessRow>,
}

impl RobustnessTable {
    pub fn worst_degradation(&self, prefix: &str) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.perturbation.starts_with(prefix))
            .map(|r| r.degradation)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Objective under rescaled optimal rates and perturbed site energies.
///
/// Rates are rescaled by every factor jointly ("rates") and one site at a
/// time ("rate j", γ → SγS with S = diag(1, …, √f, …, 1)). Site energies are
/// rescaled jointly by every entry of `energy_factors` ("energies").
pub fn robustness_scan(
    problem: &OptimizationProblem,
    result: &OptimizationResult,
    factors: &[f64],
    energy_factors: &[f64],
) -> Result<RobustnessTable> {
    let gamma = result.gamma();
    let n = gamma.nrows();
    let local = matches!(problem.free_parameters, FreeParameters::LocalRates { .. });
    let spec_for = |s: &[f64]| -> Result<DephasingSpec> {
        if local {
            DephasingSpec::local((0..n).map(|i| gamma[(i, i)] * s[i] * s[i]).collect())
        } else {
            let m = DMatrix::from_fn(n, n, |i, j| s[i] * gamma[(i, j)] * s[j]);
            DephasingSpec::correlated(&m)
        }
    };
    let mut jobs: Vec<(String, f64, Option<usize>, bool)> = Vec::new();
    for &f in factors {
        jobs.push(("rates".into(), f, None, false));
    }
    for j in 0..n {
        if gamma[(j, j)] == 0.0 {
            continue;
        }
        for &f in factors {
            jobs.push((format!("rate {}", j + 1), f, Some(j), false));
        }
    }
    for &f in energy_factors {
        jobs.push(("energies".into(), f, None, true));
    }
    let config = problem.integrator();
    let rows: Result<Vec<RobustnessRow>> = jobs
        .into_par_iter()
        .map(|(label, f, site, energies)| {
            let objective = if energies {
                let e: Vec<f64> = problem.system.hamiltonian.energies().iter().map(|x| x * f).collect();
                let system = FmoSystem {
                    hamiltonian: problem.system.hamiltonian.with_energies(e)?,
                    ..problem.system.clone()
                };
                system.sink_yield(Some(spec_for(&vec![1.0; n])?), &config)?
            } else {
                let s: Vec<f64> = (0..n)
                    .map(|i| if site.is_none() || site == Some(i) { f.sqrt() } else { 1.0 })
                    .collect();
                problem.system.sink_yield(Some(spec_for(&s)?), &config)?
            };
            Ok(RobustnessRow {
                perturbation: label,
                factor: f,
                objective,
                degradation: result.best_objective - objective,
            })
        })
        .collect();
    Ok(RobustnessTable {
        best_objective: result.best_objective,
        rows: rows?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigenvalues;

    #[test]
    fn correlated_factor_has_requested_diagonal() {
        let x = [0.0, 1.0, -1.0, 0.5, -2.0, 1.5];
        let l = correlated_factor(&x, 3).unwrap();
        let g = &l * l.transpose();
        for i in 0..3 {
            assert!((g[(i, i)] - 10f64.powf(x[i])).abs() < 1e-12 * g[(i, i)].max(1.0));
        }
        assert!(symmetric_eigenvalues(&g)[0] > -1e-12);
    }

    #[test]
    fn diagonal_only_factor_is_diagonal() {
        let l = correlated_factor(&[0.0, 1.0, 2.0], 3).unwrap();
        assert_eq!(l[(1, 0)], 0.0);
        assert!((l[(2, 2)] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn search_dimensions() {
        let sys = FmoSystem::bundled().unwrap();
        assert_eq!(OptimizationProblem::local(sys.clone(), vec![1, 2]).search_bounds().len(), 2);
        assert_eq!(OptimizationProblem::correlated(sys).search_bounds().len(), 28);
    }

    #[test]
    fn invalid_problems_rejected() {
        let sys = FmoSystem::bundled().unwrap();
        let mut p = OptimizationProblem::local(sys.clone(), vec![1, 1]);
        assert!(p.validate().is_err());
        p = OptimizationProblem::local(sys.clone(), vec![8]);
        assert!(p.validate().is_err());
        p = OptimizationProblem::local(sys, vec![1]);
        p.bounds = (1.0, f64::INFINITY);
        assert!(p.validate().is_err());
    }
}
