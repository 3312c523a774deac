//! run, sweep, optimize, invariant and pathways.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use dat_core::analysis::{asymptotic_sink, invariant_subspace, pathway_report, InvariantReport};
use dat_core::model::hybrid_transform;
use dat_core::optimize::{optimize_correlated, optimize_local, robustness_scan, FreeParameters};
use dat_core::propagate::{trajectory_csv, trajectory_json};
use dat_core::{
    evolve_with, DensityMatrix, DephasingSpec, FmoSystem, GeneratorSet, IntegratorConfig, NoiseSpec,
    Observables, OptimizationProblem, Trajectory,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{RunConfig, SweepParameter};

/// A failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const CONFIG_ERROR: u8 = 2;
pub const NUMERICAL_ERROR: u8 = 3;
pub const OUTPUT_ERROR: u8 = 1;

impl Failure {
    pub fn config(error: anyhow::Error) -> Self {
        Failure { code: CONFIG_ERROR, error }
    }

    fn output(error: anyhow::Error) -> Self {
        Failure { code: OUTPUT_ERROR, error }
    }
}

impl From<dat_core::Error> for Failure {
    fn from(e: dat_core::Error) -> Self {
        let code = if e.is_numerical() { NUMERICAL_ERROR } else { CONFIG_ERROR };
        Failure { code, error: e.into() }
    }
}

type Outcome<T> = Result<T, Failure>;

fn config_err<T>(r: anyhow::Result<T>) -> Outcome<T> {
    r.map_err(Failure::config)
}

fn write(dir: &Path, name: &str, contents: &str) -> Outcome<PathBuf> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, contents))
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::output)?;
    Ok(path)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Everything a single evolution needs.
struct Experiment {
    system: FmoSystem,
    noise: NoiseSpec,
    integrator: IntegratorConfig,
    amplitudes: Option<Vec<dat_core::linalg::C64>>,
    observables: Observables,
}

impl Experiment {
    fn new(config: &RunConfig) -> Outcome<Self> {
        let system = config_err(config.system())?;
        let mut noise = system.noise(config.dephasing.clone());
        noise.modes = config.modes.clone();
        let observables = Observables {
            coherence: config.observables.coherence,
            transform: match config.observables.hybrid_pair {
                Some(pair) => Some(hybrid_transform(system.n_sites(), pair)?),
                None => None,
            },
        };
        Ok(Experiment {
            integrator: config.integrator(&system),
            system,
            noise,
            amplitudes: config.amplitudes(),
            observables,
        })
    }

    fn run_with(&self, noise: &NoiseSpec, integrator: &IntegratorConfig) -> Outcome<Trajectory> {
        let g = GeneratorSet::build(&self.system.hamiltonian, noise)?;
        let rho0 = match &self.amplitudes {
            Some(a) => DensityMatrix::pure_state(g.layout().clone(), a)?,
            None => self.system.initial_state(&g)?,
        };
        Ok(evolve_with(&rho0, &g, integrator, &self.observables)?)
    }
}

pub fn run(config: &RunConfig, out: &Path) -> Outcome<()> {
    let exp = Experiment::new(config)?;
    let traj = exp.run_with(&exp.noise, &exp.integrator)?;
    let threshold = config.observables.coherence_threshold;
    let lifetime = traj.coherence_lifetime(threshold);
    let (a, b) = traj.coherence_pair;
    let prefix = config.prefix("trajectory");
    let mut doc = trajectory_json(&traj);
    doc["summary"] = json!({
        "t_final": traj.final_time(),
        "p_sink": traj.final_sink(),
        "coherence_pair": [a, b],
        "coherence_threshold": threshold,
        "coherence_lifetime": lifetime,
    });
    let csv = write(out, &format!("{prefix}.csv"), &trajectory_csv(&traj))?;
    write(out, &format!("{prefix}.json"), &pretty(&doc))?;
    let coherence = if lifetime.is_finite() {
        format!("|rho_{a}{b}| < {threshold:e} from t = {lifetime}")
    } else {
        format!("|rho_{a}{b}| >= {threshold:e} at t_final")
    };
    println!(
        "p_sink(t={}) = {:.6}; {coherence}; wrote {}",
        traj.final_time(),
        traj.final_sink(),
        csv.display()
    );
    Ok(())
}

pub fn sweep(config: &RunConfig, out: &Path) -> Outcome<()> {
    let Some(spec) = &config.sweep else {
        return Err(Failure::config(anyhow::anyhow!("configuration has no sweep block")));
    };
    let exp = Experiment::new(config)?;
    let mut integrator = exp.integrator.clone();
    if let Some(t) = spec.t_final {
        integrator.t_final = t;
    }
    let n = exp.system.n_sites();
    let results: Vec<Outcome<f64>> = spec
        .grid
        .par_iter()
        .map(|&x| {
            let mut noise = exp.noise.clone();
            match spec.parameter {
                SweepParameter::Dephasing => noise.dephasing = Some(DephasingSpec::uniform(n, x)?),
                SweepParameter::ModeDamping => {
                    if let Some(m) = noise.modes.as_mut() {
                        m.damping = x;
                    }
                }
            }
            Ok(exp.run_with(&noise, &integrator)?.final_sink())
        })
        .collect();
    let column = match spec.parameter {
        SweepParameter::Dephasing => "gamma",
        SweepParameter::ModeDamping => "damping",
    };
    let mut csv = format!("{column},p_sink\n");
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for (&x, r) in spec.grid.iter().zip(results) {
        let p = r?;
        if p > best.1 {
            best = (x, p);
        }
        csv.push_str(&format!("{x:.11e},{p:.11e}\n"));
    }
    let path = write(out, &format!("{}.csv", config.prefix("sweep")), &csv)?;
    println!(
        "{} points at t = {}; max p_sink = {:.6} at {column} = {}; wrote {}",
        spec.grid.len(),
        integrator.t_final,
        best.1,
        best.0,
        path.display()
    );
    Ok(())
}

pub fn optimize(config: &RunConfig, out: &Path) -> Outcome<()> {
    let Some(spec) = &config.optimize else {
        return Err(Failure::config(anyhow::anyhow!("configuration has no optimize block")));
    };
    let system = config_err(config.system())?;
    let mut problem = OptimizationProblem::new(system, spec.free_parameters.clone());
    problem.seed = spec.seed.unwrap_or(config.seed);
    if let Some(t) = spec.target_time {
        problem.target_time = t;
    }
    if let Some(b) = spec.bounds {
        problem.bounds = b;
    }
    if let Some(r) = spec.restarts {
        problem.restarts = r;
    }
    if let Some(m) = spec.max_evaluations {
        problem.max_evaluations = m;
    }
    if let Some(dt) = spec.dt {
        problem.dt = dt;
    }
    if let Some(s) = spec.initial_step {
        problem.initial_step = s;
    }
    problem.warm_start = spec.warm_start.clone();
    let result = match problem.free_parameters {
        FreeParameters::LocalRates { .. } => optimize_local(&problem)?,
        FreeParameters::CorrelatedMatrix { .. } => optimize_correlated(&problem)?,
    };
    let prefix = config.prefix("optimization");
    let mut doc: Value = serde_json::from_str(&result.to_json()).expect("result JSON parses");
    if let Some(r) = &spec.robustness {
        let table = robustness_scan(&problem, &result, &r.factors, &r.energy_factors)?;
        doc["robustness"] = serde_json::to_value(&table).expect("table serializes");
        println!(
            "worst degradation: joint rates {:.4}, energies {:.4}",
            table.worst_degradation("rates"),
            table.worst_degradation("energies")
        );
    }
    let path = write(out, &format!("{prefix}.json"), &pretty(&doc))?;
    println!(
        "p_sink({}) = {:.6} after {} evaluations (best restart {}); wrote {}",
        problem.target_time,
        result.best_objective,
        result.evaluations,
        result.best_restart,
        path.display()
    );
    Ok(())
}

pub fn invariant(config: &RunConfig, out: &Path) -> Outcome<()> {
    let system = config_err(config.system())?;
    let h = system.hamiltonian.complex_matrix();
    let sub = invariant_subspace(&h, system.sink_site)?;
    let amplitudes = config.amplitudes();
    let initial_site = amplitudes.is_none().then_some(system.source_site);
    let report = InvariantReport::new(&sub, &h, initial_site)?;
    let mut doc = serde_json::to_value(&report).expect("report serializes");
    let asymptotic = match &amplitudes {
        Some(a) => {
            if a.len() != system.n_sites() {
                bail_config(format!("initial state has {} amplitudes for {} sites", a.len(), system.n_sites()))?;
            }
            let p = asymptotic_sink(a, &h, system.sink_site)?;
            doc["asymptotic_sink"] = json!(p);
            p
        }
        None => report.asymptotic_sink.unwrap_or(f64::NAN),
    };
    let path = write(out, &format!("{}.json", config.prefix("invariant")), &pretty(&doc))?;
    println!(
        "dark subspace dimension {}; asymptotic p_sink = {asymptotic:.12}; wrote {}",
        report.dimension,
        path.display()
    );
    Ok(())
}

fn bail_config(message: String) -> Outcome<()> {
    config_err((|| bail!(message))())
}

pub fn pathways(config: &RunConfig, out: &Path) -> Outcome<()> {
    let system = config_err(config.system())?;
    let settings = config.pathways.clone().unwrap_or_default();
    let report = pathway_report(&system, &settings)?;
    let doc = serde_json::to_value(&report).expect("report serializes");
    let path = write(out, &format!("{}.json", config.prefix("pathways")), &pretty(&doc))?;
    println!(
        "path II / path I = {:.4}; zeroed <-|H|{}> rate / baseline = {:.4}; wrote {}",
        report.ratios.path2_over_path1,
        settings.minus_partner,
        report.ratios.minus6_zeroed_over_baseline,
        path.display()
    );
    Ok(())
}
