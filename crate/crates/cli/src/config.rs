//! Run configuration shared by every command.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dat_core::analysis::PathwayConfig;
use dat_core::linalg::C64;
use dat_core::model::{build_fcn, disordered_energies, load_network, parse_network, FmoSystem, DEFAULT_RADIATIVE_RATE};
use dat_core::optimize::FreeParameters;
use dat_core::{DephasingSpec, IntegratorConfig, LocalModeSpec, SinkSpec, UnitSystem};
use serde::Deserialize;
use serde_json::Value;

use crate::presets;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkSource,
    /// Sink override; the network's own sink is used otherwise.
    #[serde(default)]
    pub sink: Option<SinkSpec>,
    /// Radiative rate on every site; 0 for FCN networks and 5e-4 ps⁻¹ for
    /// spectroscopic ones by default.
    #[serde(default)]
    pub radiative_rate: Option<f64>,
    #[serde(default)]
    pub initial: Option<InitialState>,
    #[serde(default)]
    pub dephasing: Option<DephasingSpec>,
    #[serde(default)]
    pub modes: Option<LocalModeSpec>,
    /// Missing fields take dimensionless defaults; a missing block takes the
    /// defaults of the network's unit system.
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub observables: ObservablesConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub optimize: Option<OptimizeConfig>,
    #[serde(default)]
    pub pathways: Option<PathwayConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Exactly one of `builtin`, `file` or `fcn`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSource {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub fcn: Option<FcnConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FcnConfig {
    pub n: usize,
    #[serde(default = "one")]
    pub coupling: f64,
    #[serde(default)]
    pub energies: Option<Vec<f64>>,
    #[serde(default)]
    pub disorder: Option<DisorderConfig>,
    #[serde(default = "one")]
    pub sink_rate: f64,
}

/// Site energies drawn uniformly from [low, high).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub low: f64,
    #[serde(default = "one")]
    pub high: f64,
}

/// A site index (1-based) or a list of `[re, im]` site amplitudes.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Site(usize),
    Amplitudes(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesConfig {
    #[serde(default)]
    pub coherence: Option<(usize, usize)>,
    /// Pair mixed into |±⟩; adds p_plus and p_minus columns.
    #[serde(default)]
    pub hybrid_pair: Option<(usize, usize)>,
    /// |ρ_ij| threshold of the coherence-lifetime summary.
    #[serde(default = "default_threshold")]
    pub coherence_threshold: f64,
}

impl Default for ObservablesConfig {
    fn default() -> Self {
        ObservablesConfig {
            coherence: None,
            hybrid_pair: None,
            coherence_threshold: default_threshold(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Uniform local dephasing rate on every site.
    Dephasing,
    /// Damping of the local modes (needs a `modes` block).
    ModeDamping,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    /// Overrides the integrator's t_final for the sweep.
    #[serde(default)]
    pub t_final: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub free_parameters: FreeParameters,
    #[serde(default)]
    pub target_time: Option<f64>,
    #[serde(default)]
    pub bounds: Option<(f64, f64)>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub max_evaluations: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub initial_step: Option<f64>,
    #[serde(default)]
    pub warm_start: Option<Vec<f64>>,
    #[serde(default)]
    pub robustness: Option<RobustnessConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessConfig {
    #[serde(default = "default_factors")]
    pub factors: Vec<f64>,
    #[serde(default = "default_energy_factors")]
    pub energy_factors: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File name stem for the command's outputs.
    #[serde(default)]
    pub prefix: Option<String>,
}

fn one() -> f64 {
    1.0
}

fn default_threshold() -> f64 {
    1e-3
}

fn default_factors() -> Vec<f64> {
    vec![0.5, 2.0]
}

fn default_energy_factors() -> Vec<f64> {
    vec![0.95, 1.05]
}

/// Recursively overlays `top` onto `base`; objects merge, everything else
/// replaces.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, t) => *slot = t,
    }
}

/// Preset values overlaid by the config file, if any.
pub fn load(path: Option<&Path>, preset: Option<&str>) -> Result<RunConfig> {
    let mut value = match preset {
        Some(name) => presets::preset(name)
            .ok_or_else(|| anyhow!("unknown preset '{name}'; available: {}", presets::NAMES.join(", ")))?,
        None => Value::Object(Default::default()),
    };
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let file: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            merge(&mut value, file);
        }
        None if preset.is_none() => bail!("give a config file or --preset"),
        None => {}
    }
    let config: RunConfig = serde_json::from_value(value).context("invalid configuration")?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let n = &self.network;
        let sources = usize::from(n.builtin.is_some()) + usize::from(n.file.is_some()) + usize::from(n.fcn.is_some());
        if sources != 1 {
            bail!("network needs exactly one of builtin, file or fcn (found {sources})");
        }
        if let Some(s) = &self.sweep {
            if s.grid.is_empty() {
                bail!("sweep grid is empty");
            }
            if s.parameter == SweepParameter::ModeDamping && self.modes.is_none() {
                bail!("a mode_damping sweep needs a modes block");
            }
        }
        Ok(())
    }

    /// Network, source, sink and loss rates.
    pub fn system(&self) -> Result<FmoSystem> {
        let mut system = if let Some(name) = &self.network.builtin {
            match name.as_str() {
                "fmo" => FmoSystem::bundled()?,
                other => bail!("unknown builtin network '{other}' (available: fmo)"),
            }
        } else if let Some(path) = &self.network.file {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let file = parse_network(&text)?;
            match file.sink {
                Some(_) => FmoSystem::from_file(&file)?,
                None => FmoSystem::fcn(load_network(path)?, 1.0)?,
            }
        } else {
            let f = self.network.fcn.as_ref().expect("validated network source");
            let energies = match (&f.energies, &f.disorder) {
                (Some(_), Some(_)) => bail!("fcn takes energies or disorder, not both"),
                (Some(e), None) => e.clone(),
                (None, Some(d)) => disordered_energies(f.n, d.low, d.high, d.seed.unwrap_or(self.seed)),
                (None, None) => vec![0.0; f.n],
            };
            FmoSystem::fcn(build_fcn(f.n, f.coupling, &energies)?, f.sink_rate)?
        };
        if let Some(sink) = self.sink {
            system.sink_site = sink.site;
            system.sink_rate = sink.rate;
        }
        system.radiative_rate = match self.radiative_rate {
            Some(r) => r,
            None if system.hamiltonian.units() == UnitSystem::Spectroscopic && self.network.fcn.is_none() => {
                DEFAULT_RADIATIVE_RATE
            }
            None => system.radiative_rate,
        };
        if let Some(InitialState::Site(s)) = self.initial {
            system.source_site = s;
        }
        Ok(FmoSystem::new(
            system.hamiltonian,
            system.source_site,
            system.sink_site,
            system.sink_rate,
            system.radiative_rate,
        )?)
    }

    pub fn integrator(&self, system: &FmoSystem) -> IntegratorConfig {
        self.integrator.clone().unwrap_or_else(|| match system.hamiltonian.units() {
            UnitSystem::Spectroscopic => IntegratorConfig::spectroscopic(5.0),
            UnitSystem::Dimensionless => IntegratorConfig::dimensionless(50.0),
        })
    }

    pub fn amplitudes(&self) -> Option<Vec<C64>> {
        match &self.initial {
            Some(InitialState::Amplitudes(a)) => Some(a.iter().map(|&(re, im)| C64::new(re, im)).collect()),
            _ => None,
        }
    }

    pub fn prefix(&self, default: &str) -> String {
        self.output.prefix.clone().unwrap_or_else(|| default.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn merge_overlays_nested_objects() {
        let mut base = json!({"a": {"b": 1, "c": 2}, "d": [1, 2]});
        merge(&mut base, json!({"a": {"c": 3}, "d": [4]}));
        assert_eq!(base, json!({"a": {"b": 1, "c": 3}, "d": [4]}));
    }

    #[test]
    fn every_preset_parses_and_builds() {
        for name in presets::NAMES {
            let config = load(None, Some(name)).unwrap();
            let system = config.system().unwrap();
            assert!(system.n_sites() == 7, "{name}");
        }
    }

    #[test]
    fn network_source_must_be_unique() {
        let c: RunConfig = serde_json::from_value(json!({"network": {"builtin": "fmo", "fcn": {"n": 3}}})).unwrap();
        assert!(c.validate().is_err());
        let c: RunConfig = serde_json::from_value(json!({"network": {}})).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_value::<RunConfig>(json!({"network": {"builtin": "fmo"}, "typo": 1})).is_err());
    }

    #[test]
    fn fcn_defaults() {
        let c: RunConfig = serde_json::from_value(json!({"network": {"fcn": {"n": 4}}})).unwrap();
        let s = c.system().unwrap();
        assert_eq!((s.source_site, s.sink_site, s.sink_rate, s.radiative_rate), (1, 4, 1.0, 0.0));
        assert_eq!(c.integrator(&s).t_final, 50.0);
    }

    #[test]
    fn initial_state_forms() {
        let c: RunConfig = serde_json::from_value(json!({"network": {"fcn": {"n": 3}}, "initial": 2})).unwrap();
        assert_eq!(c.system().unwrap().source_site, 2);
        let c: RunConfig =
            serde_json::from_value(json!({"network": {"fcn": {"n": 2}}, "initial": [[0.6, 0.0], [0.0, 0.8]]})).unwrap();
        assert_eq!(c.amplitudes().unwrap()[1], C64::new(0.0, 0.8));
    }

    #[test]
    fn out_of_range_sites_are_config_errors() {
        let c: RunConfig =
            serde_json::from_value(json!({"network": {"fcn": {"n": 3}}, "sink": {"site": 9, "rate": 1.0}})).unwrap();
        assert!(c.system().is_err());
    }
}
