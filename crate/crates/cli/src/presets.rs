//! Bundled configurations, selected with `--preset NAME`.

use dat_core::IntegratorConfig;
use serde_json::{json, Value};

pub const NAMES: [&str; 7] = [
    "fcn7",
    "fcn7_disorder",
    "fmo",
    "fmo_optimized",
    "fmo_sites12",
    "fmo_correlated",
    "fmo_modes",
];

/// Seed of the disordered FCN: the first seed from 0 whose noiseless
/// p_sink(1000) exceeds 0.99.
pub const DISORDER_SEED: u64 = 8;

/// Best local rates (ps⁻¹) found by the `fmo_optimized` search.
pub const LOCAL_OPTIMUM: [f64; 7] = [
    0.004760786397204807,
    24.271750546149416,
    0.008209801706714488,
    19.32205537155166,
    0.021772833833046595,
    999.9687681396288,
    5.388921432389044,
];

/// Best rates on sites 1 and 2 (ps⁻¹) found by the `fmo_sites12` search.
pub const SITES12_OPTIMUM: [f64; 7] = [0.001, 19.67907786284065, 0.0, 0.0, 0.0, 0.0, 0.0];

/// Best correlated rate matrix (ps⁻¹) found by the `fmo_correlated` search.
pub const CORRELATED_OPTIMUM: [[f64; 7]; 7] = [
    [0.009273076856145757, -0.11646376769374452, 0.001053939621539697, 0.09921751534345004, 0.0024239012460485257, 0.3143984126303783, 0.029421032040119623],
    [-0.11646376769374452, 24.493056565239087, 0.3068013556427465, -16.89059643426432, 0.24184873387697273, -65.7744604178856, -5.692535926413291],
    [0.001053939621539697, 0.3068013556427465, 0.01929277684738131, -0.1618853535037807, 0.01678907183753057, -0.8429617580495727, -0.07632815523732106],
    [0.09921751534345004, -16.89059643426432, -0.1618853535037807, 17.270012875106495, -0.10773932113350936, 55.095917267623896, 0.11209739445131577],
    [0.0024239012460485257, 0.24184873387697273, 0.01678907183753057, -0.10773932113350936, 0.035706298423569045, -0.1781472513603697, -0.018124427278998025],
    [0.3143984126303783, -65.7744604178856, -0.8429617580495727, 55.095917267623896, -0.1781472513603697, 784.4551088091829, 11.327902847224196],
    [0.029421032040119623, -5.692535926413291, -0.07632815523732106, 0.11209739445131577, -0.018124427278998025, 11.327902847224196, 6.214574745201472],
];

fn log_grid(from: f64, to: f64, per_decade: usize) -> Vec<f64> {
    let n = ((to - from) * per_decade as f64).round() as usize;
    (0..=n).map(|k| 10f64.powf(from + k as f64 / per_decade as f64)).collect()
}

fn integrator(config: IntegratorConfig) -> Value {
    serde_json::to_value(config).expect("integrator config serializes")
}

fn fcn7(disorder: bool) -> Value {
    let mut fcn = json!({"n": 7, "coupling": 1.0, "sink_rate": 1.0});
    if disorder {
        fcn["disorder"] = json!({"seed": DISORDER_SEED, "low": 0.0, "high": 1.0});
    }
    let t_final = if disorder { 1000.0 } else { 300.0 };
    json!({
        "network": {"fcn": fcn},
        "integrator": integrator(IntegratorConfig { record_stride: 100, ..IntegratorConfig::dimensionless(t_final) }),
        "sweep": {"parameter": "dephasing", "grid": log_grid(-2.0, 3.0, 4), "t_final": 50.0},
    })
}

fn fmo() -> Value {
    json!({
        "network": {"builtin": "fmo"},
        "integrator": integrator(IntegratorConfig::spectroscopic(5.0)),
        "observables": {"hybrid_pair": [1, 2]},
        "sweep": {"parameter": "dephasing", "grid": log_grid(-1.0, 3.0, 4)},
        "pathways": {},
    })
}

fn fmo_optimized() -> Value {
    let mut v = fmo();
    v["dephasing"] = json!({"mode": "local", "rates": LOCAL_OPTIMUM});
    v["optimize"] = json!({
        "free_parameters": {"kind": "local_rates", "sites": [1, 2, 3, 4, 5, 6, 7]},
        "robustness": {},
    });
    v
}

fn fmo_sites12() -> Value {
    let mut v = fmo();
    v["dephasing"] = json!({"mode": "local", "rates": SITES12_OPTIMUM});
    v["optimize"] = json!({"free_parameters": {"kind": "local_rates", "sites": [1, 2]}});
    v
}

fn fmo_correlated() -> Value {
    let mut v = fmo();
    v["dephasing"] = json!({"mode": "correlated", "matrix": CORRELATED_OPTIMUM});
    v["optimize"] = json!({
        "free_parameters": {"kind": "correlated_matrix"},
        "warm_start": LOCAL_OPTIMUM,
    });
    v
}

fn fmo_modes() -> Value {
    json!({
        "network": {"builtin": "fmo"},
        "modes": {"omega_h": 180.0, "s_h": 0.22, "damping": 1.0, "sites": [1, 2, 3, 4, 5, 6, 7]},
        "integrator": integrator(IntegratorConfig { dt: 0.002, record_stride: 10, ..IntegratorConfig::spectroscopic(5.5) }),
        "sweep": {"parameter": "mode_damping", "grid": [1.0, 10.0, 100.0]},
    })
}

pub fn preset(name: &str) -> Option<Value> {
    Some(match name {
        "fcn7" => fcn7(false),
        "fcn7_disorder" => fcn7(true),
        "fmo" => fmo(),
        "fmo_optimized" => fmo_optimized(),
        "fmo_sites12" => fmo_sites12(),
        "fmo_correlated" => fmo_correlated(),
        "fmo_modes" => fmo_modes(),
        _ => return None,
    })
}
