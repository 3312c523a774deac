use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dat(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dat"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("dat runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fcn7_run_reports_one_sixth() {
    let dir = TempDir::new().unwrap();
    let o = dat(&["run", "--preset", "fcn7"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("p_sink(t=300) = 0.166667"), "{}", stdout(&o));
    let doc = json(dir.path().join("trajectory.json"));
    assert!((doc["summary"]["p_sink"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-3);
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,p0,p1,"));
}

#[test]
fn fmo_run_reaches_calibrated_yield() {
    let dir = TempDir::new().unwrap();
    let o = dat(&["run", "--preset", "fmo"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("p_sink(t=5) = 0.570000"), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.lines().next().unwrap().ends_with("p_plus,p_minus"));
}

#[test]
fn optimum_presets_reproduce_their_objectives() {
    let dir = TempDir::new().unwrap();
    for (preset, expected) in [("fmo_optimized", 0.914285), ("fmo_correlated", 0.918854), ("fmo_sites12", 0.776098)] {
        let o = dat(&["run", "--preset", preset], dir.path());
        assert_eq!(o.status.code(), Some(0), "{preset}");
        let doc = json(dir.path().join("trajectory.json"));
        let p = doc["summary"]["p_sink"].as_f64().unwrap();
        assert!((p - expected).abs() < 1e-6, "{preset}: {p}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for args in [["run", "--preset", "fcn7_disorder"], ["sweep", "--preset", "fcn7"]] {
        assert_eq!(dat(&args, a.path()).status.code(), Some(0));
        assert_eq!(dat(&args, b.path()).status.code(), Some(0));
    }
    for name in ["trajectory.csv", "trajectory.json", "sweep.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn invariant_reports() {
    let dir = TempDir::new().unwrap();
    let o = dat(&["invariant", "--preset", "fcn7"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let doc = json(dir.path().join("invariant.json"));
    assert_eq!(doc["dimension"], 5);
    assert!((doc["asymptotic_sink"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-10);

    let o = dat(&["invariant", "--preset", "fcn7_disorder"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let doc = json(dir.path().join("invariant.json"));
    assert_eq!(doc["dimension"], 0);
    assert!((doc["asymptotic_sink"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn invariant_accepts_amplitudes() {
    let dir = TempDir::new().unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let config = format!(r#"{{"network": {{"fcn": {{"n": 3}}}}, "initial": [[{s}, 0], [{}, 0], [0, 0]]}}"#, -s);
    let path = write_config(&dir, "c.json", &config);
    assert_eq!(dat(&["invariant", &path], dir.path()).status.code(), Some(0));
    let doc = json(dir.path().join("invariant.json"));
    assert!(doc["asymptotic_sink"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn sweep_has_interior_maximum() {
    let dir = TempDir::new().unwrap();
    assert_eq!(dat(&["sweep", "--preset", "fcn7"], dir.path()).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (x, p) = l.split_once(',').unwrap();
            (x.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 21);
    let best = rows.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).unwrap().0;
    assert!(best > 0 && best < rows.len() - 1);
}

#[test]
fn single_point_sweep_has_one_row() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "c.json", r#"{"sweep": {"grid": [1.0]}}"#);
    let o = dat(&["sweep", &path, "--preset", "fcn7"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn pathways_report() {
    let dir = TempDir::new().unwrap();
    let o = dat(&["pathways", "--preset", "fmo"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let doc = json(dir.path().join("pathways.json"));
    assert!(doc["ratios"]["path2_over_path1"].as_f64().unwrap() < 0.1);
    assert!(doc["surgeries"].as_array().unwrap().iter().all(|s| s["hermitian"] == true));
}

#[test]
fn small_optimization_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let config = r#"{
        "network": {"fcn": {"n": 4, "energies": [0.0, 0.3, -0.2, 0.1]}},
        "optimize": {"free_parameters": {"kind": "local_rates", "sites": [1, 2, 3, 4]},
                     "target_time": 5.0, "restarts": 2, "max_evaluations": 20, "dt": 0.01,
                     "robustness": {}},
        "seed": 3
    }"#;
    let path = write_config(&dir, "c.json", config);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = dat(&["optimize", &path, "--threads", "2"], &a);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(dat(&["optimize", &path], &b).status.code(), Some(0));
    let (ja, jb) = (fs::read(a.join("optimization.json")).unwrap(), fs::read(b.join("optimization.json")).unwrap());
    assert_eq!(ja, jb);
    let doc: Value = serde_json::from_slice(&ja).unwrap();
    for key in ["parameters", "objective", "restarts", "seed", "budget", "robustness"] {
        assert!(doc.get(key).is_some(), "{key}");
    }
    assert_eq!(doc["seed"], 3);
}

#[test]
fn modes_subset_runs_reduced_space() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "c.json", r#"{"integrator": {"t_final": 0.2}}"#);
    let o = dat(&["run", &path, "--preset", "fmo_modes", "--modes-subset", "1,2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(dir.path().join("trajectory.json"));
    assert!(doc["summary"]["p_sink"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let cases = [
        r#"{"network": {"builtin": "fmo"}, "unknown": 1}"#,
        r#"{"network": {"builtin": "nowhere"}}"#,
        r#"{"network": {"fcn": {"n": 3}}, "sink": {"site": 7, "rate": 1.0}}"#,
        r#"{"network": {"fcn": {"n": 3}}, "initial": 5}"#,
        r#"{"network": {"fcn": {"n": 3}, "builtin": "fmo"}}"#,
        "not json",
    ];
    for (k, text) in cases.iter().enumerate() {
        let path = write_config(&dir, &format!("c{k}.json"), text);
        assert_eq!(dat(&["run", &path], dir.path()).status.code(), Some(2), "{text}");
    }
    assert_eq!(dat(&["run", "/nonexistent.json"], dir.path()).status.code(), Some(2));
    assert_eq!(dat(&["run", "--preset", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(dat(&["run", "--preset", "fmo", "--modes-subset", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(dat(&["optimize", "--preset", "fmo"], dir.path()).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let text = r#"{"network": {"fcn": {"n": 3}},
                   "integrator": {"dt": 0.5, "t_final": 10, "max_refinements": 0}}"#;
    let path = write_config(&dir, "c.json", text);
    let o = dat(&["run", &path], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
