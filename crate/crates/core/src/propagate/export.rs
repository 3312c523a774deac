use serde_json::{Map, Value};

use crate::propagate::Trajectory;

fn columns(traj: &Trajectory) -> Vec<String> {
    let n = traj.site_populations.first().map_or(0, Vec::len);
    let (a, b) = traj.coherence_pair;
    let mut cols = vec!["t".to_string(), "p0".to_string()];
    cols.extend((1..=n).map(|j| format!("p{j}")));
    cols.push("p_sink".into());
    cols.push("p_sink_integral".into());
    cols.push(format!("re_c{a}{b}"));
    cols.push(format!("im_c{a}{b}"));
    if traj.hybrid_pair.is_some() && traj.hybrid_populations.is_some() {
        cols.push("p_plus".into());
        cols.push("p_minus".into());
    }
    cols
}

fn row(traj: &Trajectory, k: usize) -> Vec<f64> {
    let mut r = vec![traj.times[k], traj.ground_population[k]];
    r.extend_from_slice(&traj.site_populations[k]);
    r.push(traj.sink_population[k]);
    r.push(traj.sink_population_integral[k]);
    r.push(traj.coherences[k].re);
    r.push(traj.coherences[k].im);
    if let (Some((i, j)), Some(h)) = (traj.hybrid_pair, &traj.hybrid_populations) {
        r.push(h[k][i - 1]);
        r.push(h[k][j - 1]);
    }
    r
}

/// One row per sample, 12 significant digits.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = columns(traj).join(",");
    out.push('\n');
    for k in 0..traj.len() {
        let cells: Vec<String> = row(traj, k).iter().map(|x| format!("{x:.11e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Column-oriented JSON with the same columns as [`trajectory_csv`] plus
/// run diagnostics.
pub fn trajectory_json(traj: &Trajectory) -> Value {
    let cols = columns(traj);
    let rows: Vec<Vec<f64>> = (0..traj.len()).map(|k| row(traj, k)).collect();
    let mut series = Map::new();
    for (c, name) in cols.iter().enumerate() {
        series.insert(
            name.clone(),
            Value::from(rows.iter().map(|r| r[c]).collect::<Vec<f64>>()),
        );
    }
    let mut obj = Map::new();
    obj.insert("columns".into(), Value::from(cols));
    obj.insert("series".into(), Value::Object(series));
    obj.insert(
        "mode_excitation_max".into(),
        Value::from(traj.mode_excitation_max.clone()),
    );
    obj.insert(
        "diagnostics".into(),
        serde_json::to_value(&traj.diagnostics).unwrap_or(Value::Null),
    );
    Value::Object(obj)
}
