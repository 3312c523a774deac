use crate::error::{Error, Result};
use crate::propagate::Trajectory;

/// Linear interpolation of `series` at `t` on the sample times.
pub fn sample_at(times: &[f64], series: &[f64], t: f64) -> Result<f64> {
    let (first, last) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Validation("empty trajectory".into())),
    };
    let slack = 1e-9 * last.abs().max(1.0);
    if t < first - slack || t > last + slack {
        return Err(Error::WindowOutOfRange {
            start: t,
            end: t,
            min: first,
            max: last,
        });
    }
    let i = times.partition_point(|&x| x < t);
    if i == 0 {
        return Ok(series[0]);
    }
    if i >= times.len() {
        return Ok(series[times.len() - 1]);
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let w = (t - t0) / (t1 - t0);
    Ok(series[i - 1] * (1.0 - w) + series[i] * w)
}

fn check_window(traj: &Trajectory, window: (f64, f64)) -> Result<()> {
    let (min, max) = (traj.times.first().copied(), traj.final_time());
    let min = min.ok_or_else(|| Error::Validation("empty trajectory".into()))?;
    let slack = 1e-9 * max.abs().max(1.0);
    if !(window.0 < window.1) || window.0 < min - slack || window.1 > max + slack {
        return Err(Error::WindowOutOfRange {
            start: window.0,
            end: window.1,
            min,
            max,
        });
    }
    Ok(())
}

/// Average rate of change of p_sink over `window`:
/// (p_sink(t_b) − p_sink(t_a)) / (t_b − t_a).
pub fn transfer_rate(traj: &Trajectory, window: (f64, f64)) -> Result<f64> {
    check_window(traj, window)?;
    let a = sample_at(&traj.times, &traj.sink_population, window.0)?;
    let b = sample_at(&traj.times, &traj.sink_population, window.1)?;
    Ok((b - a) / (window.1 - window.0))
}

/// First-order decay rate of the population not yet trapped:
/// [ln(1 − p(t_a)) − ln(1 − p(t_b))] / (t_b − t_a).
pub fn trapping_decay_rate(traj: &Trajectory, window: (f64, f64)) -> Result<f64> {
    check_window(traj, window)?;
    let a = sample_at(&traj.times, &traj.sink_population, window.0)?;
    let b = sample_at(&traj.times, &traj.sink_population, window.1)?;
    if !(a < 1.0 && b < 1.0) {
        return Err(Error::Validation(
            "sink population reached 1; the decay rate is undefined".into(),
        ));
    }
    Ok(((1.0 - a).ln() - (1.0 - b).ln()) / (window.1 - window.0))
}

/// Pearson correlation coefficient; 0 when either series is constant.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// `series` minus its centred moving average over `window` samples.
pub fn detrend(series: &[f64], window: usize) -> Vec<f64> {
    let n = series.len();
    let half = window / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            let mean = series[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
            series[i] - mean
        })
        .collect()
}

/// Number of sign changes, ignoring exact zeros.
pub fn sign_changes(series: &[f64]) -> usize {
    let signs: Vec<bool> = series.iter().filter(|x| **x != 0.0).map(|x| *x > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_linear() {
        let t = [0.0, 1.0, 2.0];
        let y = [0.0, 2.0, 3.0];
        assert_eq!(sample_at(&t, &y, 0.5).unwrap(), 1.0);
        assert_eq!(sample_at(&t, &y, 2.0).unwrap(), 3.0);
        assert!(sample_at(&t, &y, 2.5).is_err());
    }

    #[test]
    fn correlation_signs() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        let z = [4.0, 3.0, 2.0, 1.0];
        assert!((correlation(&x, &y) - 1.0).abs() < 1e-12);
        assert!((correlation(&x, &z) + 1.0).abs() < 1e-12);
        assert_eq!(correlation(&x, &[1.0; 4]), 0.0);
    }

    #[test]
    fn sign_changes_of_a_sine() {
        let s: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.01 * std::f64::consts::PI).sin()).collect();
        // sin over [0, 10π): zeros at multiples of π
        assert_eq!(sign_changes(&s[1..]), 9);
        let d = detrend(&s.iter().enumerate().map(|(i, x)| x + i as f64 * 1e-3).collect::<Vec<_>>(), 201);
        assert!(sign_changes(&d[100..900]) >= 7);
    }

    /// A recorded two-site run whose sink series is replaced by `f(t)`.
    fn with_sink(f: impl Fn(f64) -> f64) -> Trajectory {
        use crate::model::{build_fcn, FmoSystem};
        use crate::propagate::IntegratorConfig;
        let sys = FmoSystem::fcn(build_fcn(2, 1.0, &[0.0, 0.0]).unwrap(), 1.0).unwrap();
        let mut traj = sys.run(&sys.noise(None), &IntegratorConfig::dimensionless(4.0)).unwrap();
        traj.sink_population = traj.times.iter().map(|&t| f(t)).collect();
        traj
    }

    #[test]
    fn transfer_rate_of_constant_and_linear_curves() {
        assert_eq!(transfer_rate(&with_sink(|_| 0.3), (1.0, 3.0)).unwrap(), 0.0);
        let r = transfer_rate(&with_sink(|t| 0.05 * t), (1.0, 3.0)).unwrap();
        assert!((r - 0.05).abs() < 1e-12);
        assert!(transfer_rate(&with_sink(|t| t), (3.0, 5.0)).is_err());
        assert!(transfer_rate(&with_sink(|t| t), (2.0, 1.0)).is_err());
    }

    #[test]
    fn trapping_rate_of_exponential_filling() {
        let traj = with_sink(|t| 1.0 - (-0.7 * t).exp());
        let k = trapping_decay_rate(&traj, (0.5, 3.5)).unwrap();
        assert!((k - 0.7).abs() < 1e-9);
        assert!(trapping_decay_rate(&with_sink(|_| 1.0), (1.0, 2.0)).is_err());
    }

    #[test]
    fn detrend_removes_constants_and_lines() {
        assert!(detrend(&[2.5; 20], 5).iter().all(|x| x.abs() < 1e-15));
        let line: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        assert!(detrend(&line, 7)[3..47].iter().all(|x| x.abs() < 1e-12));
        assert_eq!(sign_changes(&[1.0, 0.0, 2.0, -1.0, 0.0, -3.0, 4.0]), 2);
    }
}
