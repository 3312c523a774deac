//! Bounded Nelder–Mead simplex search (maximization).

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Initial simplex edge, in parameter units.
    pub initial_step: f64,
    /// Convergence when the spread of simplex objectives is below this...
    pub f_tolerance: f64,
    /// ...and every vertex is within this distance of the best one.
    pub x_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evaluations: 400,
            initial_step: 0.5,
            f_tolerance: 1e-9,
            x_tolerance: 1e-6,
        }
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub evaluation: usize,
    pub objective: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
}

struct Counter<'a, F> {
    f: F,
    bounds: &'a [(f64, f64)],
    evaluations: usize,
    max: usize,
    best_x: Vec<f64>,
    best_f: f64,
    trace: Vec<TracePoint>,
}

impl<F: FnMut(&[f64]) -> f64> Counter<'_, F> {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.max
    }

    /// Cost (−objective) at the projection of `x` into the bounds.
    fn cost(&mut self, x: &mut [f64]) -> f64 {
        for (v, &(lo, hi)) in x.iter_mut().zip(self.bounds) {
            *v = v.clamp(lo, hi);
        }
        let raw = (self.f)(x);
        let f = if raw.is_nan() { f64::NEG_INFINITY } else { raw };
        self.evaluations += 1;
        if f > self.best_f || self.best_x.is_empty() {
            self.best_f = f;
            self.best_x = x.to_vec();
        }
        self.trace.push(TracePoint {
            evaluation: self.evaluations,
            objective: f,
            best_so_far: self.best_f,
        });
        -f
    }
}

/// Maximizes `f` inside the box `bounds`, starting from `x0`.
///
/// Trial points outside the box are projected onto it before evaluation.
/// Uses the dimension-adapted coefficients of Gao and Han. When the simplex
/// collapses before the budget is spent, a fresh simplex is built around the
/// best point; the search stops once a fresh simplex brings no improvement.
/// NaN objectives count as −∞.
pub fn maximize<F>(f: F, x0: &[f64], bounds: &[(f64, f64)], options: &NelderMeadOptions) -> SearchOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(bounds.len(), n, "one bound per parameter");
    let mut c = Counter {
        f,
        bounds,
        evaluations: 0,
        max: options.max_evaluations.max(1),
        best_x: Vec::new(),
        best_f: f64::NEG_INFINITY,
        trace: Vec::new(),
    };
    if n == 0 {
        let mut x = Vec::new();
        c.cost(&mut x);
        return finish(c);
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n > 1 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut centre = x0.to_vec();
    loop {
        let before = c.best_f;
        // initial simplex around `centre`
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let mut x = centre.clone();
        let fx = c.cost(&mut x);
        simplex.push((x, fx));
        for i in 0..n {
            if c.exhausted() {
                break;
            }
            let mut x = simplex[0].0.clone();
            let (lo, hi) = bounds[i];
            x[i] = if x[i] + options.initial_step <= hi {
                x[i] + options.initial_step
            } else if x[i] - options.initial_step >= lo {
                x[i] - options.initial_step
            } else {
                0.5 * (lo + hi)
            };
            let fx = c.cost(&mut x);
            simplex.push((x, fx));
        }
        if simplex.len() < n + 1 {
            break;
        }

        while !c.exhausted() {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..]
                .iter()
                .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            let flat = spread.is_nan() || spread < options.f_tolerance;
            if flat && size < options.x_tolerance {
                break;
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c0, v) in centroid.iter_mut().zip(x) {
                    *c0 += v / nf;
                }
            }
            let worst = simplex[n].0.clone();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst)
                    .map(|(cv, w)| cv + t * (cv - w))
                    .collect()
            };
            let mut xr = along(alpha);
            let fr = c.cost(&mut xr);
            if fr < simplex[0].1 {
                if c.exhausted() {
                    simplex[n] = (xr, fr);
                    break;
                }
                let mut xe = along(alpha * beta);
                let fe = c.cost(&mut xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                if c.exhausted() {
                    break;
                }
                let (mut xc, outside) = if fr < simplex[n].1 {
                    (along(alpha * gamma), true)
                } else {
                    (along(-gamma), false)
                };
                let fc = c.cost(&mut xc);
                let accept = if outside { fc <= fr } else { fc < simplex[n].1 };
                if accept {
                    simplex[n] = (xc, fc);
                } else {
                    // shrink towards the best vertex
                    let best = simplex[0].0.clone();
                    for v in simplex.iter_mut().skip(1) {
                        if c.exhausted() {
                            break;
                        }
                        let mut x: Vec<f64> =
                            best.iter().zip(&v.0).map(|(b, w)| b + delta * (w - b)).collect();
                        let fx = c.cost(&mut x);
                        *v = (x, fx);
                    }
                }
            }
        }
        if c.exhausted() || !(c.best_f > before) {
            break;
        }
        centre = c.best_x.clone();
    }
    finish(c)
}

fn finish<F>(c: Counter<'_, F>) -> SearchOutcome {
    SearchOutcome {
        best_x: c.best_x,
        best_f: c.best_f,
        evaluations: c.evaluations,
        trace: c.trace,
    }
}
