//! Optimizer bookkeeping on small budgets.

use dat_core::model::build_fcn;
use dat_core::optimize::{
    optimize_correlated, optimize_local, robustness_scan, FreeParameters, OptimizationProblem,
};
use dat_core::{FmoSystem, IntegratorConfig};
use nalgebra::DMatrix;

fn small_problem() -> OptimizationProblem {
    let sys = FmoSystem::fcn(build_fcn(4, 1.0, &[0.0, 0.3, -0.2, 0.1]).unwrap(), 1.0).unwrap();
    OptimizationProblem {
        target_time: 5.0,
        dt: 0.01,
        restarts: 3,
        max_evaluations: 40,
        seed: 11,
        ..OptimizationProblem::local(sys, vec![1, 2, 3, 4])
    }
}

#[test]
fn local_search_is_deterministic_and_consistent() {
    let p = small_problem();
    let a = optimize_local(&p).unwrap();
    let b = optimize_local(&p).unwrap();
    assert_eq!(a.to_json(), b.to_json());

    let best_trace = a
        .restarts
        .iter()
        .flat_map(|r| r.trace.iter().map(|t| t.objective))
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(a.best_objective, best_trace);
    for r in &a.restarts {
        assert!(r.trace.windows(2).all(|w| w[1].best_so_far >= w[0].best_so_far));
        assert!(r.evaluations <= p.max_evaluations);
    }
    assert_eq!(a.evaluations, a.restarts.iter().map(|r| r.evaluations).sum::<usize>());
    let winner = a.restarts.iter().position(|r| r.best_objective == a.best_objective).unwrap();
    assert_eq!(winner, a.best_restart);
    for x in &a.best_parameters {
        assert!((p.bounds.0..=p.bounds.1).contains(x));
    }

    let noiseless = p.objective_for(None).unwrap();
    assert!(a.best_objective >= noiseless);
    assert_eq!(p.objective(&a.best_parameters).unwrap(), a.best_objective);

    let json: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    for key in ["parameters", "objective", "restarts", "seed", "budget"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn robustness_at_unit_factor_is_the_optimum() {
    let p = small_problem();
    let r = optimize_local(&p).unwrap();
    let table = robustness_scan(&p, &r, &[1.0, 0.5, 2.0], &[0.95, 1.05]).unwrap();
    for row in table.rows.iter().filter(|row| row.factor == 1.0) {
        assert_eq!(row.objective, r.best_objective, "{}", row.perturbation);
    }
    assert_eq!(table.rows.iter().filter(|row| row.perturbation == "energies").count(), 2);
    assert_eq!(table.rows.len(), 3 + 4 * 3 + 2);
}

#[test]
fn diagonal_correlated_search_contains_local_optimum() {
    let p = small_problem();
    let local = optimize_local(&p).unwrap();
    let q = OptimizationProblem {
        free_parameters: FreeParameters::CorrelatedMatrix {
            off_diagonal_bound: 3.0,
            diagonal_only: true,
        },
        warm_start: Some(local.rates.clone()),
        ..p.clone()
    };
    let diag = optimize_correlated(&q).unwrap();
    assert!(diag.best_objective >= local.best_objective - 1e-3);
    let g = diag.gamma();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert_eq!(g[(i, j)], 0.0);
            }
        }
    }
}

#[test]
fn correlated_search_stays_positive_semidefinite() {
    let p = small_problem();
    let q = OptimizationProblem {
        max_evaluations: 30,
        ..OptimizationProblem::correlated(p.system.clone())
    };
    let q = OptimizationProblem { dt: 0.01, restarts: 2, ..q };
    let r = optimize_correlated(&q).unwrap();
    let g = r.gamma();
    assert!(dat_core::linalg::symmetric_eigenvalues(&g)[0] >= -1e-10);
    assert_eq!(r.best_parameters.len(), 4 + 6);
}

#[test]
fn zero_factor_gives_the_noiseless_fmo_yield() {
    let p = OptimizationProblem::correlated(FmoSystem::bundled().unwrap());
    let zero = p.objective_for_factor(&DMatrix::zeros(7, 7)).unwrap();
    let noiseless = FmoSystem::bundled().unwrap().sink_yield(None, &IntegratorConfig::spectroscopic(5.0)).unwrap();
    assert_eq!(zero, noiseless);
    assert!((zero - 0.57).abs() < 0.01);
}

#[test]
fn mismatched_problems_are_rejected() {
    let p = small_problem();
    assert!(optimize_correlated(&p).is_err());
    let q = OptimizationProblem::correlated(p.system.clone());
    assert!(optimize_local(&q).is_err());
    let bad = OptimizationProblem { restarts: 0, ..p.clone() };
    assert!(optimize_local(&bad).is_err());
    let bad = OptimizationProblem { target_time: 5.005, ..p };
    assert!(optimize_local(&bad).is_err());
}
