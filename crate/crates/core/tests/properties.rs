//! Randomized invariants of the generators, the integrator and the
//! dark-state analysis.

mod common;

use common::{hermitian, max_abs, network, psd};
use dat_core::analysis::{asymptotic_sink, invariant_subspace};
use dat_core::linalg::{hermitian_deviation, hermitian_eigenvalues, trace, CMatrix, C64};
use dat_core::model::{hybrid_transform, transform_matrix, BasisTransform};
use dat_core::noise::{apply_correlated_dephasing, apply_local_dephasing};
use dat_core::optimize::correlated_factor;
use dat_core::propagate::reduced_electronic_state;
use dat_core::{
    evolve, DensityMatrix, DephasingSpec, GeneratorSet, IntegratorConfig, LocalModeSpec, NoiseSpec,
    SinkSpec, SpaceLayout,
};
use proptest::prelude::*;

fn sized(max: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2..=max).prop_flat_map(|n| (Just(n), prop::collection::vec(-1.0..1.0f64, 4 * (n + 2) * (n + 2))))
}

fn full_noise(n: usize, v: &[f64]) -> NoiseSpec {
    NoiseSpec {
        dephasing: Some(DephasingSpec::correlated(&psd(n, v)).unwrap()),
        radiative: v[..n].iter().map(|x| 0.1 * x.abs()).collect(),
        sink: Some(SinkSpec {
            site: n,
            rate: 0.5 + v[0].abs(),
        }),
        modes: None,
    }
}

fn upper(n: usize, v: &[f64]) -> Vec<f64> {
    v[..n * (n - 1) / 2].to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dissipators_are_traceless_and_hermitian((n, v) in sized(5)) {
        let h = network(&v[..n], &upper(n, &v[n..]));
        let g = GeneratorSet::build(&h, &full_noise(n, &v)).unwrap();
        let rho = hermitian(n + 2, &v);
        for d in g.dissipators() {
            let out = d.apply(&rho, g.layout());
            prop_assert!(trace(&out).norm() < 1e-12);
            prop_assert!(hermitian_deviation(&out) < 1e-12);
        }
        let total = g.apply(&rho).unwrap();
        prop_assert!(trace(&total).norm() < 1e-12);
        prop_assert!(hermitian_deviation(&total) < 1e-12);
    }

    #[test]
    fn diagonal_correlated_equals_local((n, v) in sized(5)) {
        let rates: Vec<f64> = v[..n].iter().map(|x| x.abs() * 3.0).collect();
        let rho = DensityMatrix::unchecked(SpaceLayout::electronic(n), hermitian(n + 2, &v)).unwrap();
        let local = apply_local_dephasing(&rho, &DephasingSpec::local(rates.clone()).unwrap()).unwrap();
        let gamma = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(rates));
        let corr = apply_correlated_dephasing(&rho, &gamma).unwrap();
        prop_assert!(max_abs(&(local - corr)) < 1e-13);
    }

    #[test]
    fn ground_state_is_stationary((n, v) in sized(5)) {
        let h = network(&v[..n], &upper(n, &v[n..]));
        let g = GeneratorSet::build(&h, &full_noise(n, &v)).unwrap();
        let ground = DensityMatrix::ground(g.layout().clone());
        prop_assert_eq!(max_abs(&g.apply(ground.matrix()).unwrap()), 0.0);
    }

    #[test]
    fn correlated_factor_is_always_admissible(x in prop::collection::vec(-3.0..3.0f64, 28)) {
        let l = correlated_factor(&x, 7).unwrap();
        let gamma = &l * l.transpose();
        prop_assert!(DephasingSpec::correlated(&gamma).is_ok());
        for i in 0..7 {
            prop_assert!((gamma[(i, i)] / 10f64.powf(x[i]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hybrid_transform_is_a_spectrum_preserving_involution((n, v) in sized(6), a in 1usize..=6, b in 1usize..=6) {
        prop_assume!(a != b && a <= n && b <= n);
        let h = hermitian(n, &v);
        let u = hybrid_transform(n, (a, b)).unwrap();
        let once = transform_matrix(&h, &u).unwrap();
        let twice = transform_matrix(&once, &u).unwrap();
        prop_assert!(max_abs(&(twice - &h)) < 1e-12);
        prop_assert!(hermitian_deviation(&once) < 1e-12);
        let (e0, e1) = (hermitian_eigenvalues(&h), hermitian_eigenvalues(&once));
        for (x, y) in e0.iter().zip(&e1) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn invariant_subspace_postconditions((n, v) in sized(7), k in 1usize..=7) {
        prop_assume!(k <= n);
        let h = hermitian(n, &v);
        let sub = invariant_subspace(&h, k).unwrap();
        prop_assert_eq!(sub.dimension() + sub.closure_dimension(), n);
        prop_assert!(sub.cross_gram() < 1e-10);
        prop_assert!(sub.sink_overlap() < 1e-10);
        prop_assert!(sub.invariance_residual(&h) < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn evolution_keeps_density_invariants((n, v) in sized(4)) {
        let h = network(&v[..n], &upper(n, &v[n..]));
        let g = GeneratorSet::build(&h, &full_noise(n, &v)).unwrap();
        let rho0 = DensityMatrix::pure_site(g.layout().clone(), 1).unwrap();
        let config = IntegratorConfig::dimensionless(10.0);
        let traj = evolve(&rho0, &g, &config).unwrap();
        prop_assert!(traj.diagnostics.max_trace_error < 1e-8);
        prop_assert!(traj.diagnostics.max_hermitian_deviation < 1e-9);
        prop_assert!(traj.final_state.min_eigenvalue() >= -1e-7);
        prop_assert!(traj.diagnostics.max_sink_discrepancy < 10.0 * config.tolerance);
        prop_assert!(traj.sink_population.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn sink_population_is_basis_covariant((n, v) in sized(4), a in 1usize..=4, b in 1usize..=4) {
        prop_assume!(a != b && a <= n && b <= n);
        let h = network(&v[..n], &upper(n, &v[n..]));
        let g = GeneratorSet::build(&h, &full_noise(n, &v)).unwrap();
        let u = hybrid_transform(n, (a, b)).unwrap();
        let rho0 = DensityMatrix::pure_site(g.layout().clone(), 1).unwrap();
        let config = IntegratorConfig { guard: false, ..IntegratorConfig::dimensionless(5.0) };
        let site = evolve(&rho0, &g, &config).unwrap();
        let hybrid = evolve(&rho0.transformed(&u).unwrap(), &g.transformed(&u).unwrap(), &config).unwrap();
        for (x, y) in site.sink_population.iter().zip(&hybrid.sink_population) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn uncoupled_modes_leave_electronic_dynamics_unchanged((n, v) in sized(3), mask in 1usize..8) {
        let sites: Vec<usize> = (1..=n).filter(|s| mask & (1 << (s - 1)) != 0).collect();
        prop_assume!(!sites.is_empty());
        let h = network(&v[..n], &upper(n, &v[n..]));
        let noise = full_noise(n, &v);
        let mut modes = LocalModeSpec::new(sites, 0.3);
        modes.s_h = 0.0;
        modes.omega_h = 2.0;
        let plain = GeneratorSet::build(&h, &noise).unwrap();
        let extended = GeneratorSet::build(&h, &NoiseSpec { modes: Some(modes), ..noise }).unwrap();
        let config = IntegratorConfig::dimensionless(5.0);
        let a = evolve(&DensityMatrix::pure_site(plain.layout().clone(), 1).unwrap(), &plain, &config).unwrap();
        let b = evolve(&DensityMatrix::pure_site(extended.layout().clone(), 1).unwrap(), &extended, &config).unwrap();
        let reduced = reduced_electronic_state(&b.final_state).unwrap();
        prop_assert!(max_abs(&(reduced.matrix() - a.final_state.matrix())) < config.tolerance);
        for (p, q) in a.site_populations.iter().zip(&b.site_populations) {
            for (x, y) in p.iter().zip(q) {
                prop_assert!((x - y).abs() < config.tolerance);
            }
        }
    }

    #[test]
    fn asymptotic_sink_is_invariant_under_unitaries_fixing_the_sink((n, v) in sized(5)) {
        let h = hermitian(n, &v);
        let m = n - 1;
        let q = CMatrix::from_fn(m, m, |i, j| C64::new(v[i * m + j], v[(i * m + j + 7) % v.len()])).qr().q();
        let mut u = CMatrix::identity(n, n);
        u.view_mut((0, 0), (m, m)).copy_from(&q);
        let u = BasisTransform::new(u, "random unitary on sites 1..N-1").unwrap();
        let psi: Vec<C64> = (0..n).map(|i| C64::new(v[i + 3], v[i + 5])).collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        let upsi: Vec<C64> = (0..n).map(|i| (0..n).map(|j| u.unitary()[(i, j)] * psi[j]).sum()).collect();
        let a = asymptotic_sink(&psi, &h, n).unwrap();
        let b = asymptotic_sink(&upsi, &transform_matrix(&h, &u).unwrap(), n).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }
}
