use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, CMatrix, C64};
use crate::model::BasisTransform;
use crate::noise::{GeneratorSet, Liouvillian};
use crate::propagate::density::EIGENVALUE_FLOOR;
use crate::propagate::{DensityMatrix, RunDiagnostics, Trajectory};

/// Largest |λ|·h allowed for the coarse (2h) step of the guard. RK4 is
/// stable up to about 2.78 on the negative real axis and 2.83 on the
/// imaginary axis.
const STABILITY_MARGIN: f64 = 2.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Record every `record_stride` steps of `dt`.
    pub record_stride: usize,
    /// Allowed change of p_sink(t_final) under step halving.
    pub tolerance: f64,
    /// Positivity check every this many steps of `dt` (0: final state only).
    pub positivity_check_stride: usize,
    /// Run the step-halving acceptance check.
    pub guard: bool,
    /// How many times the internal step may be halved after a positivity
    /// or guard failure before the run fails.
    pub max_refinements: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 0.01,
            t_final: 50.0,
            record_stride: 10,
            tolerance: 1e-6,
            positivity_check_stride: 1000,
            guard: true,
            max_refinements: 3,
        }
    }
}

impl IntegratorConfig {
    /// Defaults for J = 1 dimensionless networks.
    pub fn dimensionless(t_final: f64) -> Self {
        IntegratorConfig {
            t_final,
            ..Default::default()
        }
    }

    /// Defaults for spectroscopic runs: 1 fs steps, samples every 10 fs.
    pub fn spectroscopic(t_final_ps: f64) -> Self {
        IntegratorConfig {
            dt: 1e-3,
            t_final: t_final_ps,
            record_stride: 10,
            tolerance: 1e-6,
            positivity_check_stride: 1000,
            guard: true,
            max_refinements: 3,
        }
    }

    pub fn validate(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation("dt must be positive".into()));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Validation("t_final must be positive".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::Validation("record_stride must be at least 1".into()));
        }
        let steps = (self.t_final / self.dt).round();
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(1.0) || steps < 1.0 {
            return Err(Error::Validation(format!(
                "t_final = {} is not a whole number of steps dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// What to record besides populations, sink and ground.
#[derive(Debug, Clone, Default)]
pub struct Observables {
    /// Site pair (1-based) whose reduced coherence is recorded; defaults to (1, 2).
    pub coherence: Option<(usize, usize)>,
    /// Basis in which populations are also recorded.
    pub transform: Option<BasisTransform>,
}

/// −i[H, ρ] plus every dissipator, for any square input.
pub fn rhs(rho: &DensityMatrix, generators: &GeneratorSet) -> Result<CMatrix> {
    if rho.layout() != generators.layout() {
        return Err(Error::dims(generators.dim(), rho.dim()));
    }
    let l = Liouvillian::new(generators);
    let mut out = CMatrix::zeros(rho.dim(), rho.dim());
    l.rhs(rho.matrix(), &mut out);
    Ok(out)
}

pub fn evolve(
    rho0: &DensityMatrix,
    generators: &GeneratorSet,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    evolve_with(rho0, generators, config, &Observables::default())
}

/// Classical RK4 at fixed step with a step-halving acceptance guard.
///
/// The internal step h divides `config.dt` so that the guard's coarse step
/// 2h stays inside the RK4 stability region. The run is accepted when
/// p_sink(t_final) at h and at 2h differ by less than `config.tolerance`
/// and every positivity check passes. On failure h is halved, up to
/// `config.max_refinements` times.
pub fn evolve_with(
    rho0: &DensityMatrix,
    generators: &GeneratorSet,
    config: &IntegratorConfig,
    observables: &Observables,
) -> Result<Trajectory> {
    let n_steps = config.validate()?;
    if rho0.layout() != generators.layout() {
        return Err(Error::dims(generators.dim(), rho0.dim()));
    }
    rho0.check_invariants()?;
    let layout = generators.layout();
    let n = layout.n_sites();
    let pair = observables.coherence.unwrap_or((1, 2.min(n)));
    rho0.coherence(pair.0, pair.1)?;
    if let Some(u) = &observables.transform {
        if u.dim() != n {
            return Err(Error::dims(n, u.dim()));
        }
    }

    let liouvillian = Liouvillian::new(generators);
    let blocked = liouvillian.block_diagonal(rho0.matrix());
    let mut substeps = ((config.dt * liouvillian.rate_bound() * 2.0) / STABILITY_MARGIN)
        .ceil()
        .max(1.0) as usize;
    if config.guard && (n_steps * substeps) % 2 == 1 {
        substeps += 1;
    }
    let mut refinement = 0;
    loop {
        let attempt = integrate_once(
            rho0, generators, &liouvillian, blocked, observables, pair, config, n_steps, substeps,
        );
        match attempt {
            Ok(mut traj) => {
                traj.diagnostics.refinements = refinement;
                return Ok(traj);
            }
            Err(e) if e.is_numerical() && refinement < config.max_refinements => {
                log::warn!("{e}; halving the internal step to {}", config.dt / (2 * substeps) as f64);
                refinement += 1;
                substeps *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn integrate_once(
    rho0: &DensityMatrix,
    generators: &GeneratorSet,
    liouvillian: &Liouvillian,
    blocked: bool,
    observables: &Observables,
    pair: (usize, usize),
    config: &IntegratorConfig,
    n_steps: usize,
    substeps: usize,
) -> Result<Trajectory> {
    let h = config.dt / substeps as f64;
    let mut run = Run::new(rho0, generators, liouvillian, blocked, observables, pair);
    run.integrate(h, n_steps * substeps, Some((substeps, config)))?;
    let mut traj = run.finish();
    traj.diagnostics.step = h;
    traj.diagnostics.substeps = substeps;

    if config.guard {
        let mut coarse = Run::new(rho0, generators, liouvillian, blocked, observables, pair);
        coarse.integrate(2.0 * h, n_steps * substeps / 2, None)?;
        let change = guard_observable_change(&traj.final_state, &coarse.rho, generators);
        traj.diagnostics.guard_change = Some(change);
        if !(change < config.tolerance) {
            return Err(Error::StepTooLarge {
                change,
                tolerance: config.tolerance,
            });
        }
    }
    Ok(traj)
}

fn guard_observable_change(fine: &DensityMatrix, coarse: &DensityMatrix, g: &GeneratorSet) -> f64 {
    if g.sink().is_some() {
        (fine.sink_population() - coarse.sink_population()).abs()
    } else {
        fine.electronic_populations()
            .iter()
            .zip(coarse.electronic_populations())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

struct Run<'a> {
    rho: DensityMatrix,
    liouvillian: &'a Liouvillian,
    blocked: bool,
    observables: &'a Observables,
    pair: (usize, usize),
    sink: Option<(usize, f64)>,
    traj: Trajectory,
    time: f64,
    integral: f64,
    last_feed: f64,
}

impl<'a> Run<'a> {
    fn new(
        rho0: &DensityMatrix,
        generators: &GeneratorSet,
        liouvillian: &'a Liouvillian,
        blocked: bool,
        observables: &'a Observables,
        pair: (usize, usize),
    ) -> Self {
        let sink = generators.sink_site_rate();
        let traj = Trajectory {
            times: Vec::new(),
            site_populations: Vec::new(),
            ground_population: Vec::new(),
            sink_population: Vec::new(),
            sink_population_integral: Vec::new(),
            coherence_pair: pair,
            coherences: Vec::new(),
            hybrid_populations: observables.transform.as_ref().map(|_| Vec::new()),
            hybrid_pair: observables.transform.as_ref().and_then(|u| u.pair()),
            mode_excitation_max: rho0.mode_excitations(),
            diagnostics: RunDiagnostics::default(),
            final_state: rho0.clone(),
        };
        let mut run = Run {
            rho: rho0.clone(),
            liouvillian,
            blocked,
            observables,
            pair,
            sink,
            traj,
            time: 0.0,
            integral: 0.0,
            last_feed: 0.0,
        };
        run.last_feed = run.sink_feed();
        run
    }

    /// 2Γ_{N+1} ρ_kk of the current state.
    fn sink_feed(&self) -> f64 {
        match self.sink {
            Some((site, rate)) => 2.0 * rate * self.rho.electronic_population(site),
            None => 0.0,
        }
    }

    /// `recording = Some((substeps, config))` records samples and checks
    /// invariants; `None` only advances the state.
    fn integrate(
        &mut self,
        h: f64,
        total: usize,
        recording: Option<(usize, &IntegratorConfig)>,
    ) -> Result<()> {
        let dim = self.rho.dim();
        let mut k = CMatrix::zeros(dim, dim);
        let mut acc = CMatrix::zeros(dim, dim);
        let mut stage = CMatrix::zeros(dim, dim);
        let mut scratch = CMatrix::zeros(dim, dim);
        if recording.is_some() {
            self.record()?;
        }
        let track_modes = self.rho.layout().has_modes();
        let segments = self.liouvillian.segments(self.blocked);
        let hermitize = self.liouvillian.has_general_jumps();
        for step in 1..=total {
            {
                let l = self.liouvillian;
                let eval = |x: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix| {
                    if self.blocked {
                        l.rhs_block_hermitian(x, out, scratch)
                    } else {
                        l.rhs_hermitian(x, out, scratch)
                    }
                };
                let rho = self.rho.matrix();
                // k1
                eval(rho, &mut acc, &mut scratch);
                axpy_into(rho, &acc, 0.5 * h, &mut stage, &segments);
                // k2
                eval(&stage, &mut k, &mut scratch);
                accumulate_stage(&mut acc, &k, 2.0, rho, 0.5 * h, &mut stage, &segments);
                // k3
                eval(&stage, &mut k, &mut scratch);
                accumulate_stage(&mut acc, &k, 2.0, rho, h, &mut stage, &segments);
                // k4
                eval(&stage, &mut k, &mut scratch);
                add_scaled(&mut acc, &k, 1.0, &segments);
            }
            add_scaled(self.rho.matrix_mut(), &acc, h / 6.0, &segments);
            if hermitize {
                // the Hermitian rhs would amplify an anti-Hermitian residue
                make_hermitian(self.rho.matrix_mut());
            }
            self.time = step as f64 * h;

            let feed = self.sink_feed();
            self.integral += 0.5 * h * (self.last_feed + feed);
            self.last_feed = feed;
            if track_modes && recording.is_some() {
                for (m, x) in self
                    .traj
                    .mode_excitation_max
                    .iter_mut()
                    .zip(self.rho.mode_excitations())
                {
                    *m = m.max(x);
                }
            }

            let Some((substeps, config)) = recording else {
                if !self.rho.matrix()[(0, 0)].re.is_finite() {
                    return Err(self.instability("state diverged"));
                }
                continue;
            };
            if step % substeps != 0 {
                continue;
            }
            let base = step / substeps;
            let last = step == total;
            if base % config.record_stride == 0 || last {
                self.record()?;
            }
            let check = config.positivity_check_stride;
            if (check > 0 && base % check == 0) || last {
                self.traj.diagnostics.positivity_checks += 1;
                if !self.rho.is_positive_within(EIGENVALUE_FLOOR) {
                    return Err(self.instability("density matrix lost positivity"));
                }
            }
        }
        self.traj.diagnostics.steps = total;
        Ok(())
    }

    fn instability(&self, detail: &str) -> Error {
        Error::NumericalInstability {
            time: self.time,
            detail: detail.into(),
        }
    }

    fn record(&mut self) -> Result<()> {
        let pops = self.rho.electronic_populations();
        let tr: f64 = pops.iter().sum();
        if !tr.is_finite() || (tr - 1.0).abs() > 1e-6 {
            return Err(self.instability(&format!("trace drifted to {tr}")));
        }
        let herm = hermitian_deviation(self.rho.matrix());
        let d = &mut self.traj.diagnostics;
        d.max_trace_error = d.max_trace_error.max((tr - 1.0).abs());
        d.max_hermitian_deviation = d.max_hermitian_deviation.max(herm);
        let n = self.rho.layout().n_sites();
        let sink_direct = if self.sink.is_some() { pops[n + 1] } else { 0.0 };
        d.max_sink_discrepancy = d
            .max_sink_discrepancy
            .max((sink_direct - self.integral).abs());

        self.traj.times.push(self.time);
        self.traj.ground_population.push(pops[0]);
        self.traj.site_populations.push(pops[1..=n].to_vec());
        self.traj.sink_population.push(sink_direct);
        self.traj.sink_population_integral.push(self.integral);
        let c = self.rho.coherence(self.pair.0, self.pair.1)?;
        self.traj.coherences.push(c);
        if let (Some(u), Some(hp)) = (&self.observables.transform, &mut self.traj.hybrid_populations) {
            let block = self.rho.site_block();
            let t = u.unitary() * block * u.unitary().adjoint();
            hp.push(t.diagonal().iter().map(|z: &C64| z.re).collect());
        }
        Ok(())
    }

    fn finish(mut self) -> Trajectory {
        self.traj.final_state = self.rho;
        self.traj
    }
}

/// `dst = a + s·b` on `segments`.
fn axpy_into(a: &CMatrix, b: &CMatrix, s: f64, dst: &mut CMatrix, segments: &[Range<usize>]) {
    let (a, b, dst) = (a.as_slice(), b.as_slice(), dst.as_mut_slice());
    for r in segments {
        for ((d, x), y) in dst[r.clone()].iter_mut().zip(&a[r.clone()]).zip(&b[r.clone()]) {
            *d = x + y * s;
        }
    }
}

/// `dst += s·b` on `segments`.
fn make_hermitian(m: &mut CMatrix) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in j + 1..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

fn add_scaled(dst: &mut CMatrix, b: &CMatrix, s: f64, segments: &[Range<usize>]) {
    let (b, dst) = (b.as_slice(), dst.as_mut_slice());
    for r in segments {
        for (d, y) in dst[r.clone()].iter_mut().zip(&b[r.clone()]) {
            *d += y * s;
        }
    }
}

/// `acc += w·k` and `stage = ρ + s·k` in one pass.
fn accumulate_stage(
    acc: &mut CMatrix,
    k: &CMatrix,
    w: f64,
    rho: &CMatrix,
    s: f64,
    stage: &mut CMatrix,
    segments: &[Range<usize>],
) {
    let (acc, k, rho, stage) = (acc.as_mut_slice(), k.as_slice(), rho.as_slice(), stage.as_mut_slice());
    for r in segments {
        for (((a, y), x), st) in acc[r.clone()]
            .iter_mut()
            .zip(&k[r.clone()])
            .zip(&rho[r.clone()])
            .zip(stage[r.clone()].iter_mut())
        {
            *a += y * w;
            *st = x + y * s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_fcn, NetworkHamiltonian};
    use crate::noise::{DephasingSpec, NoiseSpec, SinkSpec};
    use crate::propagate::{sink_population_dual, trajectory_csv};
    use crate::units::UnitSystem;
    use nalgebra::DMatrix;

    fn fcn_generators(n: usize, noise: NoiseSpec) -> GeneratorSet {
        GeneratorSet::build(&build_fcn(n, 1.0, &vec![0.0; n]).unwrap(), &noise).unwrap()
    }

    fn with_sink(n: usize, dephasing: Option<DephasingSpec>) -> NoiseSpec {
        NoiseSpec {
            dephasing,
            sink: Some(SinkSpec { site: n, rate: 1.0 }),
            ..Default::default()
        }
    }

    #[test]
    fn zero_generator_leaves_state_constant() {
        let h = NetworkHamiltonian::new(vec![0.0; 3], DMatrix::zeros(3, 3), UnitSystem::Dimensionless).unwrap();
        let g = GeneratorSet::build(&h, &NoiseSpec::default()).unwrap();
        let rho0 = DensityMatrix::pure_site(g.layout().clone(), 2).unwrap();
        assert!(rhs(&rho0, &g).unwrap().iter().all(|z| *z == C64::new(0.0, 0.0)));
        let traj = evolve(&rho0, &g, &IntegratorConfig::dimensionless(2.0)).unwrap();
        assert_eq!(traj.final_state, rho0);
        assert!(traj.site_populations.iter().all(|p| p == &vec![0.0, 1.0, 0.0]));
    }

    #[test]
    fn resonant_pair_follows_rabi_cosine() {
        let v = 0.7;
        let h = build_fcn(2, v, &[0.0, 0.0]).unwrap();
        let g = GeneratorSet::build(&h, &NoiseSpec::default()).unwrap();
        let rho0 = DensityMatrix::pure_site(g.layout().clone(), 1).unwrap();
        assert!(rhs(&rho0, &g).unwrap()[(1, 1)].norm() < 1e-15);
        let traj = evolve(&rho0, &g, &IntegratorConfig::dimensionless(10.0)).unwrap();
        for (t, p) in traj.times.iter().zip(traj.site_series(1)) {
            assert!((p - (v * t).cos().powi(2)).abs() < 1e-8);
        }
    }

    #[test]
    fn pure_dephasing_keeps_populations_and_kills_coherence() {
        let h = NetworkHamiltonian::new(vec![0.0; 2], DMatrix::zeros(2, 2), UnitSystem::Dimensionless).unwrap();
        let noise = NoiseSpec {
            dephasing: Some(DephasingSpec::local(vec![0.3, 0.5]).unwrap()),
            ..Default::default()
        };
        let g = GeneratorSet::build(&h, &noise).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho0 = DensityMatrix::pure_state(g.layout().clone(), &[C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap();
        let traj = evolve(&rho0, &g, &IntegratorConfig::dimensionless(3.0)).unwrap();
        for (k, t) in traj.times.iter().enumerate() {
            assert!((traj.site_populations[k][0] - 0.5).abs() < 1e-14);
            assert!((traj.coherences[k].re - 0.5 * (-0.8 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn dephased_fcn_outperforms_noiseless() {
        let config = IntegratorConfig::dimensionless(50.0);
        let run = |d| {
            let g = fcn_generators(7, with_sink(7, d));
            let rho0 = DensityMatrix::pure_site(g.layout().clone(), 1).unwrap();
            evolve(&rho0, &g, &config).unwrap().final_sink()
        };
        let quiet = run(None);
        let noisy = run(Some(DephasingSpec::uniform(7, 1.0).unwrap()));
        assert!(quiet < 0.2 && noisy > 0.9);
    }

    #[test]
    fn sink_accounting_and_invariants() {
        let h = NetworkHamiltonian::new(
            vec![0.2, -0.4, 0.9, 0.0],
            DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 0.3 + 0.1 * (i + j) as f64 }),
            UnitSystem::Dimensionless,
        )
        .unwrap();
        let noise = NoiseSpec {
            dephasing: Some(DephasingSpec::local(vec![0.5, 0.2, 0.8, 0.1]).unwrap()),
            radiative: vec![0.01; 4],
            sink: Some(SinkSpec { site: 2, rate: 0.7 }),
            modes: None,
        };
        let g = GeneratorSet::build(&h, &noise).unwrap();
        let rho0 = DensityMatrix::pure_site(g.layout().clone(), 4).unwrap();
        let config = IntegratorConfig::dimensionless(20.0);
        let traj = evolve(&rho0, &g, &config).unwrap();
        for (d, i) in sink_population_dual(&traj) {
            assert!((d - i).abs() < 10.0 * config.tolerance);
        }
        assert!(traj.sink_population.windows(2).all(|w| w[1] >= w[0]));
        assert!(traj.diagnostics.max_trace_error < 1e-8);
        assert!(traj.diagnostics.max_hermitian_deviation < 1e-9);
        assert!(traj.final_state.min_eigenvalue() > -1e-7);
        assert!(traj.diagnostics.guard_change.unwrap() < config.tolerance);
    }

    #[test]
    fn no_sink_means_zero_sink_series() {
        let g = fcn_generators(3, NoiseSpec::default());
        let rho0 = DensityMatrix::pure_site(g.layout().clone(), 1).unwrap();
        let traj = evolve(&rho0, &g, &IntegratorConfig::dimensionless(1.0)).unwrap();
        assert!(sink_population_dual(&traj).iter().all(|&(d, i)| d == 0.0 && i == 0.0));
    }

    #[test]
    fn impossible_tolerance_is_step_too_large() {
        let g = fcn_generators(3, with_sink(3, None));
        let rho0 = DensityMatrix::pure_site(g.layout().clone(), 1).unwrap();
        let config = IntegratorConfig {
            tolerance: 0.0,
            max_refinements: 1,
            ..IntegratorConfig::dimensionless(1.0)
        };
        assert!(matches!(evolve(&rho0, &g, &config), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn invalid_configs_rejected() {
        let g = fcn_generators(3, NoiseSpec::default());
        let rho0 = DensityMatrix::pure_site(g.layout().clone(), 1).unwrap();
        for config in [
            IntegratorConfig { dt: 0.0, ..Default::default() },
            IntegratorConfig { t_final: -1.0, ..Default::default() },
            IntegratorConfig { dt: 0.3, t_final: 1.0, ..Default::default() },
            IntegratorConfig { record_stride: 0, ..Default::default() },
        ] {
            assert!(matches!(evolve(&rho0, &g, &config), Err(Error::Validation(_))));
        }
        let other = fcn_generators(4, NoiseSpec::default());
        assert!(evolve(&rho0, &other, &IntegratorConfig::dimensionless(1.0)).is_err());
    }

    #[test]
    fn reruns_are_byte_identical() {
        let g = fcn_generators(4, with_sink(4, Some(DephasingSpec::uniform(4, 0.5).unwrap())));
        let rho0 = DensityMatrix::pure_site(g.layout().clone(), 1).unwrap();
        let config = IntegratorConfig::dimensionless(5.0);
        let a = trajectory_csv(&evolve(&rho0, &g, &config).unwrap());
        let b = trajectory_csv(&evolve(&rho0, &g, &config).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rotated_correlated_dephasing_stays_hermitian() {
        let gamma = DMatrix::from_fn(4, 4, |i, j| if i == j { 4.0 } else { 2.5 * (-((i as f64 - j as f64).abs())).exp() });
        let h = NetworkHamiltonian::new(
            vec![0.0, 0.5, -0.4, 0.2],
            DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 }),
            UnitSystem::Dimensionless,
        )
        .unwrap();
        let noise = NoiseSpec {
            dephasing: Some(DephasingSpec::correlated(&gamma).unwrap()),
            sink: Some(SinkSpec { site: 4, rate: 1.0 }),
            ..Default::default()
        };
        let g = GeneratorSet::build(&h, &noise).unwrap();
        let u = crate::model::hybrid_transform(4, (1, 2)).unwrap();
        let config = IntegratorConfig {
            guard: false,
            ..IntegratorConfig::dimensionless(20.0)
        };
        let rho0 = DensityMatrix::pure_site(g.layout().clone(), 1).unwrap();
        let site = evolve(&rho0, &g, &config).unwrap();
        let rotated = evolve(&rho0.transformed(&u).unwrap(), &g.transformed(&u).unwrap(), &config).unwrap();
        assert!(rotated.diagnostics.max_hermitian_deviation == 0.0);
        assert!(rotated.diagnostics.max_trace_error < 1e-12);
        assert!((site.final_sink() - rotated.final_sink()).abs() < 1e-10);
    }
}
