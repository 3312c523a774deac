use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CsrMatrix, C64, I, ONE, ZERO};
use crate::model::{site_offset, BasisTransform, NetworkHamiltonian};
use crate::noise::{
    extend_with_modes, validate_rate_matrix, DissipationSpec, NoiseSpec, SinkSpec,
    DEFAULT_DIMENSION_CAP,
};

/// Index bookkeeping for {ground, sites 1..N, sink} ⊗ modes.
///
/// Electronic index 0 is the ground state, 1..=N the sites, N+1 the sink.
/// A full index is `electronic · mode_dim + mode_configuration`, where bit
/// `i` of the configuration is the excitation of the mode on
/// `mode_sites[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceLayout {
    n_sites: usize,
    mode_sites: Vec<usize>,
}

impl SpaceLayout {
    pub fn electronic(n_sites: usize) -> Self {
        SpaceLayout {
            n_sites,
            mode_sites: Vec::new(),
        }
    }

    pub fn with_modes(n_sites: usize, mode_sites: Vec<usize>) -> Self {
        SpaceLayout {
            n_sites,
            mode_sites,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn mode_sites(&self) -> &[usize] {
        &self.mode_sites
    }

    pub fn n_modes(&self) -> usize {
        self.mode_sites.len()
    }

    pub fn has_modes(&self) -> bool {
        !self.mode_sites.is_empty()
    }

    pub fn electronic_dim(&self) -> usize {
        self.n_sites + 2
    }

    pub fn mode_dim(&self) -> usize {
        1 << self.mode_sites.len()
    }

    pub fn dim(&self) -> usize {
        self.electronic_dim() * self.mode_dim()
    }

    pub const GROUND: usize = 0;

    pub fn sink(&self) -> usize {
        self.n_sites + 1
    }

    pub fn full_index(&self, electronic: usize, modes: usize) -> usize {
        electronic * self.mode_dim() + modes
    }

    /// Electronic index of a full index.
    #[inline]
    pub fn electronic_of(&self, full: usize) -> usize {
        full >> self.mode_sites.len()
    }

    /// Lifts an electronic operator to `op ⊗ I_modes`.
    pub fn lift(&self, electronic_op: &CsrMatrix) -> CsrMatrix {
        if !self.has_modes() {
            return electronic_op.clone();
        }
        electronic_op.kron(&CsrMatrix::identity(self.mode_dim()))
    }

    /// Embeds an N×N site-block operator into the electronic space.
    pub fn embed_sites(&self, block: &CMatrix) -> CsrMatrix {
        let n = self.n_sites;
        let ne = self.electronic_dim();
        let mut trips = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = block[(i, j)];
                if v != ZERO {
                    trips.push((i + 1, j + 1, v));
                }
            }
        }
        CsrMatrix::from_triplets(ne, ne, trips)
    }
}

/// One dissipative contribution to the master equation.
#[derive(Debug, Clone)]
pub enum Dissipator {
    /// −Σ_mn γ_mn [A_m, [A_n, ρ]] with A_m = |m⟩⟨m| ⊗ I_modes over sites.
    /// A diagonal γ is ordinary local dephasing.
    Dephasing { gamma: DMatrix<f64> },
    /// rate · (2 L ρ L† − {L†L, ρ}) for a full-space jump operator L.
    Jump {
        label: String,
        op: CsrMatrix,
        rate: f64,
    },
}

impl Dissipator {
    /// Electronic-pair factor F with D(ρ)_ab = F[e_a, e_b] ρ_ab for dephasing.
    pub(crate) fn dephasing_factor(gamma: &DMatrix<f64>, electronic_dim: usize) -> DMatrix<f64> {
        let n = gamma.nrows();
        let diag = |e: usize| {
            if (1..=n).contains(&e) {
                gamma[(e - 1, e - 1)]
            } else {
                0.0
            }
        };
        DMatrix::from_fn(electronic_dim, electronic_dim, |e, f| {
            if e == f {
                return 0.0;
            }
            let cross = if (1..=n).contains(&e) && (1..=n).contains(&f) {
                gamma[(e - 1, f - 1)] + gamma[(f - 1, e - 1)]
            } else {
                0.0
            };
            -(diag(e) + diag(f) - cross)
        })
    }

    /// Applies the term to a dense state (reference path, any input matrix).
    pub fn apply(&self, rho: &CMatrix, layout: &SpaceLayout) -> CMatrix {
        match self {
            Dissipator::Dephasing { gamma } => {
                let f = Self::dephasing_factor(gamma, layout.electronic_dim());
                CMatrix::from_fn(rho.nrows(), rho.ncols(), |a, b| {
                    rho[(a, b)] * f[(layout.electronic_of(a), layout.electronic_of(b))]
                })
            }
            Dissipator::Jump { op, rate, .. } => {
                let l = op;
                let ldl = l.adjoint().matmul(l);
                let mut sandwich = CMatrix::zeros(rho.nrows(), rho.ncols());
                l.add_dense_mul_adjoint(&l.mul_dense(rho), &mut sandwich);
                let mut anti = ldl.mul_dense(rho);
                ldl.add_dense_mul_adjoint(rho, &mut anti);
                (sandwich * C64::new(2.0, 0.0) - anti) * C64::new(*rate, 0.0)
            }
        }
    }

    /// Rewrites dephasing as Hermitian jump operators from the eigenvectors
    /// of γ: Σ_k λ_k (2 L_k ρ L_k − {L_k², ρ}).
    pub fn to_jumps(&self, layout: &SpaceLayout) -> Vec<Dissipator> {
        match self {
            Dissipator::Dephasing { gamma } => {
                let eig = gamma.clone().symmetric_eigen();
                let mut out = Vec::new();
                for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
                    if lambda <= 0.0 {
                        continue;
                    }
                    let v = eig.eigenvectors.column(k);
                    let block = CMatrix::from_fn(layout.n_sites(), layout.n_sites(), |i, j| {
                        if i == j {
                            C64::new(v[i], 0.0)
                        } else {
                            ZERO
                        }
                    });
                    out.push(Dissipator::Jump {
                        label: format!("dephasing channel {k}"),
                        op: layout.lift(&layout.embed_sites(&block)),
                        rate: lambda,
                    });
                }
                out
            }
            other => vec![other.clone()],
        }
    }
}

/// Radiative decay site j → ground, one jump per site with Γ_j > 0.
pub(crate) fn radiative_terms(layout: &SpaceLayout, rates: &[f64]) -> Vec<Dissipator> {
    let ne = layout.electronic_dim();
    rates
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > 0.0)
        .map(|(j, &r)| {
            let op = CsrMatrix::from_triplets(ne, ne, [(SpaceLayout::GROUND, j + 1, ONE)]);
            Dissipator::Jump {
                label: format!("radiative {}", j + 1),
                op: layout.lift(&op),
                rate: r,
            }
        })
        .collect()
}

/// Irreversible transfer site k → sink.
pub(crate) fn sink_term(layout: &SpaceLayout, sink: &SinkSpec) -> Dissipator {
    let ne = layout.electronic_dim();
    let op = CsrMatrix::from_triplets(ne, ne, [(layout.sink(), sink.site, ONE)]);
    Dissipator::Jump {
        label: format!("sink from site {}", sink.site),
        op: layout.lift(&op),
        rate: sink.rate,
    }
}

/// Coherent part and dissipators of the master equation on one space.
///
/// The Hamiltonian is stored as an angular frequency (energy × κ).
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    layout: SpaceLayout,
    hamiltonian: CsrMatrix,
    dissipators: Vec<Dissipator>,
    sink: Option<SinkSpec>,
}

impl GeneratorSet {
    /// Electronic generators for `h` with the given noise (modes included
    /// when `noise.modes` is set).
    pub fn build(h: &NetworkHamiltonian, noise: &NoiseSpec) -> Result<Self> {
        noise.validate(h.n_sites())?;
        if let Some(modes) = &noise.modes {
            return extend_with_modes(h, noise, modes, DEFAULT_DIMENSION_CAP);
        }
        Self::electronic(h, noise)
    }

    pub(crate) fn electronic(h: &NetworkHamiltonian, noise: &NoiseSpec) -> Result<Self> {
        noise.validate(h.n_sites())?;
        let layout = SpaceLayout::electronic(h.n_sites());
        let block = h.complex_matrix() * C64::new(h.units().kappa(), 0.0);
        let hamiltonian = layout.embed_sites(&block);
        let mut set = GeneratorSet {
            layout,
            hamiltonian,
            dissipators: Vec::new(),
            sink: None,
        };
        set.add_noise(noise)?;
        Ok(set)
    }

    pub(crate) fn from_parts(layout: SpaceLayout, hamiltonian: CsrMatrix) -> Self {
        GeneratorSet {
            layout,
            hamiltonian,
            dissipators: Vec::new(),
            sink: None,
        }
    }

    /// Adds dephasing, radiative and sink terms (lifted over any modes).
    pub(crate) fn add_noise(&mut self, noise: &NoiseSpec) -> Result<()> {
        if let Some(d) = &noise.dephasing {
            let gamma = d.rate_matrix();
            validate_rate_matrix(&gamma)?;
            if gamma.iter().any(|&g| g != 0.0) {
                self.dissipators.push(Dissipator::Dephasing { gamma });
            }
        }
        let diss = DissipationSpec {
            radiative_rates: noise.radiative.clone(),
            sink: noise.sink,
        };
        diss.validate(self.layout.n_sites())?;
        self.dissipators
            .extend(radiative_terms(&self.layout, &diss.radiative_rates));
        if let Some(s) = &diss.sink {
            self.dissipators.push(sink_term(&self.layout, s));
            self.sink = Some(*s);
        }
        Ok(())
    }

    pub(crate) fn push(&mut self, d: Dissipator) {
        self.dissipators.push(d);
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn hamiltonian(&self) -> &CsrMatrix {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    pub fn sink(&self) -> Option<&SinkSpec> {
        self.sink.as_ref()
    }

    /// Reference evaluation of −i[H, ρ] + Σ D(ρ) for any square input.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.dim() || rho.ncols() != self.dim() {
            return Err(Error::dims(self.dim(), rho.nrows()));
        }
        let h_rho = self.hamiltonian.mul_dense(rho);
        let mut rho_h = CMatrix::zeros(self.dim(), self.dim());
        self.hamiltonian.add_dense_mul_adjoint(rho, &mut rho_h);
        let mut out = (h_rho - rho_h) * (-I);
        for d in &self.dissipators {
            out += d.apply(rho, &self.layout);
        }
        Ok(out)
    }

    /// Every operator conjugated by `U ⊗ I_modes`, with `U` acting on sites.
    ///
    /// Dephasing terms become Hermitian jump operators in the new basis.
    pub fn transformed(&self, u: &BasisTransform) -> Result<Self> {
        if u.dim() != self.layout.n_sites() {
            return Err(Error::dims(self.layout.n_sites(), u.dim()));
        }
        let full_u = self.layout.lift(&self.layout.embed_sites_unitary(u.unitary()));
        let full_ud = full_u.adjoint();
        let conj = |m: &CsrMatrix| full_u.matmul(m).matmul(&full_ud);
        let mut out = GeneratorSet {
            layout: self.layout.clone(),
            hamiltonian: conj(&self.hamiltonian),
            dissipators: Vec::new(),
            sink: self.sink,
        };
        for d in &self.dissipators {
            for j in d.to_jumps(&self.layout) {
                if let Dissipator::Jump { label, op, rate } = j {
                    out.dissipators.push(Dissipator::Jump {
                        label,
                        op: conj(&op),
                        rate,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Sink-feeding site (1-based) and Γ_{N+1}, if a sink is attached.
    pub fn sink_site_rate(&self) -> Option<(usize, f64)> {
        self.sink.map(|s| (s.site, s.rate))
    }

    pub fn site_offset(&self, site: usize) -> Result<usize> {
        site_offset(site, self.layout.n_sites())
    }
}

impl SpaceLayout {
    /// Embeds a site-block unitary, identity on ground and sink.
    pub(crate) fn embed_sites_unitary(&self, block: &CMatrix) -> CsrMatrix {
        let ne = self.electronic_dim();
        let mut trips = vec![(0, 0, ONE), (ne - 1, ne - 1, ONE)];
        let n = self.n_sites;
        for i in 0..n {
            for j in 0..n {
                if block[(i, j)] != ZERO {
                    trips.push((i + 1, j + 1, block[(i, j)]));
                }
            }
        }
        CsrMatrix::from_triplets(ne, ne, trips)
    }
}
