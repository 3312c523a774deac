use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, hermitian_eigenvalues, is_psd_within, trace, CMatrix, C64, ZERO};
use crate::model::{site_offset, BasisTransform};
use crate::noise::SpaceLayout;

pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
pub const TRACE_TOLERANCE: f64 = 1e-9;
pub const EIGENVALUE_FLOOR: f64 = 1e-7;

/// State over {ground, sites, sink}, possibly tensored with mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: SpaceLayout,
    data: CMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix after checking the density-matrix invariants.
    pub fn new(layout: SpaceLayout, data: CMatrix) -> Result<Self> {
        let rho = Self::unchecked(layout, data)?;
        rho.check_invariants()?;
        Ok(rho)
    }

    /// Wraps any square matrix of the right size (used for generator inputs).
    pub fn unchecked(layout: SpaceLayout, data: CMatrix) -> Result<Self> {
        if data.nrows() != layout.dim() || data.ncols() != layout.dim() {
            return Err(Error::dims(layout.dim(), data.nrows()));
        }
        Ok(DensityMatrix { layout, data })
    }

    pub fn ground(layout: SpaceLayout) -> Self {
        let mut data = CMatrix::zeros(layout.dim(), layout.dim());
        data[(0, 0)] = C64::new(1.0, 0.0);
        DensityMatrix { layout, data }
    }

    /// |site⟩⟨site| with every mode in its ground state.
    pub fn pure_site(layout: SpaceLayout, site: usize) -> Result<Self> {
        let n = layout.n_sites();
        let mut amps = vec![ZERO; n];
        amps[site_offset(site, n)?] = C64::new(1.0, 0.0);
        Self::pure_state(layout, &amps)
    }

    /// |ψ⟩⟨ψ| for a normalized single-excitation amplitude vector, modes in
    /// their ground state.
    pub fn pure_state(layout: SpaceLayout, amplitudes: &[C64]) -> Result<Self> {
        let n = layout.n_sites();
        if amplitudes.len() != n {
            return Err(Error::dims(n, amplitudes.len()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::Validation(format!(
                "initial state has squared norm {norm}, expected 1"
            )));
        }
        let mut data = CMatrix::zeros(layout.dim(), layout.dim());
        for (i, ai) in amplitudes.iter().enumerate() {
            for (j, aj) in amplitudes.iter().enumerate() {
                let (r, c) = (layout.full_index(i + 1, 0), layout.full_index(j + 1, 0));
                data[(r, c)] = ai * aj.conj();
            }
        }
        Ok(DensityMatrix { layout, data })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.data).re
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.data)
    }

    /// Smallest eigenvalue (full Hermitian eigendecomposition).
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.data)[0]
    }

    pub fn is_positive_within(&self, floor: f64) -> bool {
        is_psd_within(&self.data, floor)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermitian_deviation();
        if !(herm <= HERMITIAN_TOLERANCE) {
            return Err(Error::Validation(format!(
                "density matrix is not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = self.trace();
        if !((tr - 1.0).abs() <= TRACE_TOLERANCE) {
            return Err(Error::Validation(format!("density matrix has trace {tr}")));
        }
        if !self.is_positive_within(EIGENVALUE_FLOOR) {
            return Err(Error::Validation(
                "density matrix has an eigenvalue below -1e-7".into(),
            ));
        }
        Ok(())
    }

    /// Populations of the electronic levels (ground, sites, sink), traced
    /// over modes.
    pub fn electronic_populations(&self) -> Vec<f64> {
        let md = self.layout.mode_dim();
        let n = self.dim();
        let s = self.data.as_slice();
        (0..self.layout.electronic_dim())
            .map(|e| (e * md..(e + 1) * md).map(|i| s[i + i * n].re).sum())
            .collect()
    }

    /// Population of electronic level `e` (0 ground, 1..=N sites, N+1 sink).
    pub fn electronic_population(&self, e: usize) -> f64 {
        let md = self.layout.mode_dim();
        let n = self.dim();
        let s = self.data.as_slice();
        (e * md..(e + 1) * md).map(|i| s[i + i * n].re).sum()
    }

    pub fn sink_population(&self) -> f64 {
        self.electronic_population(self.layout.sink())
    }

    /// Reduced N×N site block (partial trace over modes).
    pub fn site_block(&self) -> CMatrix {
        let n = self.layout.n_sites();
        let md = self.layout.mode_dim();
        CMatrix::from_fn(n, n, |i, j| {
            (0..md)
                .map(|m| {
                    self.data[(
                        self.layout.full_index(i + 1, m),
                        self.layout.full_index(j + 1, m),
                    )]
                })
                .sum()
        })
    }

    /// Reduced ⟨i|ρ|j⟩ between sites (1-based).
    pub fn coherence(&self, i: usize, j: usize) -> Result<C64> {
        let n = self.layout.n_sites();
        let (a, b) = (site_offset(i, n)? + 1, site_offset(j, n)? + 1);
        let md = self.layout.mode_dim();
        Ok((0..md)
            .map(|m| self.data[(self.layout.full_index(a, m), self.layout.full_index(b, m))])
            .sum())
    }

    /// Excited-state population of each mode, in `mode_sites` order.
    pub fn mode_excitations(&self) -> Vec<f64> {
        let m = self.layout.n_modes();
        let md = self.layout.mode_dim();
        let n = self.dim();
        let s = self.data.as_slice();
        let mut out = vec![0.0; m];
        for i in 0..n {
            let conf = i % md;
            let p = s[i + i * n].re;
            for (bit, o) in out.iter_mut().enumerate() {
                if conf & (1 << bit) != 0 {
                    *o += p;
                }
            }
        }
        out
    }

    /// U ρ U† with U acting on the site block and identity elsewhere.
    pub fn transformed(&self, u: &BasisTransform) -> Result<Self> {
        if u.dim() != self.layout.n_sites() {
            return Err(Error::dims(self.layout.n_sites(), u.dim()));
        }
        let full = self
            .layout
            .lift(&self.layout.embed_sites_unitary(u.unitary()));
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        full.add_dense_mul_adjoint(&full.mul_dense(&self.data), &mut out);
        Ok(DensityMatrix {
            layout: self.layout.clone(),
            data: out,
        })
    }
}

/// Partial trace over all mode factors.
pub fn reduced_electronic_state(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let layout = rho.layout();
    if !layout.has_modes() {
        return Err(Error::Basis(
            "state has no mode factors to trace out".into(),
        ));
    }
    let ne = layout.electronic_dim();
    let md = layout.mode_dim();
    let data = CMatrix::from_fn(ne, ne, |e, f| {
        (0..md)
            .map(|m| rho.matrix()[(layout.full_index(e, m), layout.full_index(f, m))])
            .sum()
    });
    Ok(DensityMatrix {
        layout: SpaceLayout::electronic(layout.n_sites()),
        data,
    })
}
