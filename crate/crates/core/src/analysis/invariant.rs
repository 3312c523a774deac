use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, CMatrix, CVector, C64, ONE, ZERO};
use crate::model::site_offset;

/// A new Krylov vector is dropped when its orthogonalized residual is below
/// this norm.
pub const CLOSURE_TOLERANCE: f64 = 1e-9;
/// Eigenvalues of H on the closure space closer than this are reported as
/// degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Dark subspace of a network: the orthogonal complement of the smallest
/// H-invariant subspace containing the sink-coupled site.
#[derive(Debug, Clone)]
pub struct InvariantSubspace {
    /// Orthonormal columns spanning the dark subspace.
    pub basis: CMatrix,
    /// Orthonormal columns spanning the closure of the sink-coupled site.
    pub closure: CMatrix,
    pub sink_coupled_site: usize,
    /// H restricted to the closure space has (near-)degenerate eigenvalues.
    pub degenerate_closure: bool,
}

impl InvariantSubspace {
    pub fn dimension(&self) -> usize {
        self.basis.ncols()
    }

    pub fn closure_dimension(&self) -> usize {
        self.closure.ncols()
    }

    /// Projector onto the dark subspace.
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Largest ‖(I − P) H v‖ over the basis vectors v.
    pub fn invariance_residual(&self, h: &CMatrix) -> f64 {
        let p = self.projector();
        let n = h.nrows();
        let q = CMatrix::identity(n, n) - p;
        (0..self.dimension())
            .map(|c| (&q * (h * self.basis.column(c))).norm())
            .fold(0.0, f64::max)
    }

    /// Largest |⟨k|v⟩| over the basis vectors v.
    pub fn sink_overlap(&self) -> f64 {
        let k = self.sink_coupled_site - 1;
        (0..self.dimension())
            .map(|c| self.basis[(k, c)].norm())
            .fold(0.0, f64::max)
    }

    /// Largest |⟨u|v⟩| between closure and dark basis vectors.
    pub fn cross_gram(&self) -> f64 {
        if self.dimension() == 0 || self.closure_dimension() == 0 {
            return 0.0;
        }
        (self.closure.adjoint() * &self.basis).camax()
    }
}

/// Report form of [`InvariantSubspace`] for export.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub sink_coupled_site: usize,
    pub dimension: usize,
    pub closure_dimension: usize,
    /// Real parts of the dark basis vectors (imaginary parts vanish for real H).
    pub basis: Vec<Vec<f64>>,
    pub invariance_residual: f64,
    pub sink_overlap: f64,
    pub degenerate_closure: bool,
    pub asymptotic_sink: Option<f64>,
    pub initial_site: Option<usize>,
}

impl InvariantReport {
    pub fn new(sub: &InvariantSubspace, h: &CMatrix, initial_site: Option<usize>) -> Result<Self> {
        let asymptotic = match initial_site {
            Some(j) => {
                let psi = site_vector(h.nrows(), j)?;
                Some(asymptotic_sink_in(sub, &psi)?)
            }
            None => None,
        };
        Ok(InvariantReport {
            sink_coupled_site: sub.sink_coupled_site,
            dimension: sub.dimension(),
            closure_dimension: sub.closure_dimension(),
            basis: (0..sub.dimension())
                .map(|c| sub.basis.column(c).iter().map(|z| z.re).collect())
                .collect(),
            invariance_residual: sub.invariance_residual(h),
            sink_overlap: sub.sink_overlap(),
            degenerate_closure: sub.degenerate_closure,
            asymptotic_sink: asymptotic,
            initial_site,
        })
    }
}

/// |j⟩ in an `n`-site space (1-based).
pub fn site_vector(n: usize, j: usize) -> Result<CVector> {
    let o = site_offset(j, n)?;
    let mut v = CVector::zeros(n);
    v[o] = ONE;
    Ok(v)
}

/// Krylov closure of |k⟩ under H and its orthogonal complement.
///
/// Iterates v ← H v with two Gram–Schmidt passes against the vectors kept
/// so far and stops once the residual norm falls below
/// [`CLOSURE_TOLERANCE`]. The complement comes from the eigenvectors of
/// I − QQ† with eigenvalue near 1.
pub fn invariant_subspace(h: &CMatrix, sink_site: usize) -> Result<InvariantSubspace> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::dims(n, h.ncols()));
    }
    let dev = hermitian_deviation(h);
    if dev > 1e-9 * h.camax().max(1.0) {
        return Err(Error::Validation(format!(
            "Hamiltonian is not Hermitian (deviation {dev:e})"
        )));
    }
    let mut kept: Vec<CVector> = vec![site_vector(n, sink_site)?];
    while kept.len() < n {
        let mut w = h * kept.last().unwrap();
        for _ in 0..2 {
            for q in &kept {
                let overlap = q.dotc(&w);
                w -= q * overlap;
            }
        }
        let norm = w.norm();
        if norm < CLOSURE_TOLERANCE {
            break;
        }
        kept.push(w / C64::new(norm, 0.0));
    }
    let closure = CMatrix::from_columns(&kept);
    let projector = &closure * closure.adjoint();
    let complement = CMatrix::identity(n, n) - &projector;
    let eig = complement.symmetric_eigen();
    let mut dark: Vec<CVector> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > 0.5)
        .map(|i| normalize_phase(eig.eigenvectors.column(i).into_owned()))
        .collect();
    dark.sort_by(|a, b| lexical_key(a).partial_cmp(&lexical_key(b)).unwrap());
    let basis = if dark.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&dark)
    };

    let restricted = closure.adjoint() * h * &closure;
    let mut ev: Vec<f64> = restricted.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let degenerate_closure = ev.windows(2).any(|w| (w[1] - w[0]).abs() < DEGENERACY_TOLERANCE);
    if degenerate_closure {
        log::warn!(
            "H on the closure of site {sink_site} has degenerate eigenvalues; the asymptotic \
             sink population may not be reached"
        );
    }
    Ok(InvariantSubspace {
        basis,
        closure,
        sink_coupled_site: sink_site,
        degenerate_closure,
    })
}

/// Rotates a vector so that its largest component is real and positive.
fn normalize_phase(v: CVector) -> CVector {
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bm), (i, z)| if z.norm() > bm + 1e-12 { (i, z.norm()) } else { (bi, bm) });
    let z = v[imax];
    if z == ZERO {
        return v;
    }
    let phase = z.conj() / z.norm();
    v * phase
}

fn lexical_key(v: &CVector) -> Vec<f64> {
    v.iter().map(|z| -z.re).collect()
}

/// 1 − ‖P ψ₀‖² with P the projector on the dark subspace of (H, k): the
/// sink population reached at long times under coherent dynamics and the
/// sink alone.
pub fn asymptotic_sink(psi0: &[C64], h: &CMatrix, sink_site: usize) -> Result<f64> {
    let sub = invariant_subspace(h, sink_site)?;
    asymptotic_sink_in(&sub, &DVector::from_column_slice(psi0))
}

pub fn asymptotic_sink_in(sub: &InvariantSubspace, psi0: &CVector) -> Result<f64> {
    let n = sub.basis.nrows();
    if psi0.len() != n {
        return Err(Error::dims(n, psi0.len()));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "initial state has norm {norm}, expected 1"
        )));
    }
    let overlap = sub.basis.adjoint() * psi0;
    Ok(1.0 - overlap.norm_squared())
}
