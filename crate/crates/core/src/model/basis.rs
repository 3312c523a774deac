use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, CMatrix, C64};
use crate::model::{site_offset, NetworkHamiltonian};

const UNITARITY_TOLERANCE: f64 = 1e-12;

/// A unitary change of basis over the N-site single-excitation space.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTransform {
    unitary: CMatrix,
    description: String,
    pair: Option<(usize, usize)>,
}

impl BasisTransform {
    /// Rows of `unitary` are the new basis vectors in site coordinates.
    pub fn new(unitary: CMatrix, description: impl Into<String>) -> Result<Self> {
        if !unitary.is_square() {
            return Err(Error::dims(unitary.nrows(), unitary.ncols()));
        }
        let n = unitary.nrows();
        let gram = unitary.adjoint() * &unitary;
        let dev = (gram - CMatrix::identity(n, n)).camax();
        if dev > UNITARITY_TOLERANCE {
            return Err(Error::Validation(format!(
                "transform is not unitary (max |U†U − I| = {dev:e})"
            )));
        }
        Ok(BasisTransform {
            unitary,
            description: description.into(),
            pair: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        BasisTransform {
            unitary: CMatrix::identity(n, n),
            description: "identity".into(),
            pair: None,
        }
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    /// The mixed pair (1-based) for hybrid transforms.
    pub fn pair(&self) -> Option<(usize, usize)> {
        self.pair
    }

    /// Coordinates of new basis vector `index` (1-based) in the site basis.
    pub fn basis_vector(&self, index: usize) -> Result<Vec<C64>> {
        let r = site_offset(index, self.dim())?;
        Ok(self.unitary.row(r).iter().map(|z| z.conj()).collect())
    }
}

/// Transform mixing sites `i` and `j` into (|i⟩ ± |j⟩)/√2.
///
/// The `+` combination takes index `i`, the `−` combination index `j`; all
/// other sites are left alone. The matrix is real symmetric with U² = I.
pub fn hybrid_transform(n_sites: usize, pair: (usize, usize)) -> Result<BasisTransform> {
    let (i, j) = pair;
    if i == j {
        return Err(Error::InvalidPair(i, j));
    }
    let (a, b) = (site_offset(i, n_sites)?, site_offset(j, n_sites)?);
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut u = CMatrix::identity(n_sites, n_sites);
    u[(a, a)] = s;
    u[(a, b)] = s;
    u[(b, a)] = s;
    u[(b, b)] = -s;
    let mut t = BasisTransform::new(u, format!("hybrid |±⟩ = (|{i}⟩ ± |{j}⟩)/√2"))?;
    t.pair = Some(pair);
    Ok(t)
}

/// `U H U†` for a dense Hermitian matrix.
pub fn transform_matrix(h: &CMatrix, u: &BasisTransform) -> Result<CMatrix> {
    if h.nrows() != u.dim() || h.ncols() != u.dim() {
        return Err(Error::dims(u.dim(), h.nrows()));
    }
    let out = &u.unitary * h * u.unitary.adjoint();
    // restore exact conjugate symmetry lost to rounding
    Ok((&out + out.adjoint()) * C64::new(0.5, 0.0))
}

pub fn transform_hamiltonian(h: &NetworkHamiltonian, u: &BasisTransform) -> Result<CMatrix> {
    transform_matrix(&h.complex_matrix(), u)
}

/// Replaces ⟨a|H|b⟩ (1-based) with `value`, and ⟨b|H|a⟩ with its conjugate.
pub fn edit_coupling(h: &CMatrix, a: usize, b: usize, value: C64) -> Result<CMatrix> {
    let n = h.nrows();
    let (ia, ib) = (site_offset(a, n)?, site_offset(b, n)?);
    let mut out = h.clone();
    if ia == ib {
        out[(ia, ia)] = C64::new(value.re, 0.0);
    } else {
        out[(ia, ib)] = value;
        out[(ib, ia)] = value.conj();
    }
    debug_assert!(hermitian_deviation(&out) <= hermitian_deviation(h) + 1e-15);
    Ok(out)
}
