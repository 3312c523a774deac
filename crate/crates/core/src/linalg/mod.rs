//! Dense helpers and the sparse operator type used by the generators.

mod sparse;

pub use sparse::CsrMatrix;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn real_to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Largest elementwise |m − m†|.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// True when the smallest eigenvalue of the Hermitian part is ≥ −`floor`.
///
/// Attempts a Cholesky factorization of `m + floor·I`, which is far cheaper
/// than a full eigendecomposition for the mode-extended state.
pub fn is_psd_within(m: &CMatrix, floor: f64) -> bool {
    let n = m.nrows();
    let mut a = (m + m.adjoint()) * C64::new(0.5, 0.0);
    for i in 0..n {
        a[(i, i)] += C64::new(floor, 0.0);
    }
    let s = a.as_mut_slice();
    // right-looking update on the lower triangle, column-major
    for j in 0..n {
        let pivot = s[j + j * n].re;
        if !(pivot > 0.0) {
            return false;
        }
        let d = pivot.sqrt();
        let (head, tail) = s.split_at_mut((j + 1) * n);
        let col = &mut head[j * n..];
        for x in &mut col[j + 1..n] {
            *x /= d;
        }
        for k in j + 1..n {
            let ck = col[k].conj();
            let dst = &mut tail[(k - j - 1) * n..(k - j) * n];
            for i in k..n {
                dst[i] -= col[i] * ck;
            }
        }
    }
    true
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Embeds a dense `n×n` block into the identity of size `dim` at `offset`.
pub fn embed_block(block: &CMatrix, dim: usize, offset: usize) -> CMatrix {
    let mut out = CMatrix::identity(dim, dim);
    let n = block.nrows();
    out.view_mut((offset, offset), (n, n)).copy_from(block);
    out
}
