use std::collections::BTreeMap;

use super::{CMatrix, C64, ZERO};

/// Compressed sparse row matrix over complex numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, C64::new(1.0, 0.0))))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Builds a matrix from (row, col, value) triplets. Duplicates are summed
    /// and exact zeros dropped.
    pub fn from_triplets<It>(nrows: usize, ncols: usize, triplets: It) -> Self
    where
        It: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); nrows];
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            *rows[r].entry(c).or_insert(ZERO) += v;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v != ZERO {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(m: &CMatrix, drop_below: f64) -> Self {
        let (r, c) = m.shape();
        let trips = (0..r).flat_map(|i| (0..c).map(move |j| (i, j)));
        Self::from_triplets(
            r,
            c,
            trips
                .map(|(i, j)| (i, j, m[(i, j)]))
                .filter(|(_, _, v)| v.norm() > drop_below),
        )
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r).find(|&(j, _)| j == c).map_or(ZERO, |(_, v)| v)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.iter().map(|(r, c, v)| (c, r, v.conj())),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(self.nrows, self.ncols, self.iter().chain(other.iter()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut trips = Vec::new();
        for (r, k, a) in self.iter() {
            for (c, b) in other.row(k) {
                trips.push((r, c, a * b));
            }
        }
        Self::from_triplets(self.nrows, other.ncols, trips)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (other.nrows, other.ncols);
        let mut trips = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, a) in self.iter() {
            for (r2, c2, b) in other.iter() {
                trips.push((r1 * p + r2, c1 * q + c2, a * b));
            }
        }
        Self::from_triplets(self.nrows * p, self.ncols * q, trips)
    }

    /// True when every row holds at most one stored entry.
    pub fn is_monomial_rows(&self) -> bool {
        (0..self.nrows).all(|r| self.indptr[r + 1] - self.indptr[r] <= 1)
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(r, c, _)| r == c)
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `y = A x`.
    #[inline]
    pub fn mul_vec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    /// `out = A · m` for a dense column-major `m`.
    pub fn mul_dense_into(&self, m: &CMatrix, out: &mut CMatrix) {
        assert_eq!(m.nrows(), self.ncols);
        assert_eq!(out.shape(), (self.nrows, m.ncols()));
        let (src, dst) = (m.as_slice(), out.as_mut_slice());
        let (n_in, n_out) = (self.ncols, self.nrows);
        for (x, y) in src.chunks_exact(n_in).zip(dst.chunks_exact_mut(n_out)) {
            self.mul_vec(x, y);
        }
    }

    pub fn mul_dense(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.nrows, m.ncols());
        self.mul_dense_into(m, &mut out);
        out
    }

    /// `out += m · A†` for a dense column-major `m`.
    pub fn add_dense_mul_adjoint(&self, m: &CMatrix, out: &mut CMatrix) {
        assert_eq!(m.ncols(), self.ncols);
        assert_eq!(out.shape(), (m.nrows(), self.nrows));
        let n = m.nrows();
        // (m A†)[:, b] = Σ_j m[:, j] conj(A[b, j])
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        for b in 0..self.nrows {
            let col = &mut dst[b * n..(b + 1) * n];
            for (j, v) in self.row(b) {
                let coeff = v.conj();
                for (d, s) in col.iter_mut().zip(&src[j * n..(j + 1) * n]) {
                    *d += coeff * s;
                }
            }
        }
    }

    /// Elementwise maximum |A − A†|.
    pub fn hermitian_deviation(&self) -> f64 {
        self.iter()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }
}
