#![allow(dead_code)]

use dat_core::linalg::{CMatrix, C64};
use dat_core::units::UnitSystem;
use dat_core::NetworkHamiltonian;
use nalgebra::DMatrix;

/// Network from site energies and the upper triangle of the couplings,
/// row by row.
pub fn network(energies: &[f64], upper: &[f64]) -> NetworkHamiltonian {
    let n = energies.len();
    let mut c = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            c[(i, j)] = upper[k];
            c[(j, i)] = upper[k];
            k += 1;
        }
    }
    NetworkHamiltonian::new(energies.to_vec(), c, UnitSystem::Dimensionless).unwrap()
}

/// Hermitian matrix whose upper triangle and diagonal come from `values`
/// (two per off-diagonal entry, one per diagonal entry).
pub fn hermitian(n: usize, values: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        m[(i, i)] = C64::new(values[k], 0.0);
        k += 1;
        for j in i + 1..n {
            m[(i, j)] = C64::new(values[k], values[k + 1]);
            m[(j, i)] = m[(i, j)].conj();
            k += 2;
        }
    }
    m
}

/// Positive semidefinite B Bᵀ from n² entries of B.
pub fn psd(n: usize, values: &[f64]) -> DMatrix<f64> {
    let b = DMatrix::from_row_slice(n, n, &values[..n * n]);
    &b * b.transpose()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
