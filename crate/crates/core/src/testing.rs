//! Helpers shared by unit tests.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{CMatrix, C64};

/// Random Hermitian matrix with entries in [−1, 1].
pub fn random_hermitian(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Random full-rank density matrix A A† / tr(A A†).
pub fn random_density(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = &a * a.adjoint();
    let t = m.trace();
    m / t
}

/// Random symmetric PSD matrix B Bᵀ.
pub fn random_psd(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &b * b.transpose()
}

/// −Σ_mn γ_mn [A_m, [A_n, ρ]] by dense matrix products, A_m = |m⟩⟨m| on
/// electronic index m (sites 1..=N).
pub fn double_commutator(gamma: &DMatrix<f64>, rho: &CMatrix) -> CMatrix {
    let dim = rho.nrows();
    let proj = |m: usize| {
        let mut a = CMatrix::zeros(dim, dim);
        a[(m + 1, m + 1)] = C64::new(1.0, 0.0);
        a
    };
    let mut out = CMatrix::zeros(dim, dim);
    for m in 0..gamma.nrows() {
        for n in 0..gamma.ncols() {
            let (am, an) = (proj(m), proj(n));
            let inner = &an * rho - rho * &an;
            let outer = &am * &inner - &inner * &am;
            out -= outer * C64::new(gamma[(m, n)], 0.0);
        }
    }
    out
}
