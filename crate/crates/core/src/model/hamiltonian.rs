use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{real_to_complex, CMatrix};
use crate::units::UnitSystem;

/// Tolerance on coupling asymmetry accepted from external input.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Single-excitation Hamiltonian of an N-site network.
///
/// Energies and couplings are stored in the units of [`UnitSystem`]; the
/// couplings matrix is exactly symmetric with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkHamiltonian {
    energies: Vec<f64>,
    couplings: DMatrix<f64>,
    units: UnitSystem,
    labels: Option<Vec<String>>,
}

impl NetworkHamiltonian {
    pub fn new(energies: Vec<f64>, couplings: DMatrix<f64>, units: UnitSystem) -> Result<Self> {
        let n = energies.len();
        if n == 0 {
            return Err(Error::InvalidNetwork("network has no sites".into()));
        }
        if couplings.nrows() != n || couplings.ncols() != n {
            return Err(Error::dims(n, couplings.nrows().max(couplings.ncols())));
        }
        if energies.iter().chain(couplings.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Validation("non-finite Hamiltonian entry".into()));
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::Validation(format!(
                    "coupling diagonal entry {} is {}, expected 0",
                    i + 1,
                    couplings[(i, i)]
                )));
            }
            for j in 0..i {
                let d = (couplings[(i, j)] - couplings[(j, i)]).abs();
                if d > SYMMETRY_TOLERANCE {
                    return Err(Error::Validation(format!(
                        "couplings ({}, {}) and ({}, {}) differ by {d:e}",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let couplings = (&couplings + couplings.transpose()) * 0.5;
        Ok(NetworkHamiltonian {
            energies,
            couplings,
            units,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_sites() {
            return Err(Error::dims(self.n_sites(), labels.len()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n_sites(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn units(&self) -> UnitSystem {
        self.units
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// The N×N matrix with energies on the diagonal, in input units.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = self.couplings.clone();
        for (i, e) in self.energies.iter().enumerate() {
            m[(i, i)] = *e;
        }
        m
    }

    pub fn complex_matrix(&self) -> CMatrix {
        real_to_complex(&self.matrix())
    }

    /// Same network with a new set of site energies.
    pub fn with_energies(&self, energies: Vec<f64>) -> Result<Self> {
        if energies.len() != self.n_sites() {
            return Err(Error::dims(self.n_sites(), energies.len()));
        }
        let mut out = self.clone();
        out.energies = energies;
        Ok(out)
    }

    /// Relabels sites so that new site `i` is old site `perm[i]` (0-based).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_sites();
        if perm.len() != n {
            return Err(Error::dims(n, perm.len()));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::Validation("not a permutation".into()));
            }
            seen[p] = true;
        }
        let energies = perm.iter().map(|&p| self.energies[p]).collect();
        let couplings = DMatrix::from_fn(n, n, |i, j| self.couplings[(perm[i], perm[j])]);
        NetworkHamiltonian::new(energies, couplings, self.units)
    }
}

/// Fully connected network: every pair of sites coupled by `j_coupling`.
pub fn build_fcn(n: usize, j_coupling: f64, energies: &[f64]) -> Result<NetworkHamiltonian> {
    if n < 2 {
        return Err(Error::InvalidNetwork(format!(
            "a fully connected network needs at least 2 sites, got {n}"
        )));
    }
    if energies.len() != n {
        return Err(Error::dims(n, energies.len()));
    }
    let couplings = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { j_coupling });
    NetworkHamiltonian::new(energies.to_vec(), couplings, UnitSystem::Dimensionless)
}

/// Site energies drawn uniformly from `[low, high)` with a seeded generator.
pub fn disordered_energies(n: usize, low: f64, high: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(low..high)).collect()
}
