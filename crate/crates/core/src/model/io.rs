use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NetworkHamiltonian;
use crate::units::UnitSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinkEntry {
    pub site: usize,
    pub rate: f64,
}

/// On-disk network description. Couplings are a full symmetric matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub units: UnitSystem,
    pub n_sites: usize,
    pub energies: Vec<f64>,
    pub couplings: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<SinkEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl NetworkFile {
    pub fn from_hamiltonian(h: &NetworkHamiltonian) -> Self {
        let n = h.n_sites();
        NetworkFile {
            units: h.units(),
            n_sites: n,
            energies: h.energies().to_vec(),
            couplings: (0..n)
                .map(|i| (0..n).map(|j| h.couplings()[(i, j)]).collect())
                .collect(),
            labels: h.labels().map(<[String]>::to_vec),
            sink: None,
            source: None,
            provenance: None,
        }
    }

    pub fn hamiltonian(&self) -> Result<NetworkHamiltonian> {
        let n = self.n_sites;
        if self.energies.len() != n {
            return Err(Error::dims(n, self.energies.len()));
        }
        if self.couplings.len() != n || self.couplings.iter().any(|r| r.len() != n) {
            return Err(Error::Format(format!(
                "couplings must be a full {n}×{n} matrix"
            )));
        }
        let c = DMatrix::from_fn(n, n, |i, j| self.couplings[i][j]);
        let h = NetworkHamiltonian::new(self.energies.clone(), c, self.units)?;
        if let Some(site) = self.source {
            crate::model::site_offset(site, n)?;
        }
        if let Some(sink) = &self.sink {
            crate::model::site_offset(sink.site, n)?;
            if !(sink.rate > 0.0) {
                return Err(Error::Validation("sink rate must be positive".into()));
            }
        }
        match &self.labels {
            Some(l) => h.with_labels(l.clone()),
            None => Ok(h),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network file serializes")
    }
}

pub fn parse_network(text: &str) -> Result<NetworkFile> {
    let file: NetworkFile =
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.hamiltonian()?;
    Ok(file)
}

/// Reads and validates a network JSON file.
pub fn load_network(path: impl AsRef<Path>) -> Result<NetworkHamiltonian> {
    let text = fs::read_to_string(path)?;
    parse_network(&text)?.hamiltonian()
}

pub fn save_network(h: &NetworkHamiltonian, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, NetworkFile::from_hamiltonian(h).to_json())?;
    Ok(())
}
