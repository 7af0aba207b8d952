//! Boundary spectral data: Neumann eigenvalues and boundary traces of the
//! corresponding orthonormal eigenfunctions, exact or perturbed.

mod forward;
mod io;
mod perturb;
pub mod sturm;

pub use forward::{compute_spectrum, disconnected_limit_spectrum};
pub use io::{read_dataset, write_dataset};
pub use perturb::{perturb_dataset, NoiseSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryMesh, ModelManifold};

/// What a dataset was generated from. The disconnected limit is the
/// degeneration endpoint of the warped annulus family: two flat annuli
/// `A(1,2)` and `A(3,4)`, free (Neumann) at the collapsed circles, traces
/// recorded on the two original boundary circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Model { manifold: ModelManifold },
    DisconnectedLimit,
}

/// Boundary spectral data: ascending eigenvalues with one trace vector per
/// eigenvalue, sampled on the nodes of a fixed boundary mesh.
///
/// The boundary metric (mesh weights) is treated as known; every dataset
/// header records this assumption.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralDataset {
    pub source: DatasetSource,
    pub mesh: BoundaryMesh,
    /// The lambda-threshold used at generation or truncation.
    pub cutoff: f64,
    pub eigenvalues: Vec<f64>,
    pub traces: Vec<Vec<f64>>,
}

impl SpectralDataset {
    pub fn new(
        source: DatasetSource,
        mesh: BoundaryMesh,
        cutoff: f64,
        eigenvalues: Vec<f64>,
        traces: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if eigenvalues.len() != traces.len() {
            return Err(Error::InvalidInput(format!(
                "{} eigenvalues vs {} traces",
                eigenvalues.len(),
                traces.len()
            )));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("eigenvalues not ascending".into()));
        }
        for t in &traces {
            if t.len() != mesh.len() {
                return Err(Error::InvalidInput(format!(
                    "trace length {} vs mesh size {}",
                    t.len(),
                    mesh.len()
                )));
            }
        }
        Ok(SpectralDataset {
            source,
            mesh,
            cutoff,
            eigenvalues,
            traces,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Indices grouped into multiplicity clusters: eigenvalues within
    /// `1e-6 * (1 + |lambda|)` of their neighbor share a cluster.
    pub fn multiplicity_clusters(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            match out.last_mut() {
                Some(c) if l - self.eigenvalues[*c.last().unwrap()] <= 1e-6 * (1.0 + l.abs()) => {
                    c.push(j)
                }
                _ => out.push(vec![j]),
            }
        }
        out
    }
}

/// Recover the manifold volume from the constant first trace:
/// `vol(M) = phi_1(z)^{-2}`. Fails if the first trace is not constant to
/// `1e-4` relative.
pub fn vol_from_phi1(d: &SpectralDataset) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::InvalidInput("empty dataset".into()));
    }
    if d.eigenvalues[0].abs() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "first eigenvalue {} not zero",
            d.eigenvalues[0]
        )));
    }
    let t = &d.traces[0];
    let mean: f64 = t.iter().sum::<f64>() / t.len() as f64;
    let dev = t.iter().fold(0.0_f64, |a, &x| a.max((x - mean).abs()));
    if dev > 1e-4 * mean.abs() {
        return Err(Error::InvalidInput(format!(
            "first trace varies over nodes: {dev:.3e} about mean {mean:.3e}"
        )));
    }
    Ok(1.0 / (mean * mean))
}
