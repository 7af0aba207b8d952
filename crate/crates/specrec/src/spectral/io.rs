//! Dataset file format: a one-line JSON header followed by a CSV body, one
//! row per eigenvalue: `j, lambda_j, trace values...`. Floats are written in
//! shortest round-trip form, so write-then-read is bit-exact.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundaryMesh;
use crate::spectral::{DatasetSource, SpectralDataset};

pub const DATASET_SCHEMA: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    schema: u32,
    source: DatasetSource,
    cutoff: f64,
    mesh_hash: String,
    /// The boundary metric (mesh weights) is assumed known to the inversion.
    boundary_metric_known: bool,
    mesh: BoundaryMesh,
    n_pairs: usize,
}

pub fn write_dataset<W: Write>(d: &SpectralDataset, mut w: W) -> Result<()> {
    let header = Header {
        schema: DATASET_SCHEMA,
        source: d.source,
        cutoff: d.cutoff,
        mesh_hash: d.mesh.content_hash(),
        boundary_metric_known: true,
        mesh: d.mesh.clone(),
        n_pairs: d.len(),
    };
    let hjson = serde_json::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(w, "{hjson}")?;
    for (j, (l, t)) in d.eigenvalues.iter().zip(&d.traces).enumerate() {
        write!(w, "{},{}", j + 1, l)?;
        for x in t {
            write!(w, ",{x}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_dataset<R: Read>(r: R) -> Result<SpectralDataset> {
    let mut lines = BufReader::new(r).lines();
    let hline = lines
        .next()
        .ok_or_else(|| Error::Format("empty dataset file".into()))??;
    let header: Header =
        serde_json::from_str(&hline).map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if header.schema != DATASET_SCHEMA {
        return Err(Error::Format(format!("unknown schema {}", header.schema)));
    }
    if header.mesh.content_hash() != header.mesh_hash {
        return Err(Error::Format("mesh hash mismatch".into()));
    }
    let mut eigenvalues = Vec::with_capacity(header.n_pairs);
    let mut traces = Vec::with_capacity(header.n_pairs);
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let j: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad row index on line {}", row + 2)))?;
        if j != row + 1 {
            return Err(Error::Format(format!("row index {j} out of order")));
        }
        let lambda: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad eigenvalue on line {}", row + 2)))?;
        let trace: std::result::Result<Vec<f64>, _> = it.map(|s| s.parse::<f64>()).collect();
        let trace = trace.map_err(|e| Error::Format(e.to_string()))?;
        eigenvalues.push(lambda);
        traces.push(trace);
    }
    if eigenvalues.len() != header.n_pairs {
        return Err(Error::Format(format!(
            "{} rows vs {} declared",
            eigenvalues.len(),
            header.n_pairs
        )));
    }
    SpectralDataset::new(header.source, header.mesh, header.cutoff, eigenvalues, traces)
}
