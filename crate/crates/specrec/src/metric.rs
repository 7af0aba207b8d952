//! Finite metric spaces: the common output type of reconstruction and the
//! input type of Gromov-Hausdorff grading.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for triangle-inequality validation of stored distance matrices.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// A finite metric space given by an explicit distance matrix.
///
/// Construction validates the metric axioms: zero diagonal, exact symmetry,
/// nonnegativity and the triangle inequality to [`TRIANGLE_TOL`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        if labels.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} points",
                labels.len(),
                n
            )));
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MetricViolation("distance matrix not square".into()));
            }
            if dist[i][i] != 0.0 {
                return Err(Error::MetricViolation(format!("nonzero diagonal at {i}")));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::MetricViolation(format!("d[{i}][{j}] = {d}")));
                }
                if dist[j][i] != d {
                    return Err(Error::MetricViolation(format!("asymmetry at ({i},{j})")));
                }
            }
        }
        for i in 0..n {
            let ri = &dist[i][..n];
            for k in 0..n {
                let rk = &dist[k][..n];
                let dik = ri[k];
                for j in 0..n {
                    if ri[j] > dik + rk[j] + TRIANGLE_TOL {
                        return Err(Error::MetricViolation(format!(
                            "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                        )));
                    }
                }
            }
        }
        Ok(Self { labels, dist })
    }

    /// Build from a list of points and a symmetric pairwise distance function.
    pub fn from_points<T, F: FnMut(&T, &T) -> f64>(
        points: &[T],
        labels: Vec<String>,
        mut d: F,
    ) -> Result<Self> {
        let n = points.len();
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = d(&points[i], &points[j]);
                dist[i][j] = v;
                dist[j][i] = v;
            }
        }
        Self::new(labels, dist)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| self.dist[i][j])
    }

    pub fn diameter(&self) -> f64 {
        self.dist
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, &d| acc.max(d))
    }

    /// Max distance from point `i` to any other point.
    pub fn eccentricity(&self, i: usize) -> f64 {
        self.dist[i].iter().fold(0.0_f64, |acc, &d| acc.max(d))
    }

    /// Write as a headerless CSV distance matrix.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for row in &self.dist {
            let line: Vec<String> = row.iter().map(|d| format!("{d}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Read a headerless CSV distance matrix; labels default to row indices.
    pub fn from_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rows = Vec::new();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(r);
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Format(e.to_string()))?;
            let row: std::result::Result<Vec<f64>, _> =
                record.iter().map(|s| s.trim().parse::<f64>()).collect();
            rows.push(row.map_err(|e| Error::Format(e.to_string()))?);
        }
        let labels = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(labels, rows)
    }
}
