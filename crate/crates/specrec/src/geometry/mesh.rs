use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::manifold::{ModelManifold, Point, ANNULUS_R_IN, ANNULUS_R_OUT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryNode {
    pub point: Point,
    /// Quadrature weight (length element); counting measure in 1D.
    pub weight: f64,
    pub component: usize,
    /// Arc-length coordinate along the component, in the boundary metric.
    pub arc: f64,
}

/// Quadrature mesh on the boundary of a model manifold. Nodes are ordered
/// along each boundary component; weights sum to the boundary measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMesh {
    pub nodes: Vec<BoundaryNode>,
    /// Total arc length of each closed component (0 for point components).
    pub component_lengths: Vec<f64>,
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.weight).collect()
    }

    /// Weighted L2(boundary) inner product of two node-sampled functions.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), self.len());
        assert_eq!(b.len(), self.len());
        self.nodes
            .iter()
            .zip(a.iter().zip(b))
            .map(|(n, (&x, &y))| n.weight * x * y)
            .sum()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).sqrt()
    }

    /// Distance along the boundary between two nodes; infinite across
    /// components.
    pub fn boundary_distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.nodes[i], &self.nodes[j]);
        if a.component != b.component {
            return f64::INFINITY;
        }
        let len = self.component_lengths[a.component];
        let gap = (a.arc - b.arc).abs();
        if len > 0.0 {
            gap.min(len - gap)
        } else {
            gap
        }
    }

    /// Content hash of the mesh, used to pin datasets to the mesh they were
    /// sampled on.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for n in &self.nodes {
            h.update(n.point.u.to_bits().to_le_bytes());
            h.update(n.point.v.to_bits().to_le_bytes());
            h.update(n.weight.to_bits().to_le_bytes());
            h.update((n.component as u64).to_le_bytes());
        }
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// CSV export: node_id, u, v, weight, component_id.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "node_id,u,v,weight,component_id")?;
        for (i, n) in self.nodes.iter().enumerate() {
            writeln!(
                w,
                "{i},{},{},{},{}",
                n.point.u, n.point.v, n.weight, n.component
            )?;
        }
        Ok(())
    }
}

/// Build a boundary quadrature mesh with node spacing at most `h` on each
/// component. The 1D boundary consists of two point nodes with counting
/// weights; `h` is ignored there.
pub fn build_boundary_mesh(m: &ModelManifold, h: f64) -> Result<BoundaryMesh> {
    m.validate()?;
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("nonpositive mesh spacing {h}")));
    }
    match *m {
        ModelManifold::Interval { length } => Ok(BoundaryMesh {
            nodes: vec![
                BoundaryNode {
                    point: Point::on_interval(0.0),
                    weight: 1.0,
                    component: 0,
                    arc: 0.0,
                },
                BoundaryNode {
                    point: Point::on_interval(length),
                    weight: 1.0,
                    component: 1,
                    arc: 0.0,
                },
            ],
            component_lengths: vec![0.0, 0.0],
        }),
        ModelManifold::Rectangle { lx, ly } => {
            let perimeter = 2.0 * (lx + ly);
            if h >= perimeter {
                return Err(Error::InvalidInput(format!(
                    "spacing {h} not smaller than perimeter {perimeter}"
                )));
            }
            // Sides in order: bottom, right, top, left; midpoint nodes.
            let mut nodes = Vec::new();
            let mut arc0 = 0.0;
            let sides: [(f64, Box<dyn Fn(f64) -> Point>); 4] = [
                (lx, Box::new(move |s| Point::xy(s, 0.0))),
                (ly, Box::new(move |s| Point::xy(lx, s))),
                (lx, Box::new(move |s| Point::xy(lx - s, ly))),
                (ly, Box::new(move |s| Point::xy(0.0, ly - s))),
            ];
            for (side_len, param) in sides.iter() {
                let n = (side_len / h).ceil() as usize;
                let ds = side_len / n as f64;
                for k in 0..n {
                    let s = (k as f64 + 0.5) * ds;
                    nodes.push(BoundaryNode {
                        point: param(s),
                        weight: ds,
                        component: 0,
                        arc: arc0 + s,
                    });
                }
                arc0 += side_len;
            }
            Ok(BoundaryMesh {
                nodes,
                component_lengths: vec![perimeter],
            })
        }
        ModelManifold::WarpedAnnulus { .. } => {
            // chi vanishes at the boundary radii, so the boundary circles
            // carry the flat metric: lengths 2*pi*r_in and 2*pi*r_out.
            let mut nodes = Vec::new();
            let mut component_lengths = Vec::new();
            for (comp, r) in [(0usize, ANNULUS_R_IN), (1usize, ANNULUS_R_OUT)] {
                let circ = 2.0 * std::f64::consts::PI * r;
                if h >= circ {
                    return Err(Error::InvalidInput(format!(
                        "spacing {h} not smaller than boundary circle length {circ}"
                    )));
                }
                let n = (circ / h).ceil() as usize;
                let dtheta = 2.0 * std::f64::consts::PI / n as f64;
                for k in 0..n {
                    let theta = (k as f64 + 0.5) * dtheta;
                    nodes.push(BoundaryNode {
                        point: Point::polar(r, theta),
                        weight: r * dtheta,
                        component: comp,
                        arc: r * theta,
                    });
                }
                component_lengths.push(circ);
            }
            Ok(BoundaryMesh {
                nodes,
                component_lengths,
            })
        }
    }
}
