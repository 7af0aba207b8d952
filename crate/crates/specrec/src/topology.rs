//! Closeness of two boundary spectral datasets: cluster the merged
//! eigenvalue list into narrow disjoint intervals with matching
//! cardinalities, then orthogonally align the trace blocks cluster by
//! cluster. The smallest feasible closeness parameter is found by bisection.

use nalgebra::DMatrix;

use crate::error::{ClosenessCondition, Error, Result};
use crate::geometry::BoundaryMesh;
use crate::spectral::SpectralDataset;

/// A system of disjoint open intervals covering the low eigenvalues of both
/// datasets, with matching per-interval cardinalities.
#[derive(Debug, Clone)]
pub struct ClusterPartition {
    pub delta: f64,
    /// Open intervals `(a_p, b_p)`, ascending, disjoint, width < delta,
    /// contained in `(-1/delta - delta, 1/delta + delta)`.
    pub intervals: Vec<(f64, f64)>,
    /// Indices of dataset 1 eigenvalues in each interval.
    pub members1: Vec<Vec<usize>>,
    /// Indices of dataset 2 eigenvalues in each interval.
    pub members2: Vec<Vec<usize>>,
}

impl ClusterPartition {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Common cardinality of interval `p`.
    pub fn n_p(&self, p: usize) -> usize {
        self.members1[p].len()
    }
}

/// Alignment of one cluster's trace blocks.
#[derive(Debug, Clone)]
pub struct AlignmentEntry {
    /// Real-orthogonal matrix applied to block 1.
    pub u: DMatrix<f64>,
    /// `|| U Psi_1 - Psi_2 ||` in the block L2 norm on the boundary.
    pub residual: f64,
    /// False when the cross-Gram matrix is rank-deficient and the minimizer
    /// is not unique.
    pub unique: bool,
}

/// Greedy clustering of the two eigenvalue lists at closeness `delta`:
/// sort the merged list below the admissible bound, cut at gaps of at least
/// `delta`, split wide blocks at their largest interior gap, and check
/// coverage and cardinality.
pub fn cluster_eigenvalues(
    d1: &SpectralDataset,
    d2: &SpectralDataset,
    delta: f64,
) -> Result<ClusterPartition> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("delta = {delta}")));
    }
    check_common_mesh(d1, d2)?;
    let delta_inv = 1.0 / delta;
    let hi_bound = delta_inv + delta;
    // (value, dataset tag, index); only values that could lie in an interval.
    let mut vals: Vec<(f64, u8, usize)> = Vec::new();
    for (j, &l) in d1.eigenvalues.iter().enumerate() {
        if l < hi_bound {
            vals.push((l, 1, j));
        }
    }
    for (j, &l) in d2.eigenvalues.iter().enumerate() {
        if l < hi_bound {
            vals.push((l, 2, j));
        }
    }
    vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Gap cut, then recursive largest-gap splitting of overwide blocks.
    let gap_cut = delta * (1.0 - 1e-6);
    let mut blocks: Vec<(usize, usize)> = Vec::new(); // half-open index ranges
    let mut start = 0usize;
    for i in 1..vals.len() {
        if vals[i].0 - vals[i - 1].0 >= gap_cut {
            blocks.push((start, i));
            start = i;
        }
    }
    if !vals.is_empty() {
        blocks.push((start, vals.len()));
    }
    let mut queue = blocks;
    let mut final_blocks = Vec::new();
    while let Some((a, b)) = queue.pop() {
        let width = vals[b - 1].0 - vals[a].0;
        if width < delta * (1.0 - 1e-12) || b - a == 1 {
            final_blocks.push((a, b));
            continue;
        }
        // Split at the largest interior gap.
        let mut cut = a + 1;
        let mut best = -1.0;
        for i in a + 1..b {
            let g = vals[i].0 - vals[i - 1].0;
            if g > best {
                best = g;
                cut = i;
            }
        }
        queue.push((a, cut));
        queue.push((cut, b));
    }
    final_blocks.sort();

    let mut intervals = Vec::new();
    let mut members1 = Vec::new();
    let mut members2 = Vec::new();
    for (bi, &(a, b)) in final_blocks.iter().enumerate() {
        let lo = vals[a].0;
        let mandatory = vals[a..b].iter().any(|v| v.0 < delta_inv);
        let count = |r: &[(f64, u8, usize)], tag: u8| r.iter().filter(|v| v.1 == tag).count();
        let mut end = b;
        if count(&vals[a..b], 1) != count(&vals[a..b], 2) {
            if !mandatory {
                // Purely optional block (all values >= 1/delta): skip it.
                continue;
            }
            // Optional values (>= 1/delta) need no coverage, so a trailing
            // run of them may be shaved off the block to repair the
            // cardinality match; keep the longest prefix that matches.
            end = a;
            for c in (a + 1..b).rev() {
                if vals[c].0 < delta_inv {
                    break;
                }
                if count(&vals[a..c], 1) == count(&vals[a..c], 2)
                    && vals[c - 1].0 - lo < delta * (1.0 - 1e-12)
                {
                    end = c;
                    break;
                }
            }
            if end == a {
                return Err(Error::Infeasible {
                    condition: ClosenessCondition::Cardinality,
                });
            }
        }
        let hi = vals[end - 1].0;
        let m1: Vec<usize> = vals[a..end].iter().filter(|v| v.1 == 1).map(|v| v.2).collect();
        let m2: Vec<usize> = vals[a..end].iter().filter(|v| v.1 == 2).map(|v| v.2).collect();
        if m1.is_empty() {
            continue;
        }
        // Interval margins: a quarter of the slack, limited by neighbors
        // and the admissible bound.
        let slack = delta - (hi - lo);
        if slack <= 0.0 {
            return Err(Error::Infeasible {
                condition: ClosenessCondition::IntervalWidth,
            });
        }
        let mut margin = slack / 4.0;
        if bi > 0 {
            let prev_hi = vals[final_blocks[bi - 1].1 - 1].0;
            margin = margin.min((lo - prev_hi) / 3.0);
        }
        if end < b {
            // The interval must stop short of the shaved-off optional values.
            margin = margin.min((vals[end].0 - hi) / 3.0);
        } else if bi + 1 < final_blocks.len() {
            let next_lo = vals[final_blocks[bi + 1].0].0;
            margin = margin.min((next_lo - hi) / 3.0);
        }
        margin = margin.max(0.0);
        let a_p = (lo - margin).max(-delta_inv - delta);
        let b_p = (hi + margin).min(delta_inv + delta);
        if !(a_p < lo + f64::EPSILON && hi <= b_p) || b_p - a_p >= delta {
            return Err(Error::Infeasible {
                condition: ClosenessCondition::Coverage,
            });
        }
        intervals.push((a_p, b_p));
        members1.push(m1);
        members2.push(m2);
    }
    // Coverage check: every eigenvalue below 1/delta must be in an interval.
    let covered = |l: f64| intervals.iter().any(|&(a, b)| a < l && l < b);
    for &l in d1.eigenvalues.iter().chain(&d2.eigenvalues) {
        if l < delta_inv && !covered(l) {
            return Err(Error::Infeasible {
                condition: ClosenessCondition::Coverage,
            });
        }
    }
    Ok(ClusterPartition {
        delta,
        intervals,
        members1,
        members2,
    })
}

/// Best real-orthogonal alignment of two equal-size trace blocks in the
/// weighted boundary L2 norm (orthogonal Procrustes via SVD of the
/// cross-Gram matrix).
pub fn optimal_unitary_alignment(
    block1: &[Vec<f64>],
    block2: &[Vec<f64>],
    mesh: &BoundaryMesh,
) -> Result<AlignmentEntry> {
    let n = block1.len();
    if n == 0 || block2.len() != n {
        return Err(Error::InvalidInput(format!(
            "block sizes {} vs {}",
            block1.len(),
            block2.len()
        )));
    }
    for t in block1.iter().chain(block2) {
        if t.len() != mesh.len() {
            return Err(Error::InvalidInput("trace length vs mesh size".into()));
        }
    }
    // m[a][b] = <psi2_a, psi1_b>.
    let m = DMatrix::from_fn(n, n, |a, b| mesh.inner(&block2[a], &block1[b]));
    let svd = m.clone().svd(true, true);
    let a = svd.u.as_ref().unwrap();
    let bt = svd.v_t.as_ref().unwrap();
    let u = a * bt;
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let unique = smin > 1e-10 * smax.max(1.0);
    let norm1: f64 = block1.iter().map(|t| mesh.inner(t, t)).sum();
    let norm2: f64 = block2.iter().map(|t| mesh.inner(t, t)).sum();
    let trace_sigma: f64 = svd.singular_values.iter().sum();
    let residual = (norm1 + norm2 - 2.0 * trace_sigma).max(0.0).sqrt();
    Ok(AlignmentEntry { u, residual, unique })
}

/// Per-cluster alignments of a partition; entry `p` aligns the traces of
/// `members1[p]` to those of `members2[p]`.
pub fn align_partition(
    d1: &SpectralDataset,
    d2: &SpectralDataset,
    part: &ClusterPartition,
) -> Result<Vec<AlignmentEntry>> {
    (0..part.len())
        .map(|p| {
            let b1: Vec<Vec<f64>> = part.members1[p].iter().map(|&j| d1.traces[j].clone()).collect();
            let b2: Vec<Vec<f64>> = part.members2[p].iter().map(|&j| d2.traces[j].clone()).collect();
            optimal_unitary_alignment(&b1, &b2, &d1.mesh)
        })
        .collect()
}

/// Is the pair delta-close: clustering feasible and every cluster alignable
/// within `delta`.
pub fn close_at(d1: &SpectralDataset, d2: &SpectralDataset, delta: f64) -> Result<bool> {
    match cluster_eigenvalues(d1, d2, delta) {
        Err(Error::Infeasible { .. }) => Ok(false),
        Err(e) => Err(e),
        Ok(part) => {
            let aligns = align_partition(d1, d2, &part)?;
            Ok(aligns.iter().all(|a| a.residual <= delta))
        }
    }
}

/// Options for [`spectral_distance`].
#[derive(Debug, Clone, Copy)]
pub struct DistanceOpts {
    /// Absolute bisection tolerance.
    pub tol: f64,
    /// Upper end of the bisection bracket; `None` = 1 + the largest
    /// eigenvalue gap of either dataset.
    pub delta_hi: Option<f64>,
}

impl Default for DistanceOpts {
    fn default() -> Self {
        DistanceOpts {
            tol: 1e-4,
            delta_hi: None,
        }
    }
}

/// Smallest feasible closeness parameter found by bisection with the greedy
/// clustering (an upper bound on the true infimum); `+inf` when even the
/// upper bracket is infeasible.
pub fn spectral_distance(
    d1: &SpectralDataset,
    d2: &SpectralDataset,
    opts: DistanceOpts,
) -> Result<f64> {
    check_common_mesh(d1, d2)?;
    let max_gap = |d: &SpectralDataset| -> f64 {
        d.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0_f64, f64::max)
    };
    let hi0 = opts
        .delta_hi
        .unwrap_or_else(|| 1.0 + max_gap(d1).max(max_gap(d2)));
    if !close_at(d1, d2, hi0)? {
        return Ok(f64::INFINITY);
    }
    let mut lo = 0.0;
    let mut hi = hi0;
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if close_at(d1, d2, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Datasets are comparable when their meshes carry the same quadrature
/// structure: node-for-node identical weights and components. Node
/// coordinates may differ (the comparison identifies boundaries node by
/// node, e.g. the two endpoint meshes of intervals of different lengths).
fn check_common_mesh(d1: &SpectralDataset, d2: &SpectralDataset) -> Result<()> {
    let (a, b) = (&d1.mesh, &d2.mesh);
    let compatible = a.len() == b.len()
        && a.nodes.iter().zip(&b.nodes).all(|(x, y)| {
            x.component == y.component && (x.weight - y.weight).abs() <= 1e-9 * x.weight.abs()
        });
    if !compatible {
        return Err(Error::InvalidInput(
            "datasets sampled on incompatible boundary meshes".into(),
        ));
    }
    Ok(())
}
