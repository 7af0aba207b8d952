//! From a distance net to a finite metric space: aligned-pair sup-norm
//! distances, Euclidean comparison triangles, the near-boundary Pythagorean
//! formula, and shortest-path completion.

use crate::dnet::{DistanceFunction, DistanceNet};
use crate::error::{Error, Result};
use crate::geometry::BoundaryMesh;
use crate::metric::FiniteMetricSpace;

/// A net member with its index in the reconstruction.
#[derive(Debug, Clone)]
pub struct NetPoint {
    pub id: usize,
    pub r: DistanceFunction,
}

/// Which estimator produced a direct edge. Order is the audit priority used
/// to break exact ties between duplicate edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeMethod {
    Aligned,
    NearBoundary,
    Triangle,
}

/// A direct (pre-completion) distance estimate between two net points.
#[derive(Debug, Clone)]
pub struct EdgeEstimate {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub method: EdgeMethod,
    /// A priori error scale of the estimator that produced the value.
    pub quality: f64,
}

/// Pairwise boundary distances between partition parts: between designated
/// representative nodes (for the Pythagorean formula) and between nearest
/// nodes (for adjacency tests). Infinite across boundary components.
#[derive(Debug, Clone)]
pub struct PartGeometry {
    pub rep_dist: Vec<Vec<f64>>,
    pub min_dist: Vec<Vec<f64>>,
}

/// Representative node of a part: the 1-center under boundary distance,
/// ties to the lowest index.
fn part_representative(mesh: &BoundaryMesh, part: &[usize]) -> usize {
    let mut best = part[0];
    let mut best_ecc = f64::INFINITY;
    for &i in part {
        let ecc = part
            .iter()
            .map(|&j| mesh.boundary_distance(i, j))
            .fold(0.0, f64::max);
        if ecc < best_ecc {
            best_ecc = ecc;
            best = i;
        }
    }
    best
}

pub fn part_geometry(mesh: &BoundaryMesh, partition: &[Vec<usize>]) -> Result<PartGeometry> {
    if partition.iter().any(|p| p.is_empty()) {
        return Err(Error::InvalidInput("empty partition part".into()));
    }
    let l = partition.len();
    let reps: Vec<usize> = partition
        .iter()
        .map(|p| part_representative(mesh, p))
        .collect();
    let mut rep_dist = vec![vec![0.0; l]; l];
    let mut min_dist = vec![vec![0.0; l]; l];
    for a in 0..l {
        for b in (a + 1)..l {
            let rd = mesh.boundary_distance(reps[a], reps[b]);
            let md = partition[a]
                .iter()
                .flat_map(|&i| partition[b].iter().map(move |&j| (i, j)))
                .map(|(i, j)| mesh.boundary_distance(i, j))
                .fold(f64::INFINITY, f64::min);
            rep_dist[a][b] = rd;
            rep_dist[b][a] = rd;
            min_dist[a][b] = md;
            min_dist[b][a] = md;
        }
    }
    Ok(PartGeometry { rep_dist, min_dist })
}

/// `d_inf(r_a, r_b)`: the sup-norm over boundary parts.
pub fn sup_norm_distance(a: &NetPoint, b: &NetPoint) -> Result<f64> {
    if a.r.values.len() != b.r.values.len() {
        return Err(Error::InvalidInput(format!(
            "partition mismatch: {} vs {} parts",
            a.r.values.len(),
            b.r.values.len()
        )));
    }
    Ok(a.r.sup_distance(&b.r.values))
}

/// Step 1: accept the sup-norm as the distance when the attainment pattern
/// is consistent with a common extended geodesic. Discrete test: the
/// difference keeps one sign on the parts adjacent (within `2 eta`) to the
/// sup-attaining part, and (for multi-part nets) the opposite sign comes
/// within `2 eta` of the sup somewhere, as it must when the geodesic exits
/// minimally at both ends.
pub fn aligned_pair_distance(
    a: &NetPoint,
    b: &NetPoint,
    geom: &PartGeometry,
    eta: f64,
) -> Result<Option<f64>> {
    let sup = sup_norm_distance(a, b)?;
    if sup == 0.0 {
        return Ok(Some(0.0));
    }
    let l = a.r.values.len();
    let diffs: Vec<f64> = (0..l).map(|i| a.r.values[i] - b.r.values[i]).collect();
    let l_star = (0..l)
        .max_by(|&x, &y| diffs[x].abs().partial_cmp(&diffs[y].abs()).unwrap())
        .unwrap();
    let s = diffs[l_star].signum();
    let tol = 1e-9 * (1.0 + sup);
    for li in 0..l {
        if geom.min_dist[l_star][li] <= 2.0 * eta && s * diffs[li] < -tol {
            return Ok(None);
        }
    }
    if l >= 2 {
        let opposite = diffs.iter().map(|&d| -s * d).fold(f64::NEG_INFINITY, f64::max);
        if opposite < sup - 2.0 * eta {
            return Ok(None);
        }
    }
    Ok(Some(sup))
}

/// Step 2: Euclidean comparison triangle. Sides `d31 = d(y3,y1)`,
/// `d32 = d(y3,y2)`, `d12 = d(y1,y2)`; `x1` sits on side `[y3,y1]` at
/// distance `off1` from `y3`, `x2` on `[y3,y2]` at `off2`. Returns the
/// planar distance between the placed points.
pub fn triangle_distance(d31: f64, d32: f64, d12: f64, off1: f64, off2: f64) -> Result<f64> {
    let sides = [d31, d32, d12];
    if sides.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::DegenerateTriangle(format!(
            "nonpositive side in {sides:?}"
        )));
    }
    let slack = 1e-9 * (d31 + d32 + d12);
    if d31 + d32 < d12 - slack || d31 + d12 < d32 - slack || d32 + d12 < d31 - slack {
        return Err(Error::DegenerateTriangle(format!(
            "sides {sides:?} violate the triangle inequality"
        )));
    }
    if !(0.0..=d31 + slack).contains(&off1) || !(0.0..=d32 + slack).contains(&off2) {
        return Err(Error::InvalidInput(format!(
            "offsets ({off1}, {off2}) outside sides ({d31}, {d32})"
        )));
    }
    let cos = ((d31 * d31 + d32 * d32 - d12 * d12) / (2.0 * d31 * d32)).clamp(-1.0, 1.0);
    Ok((off1 * off1 + off2 * off2 - 2.0 * off1 * off2 * cos)
        .max(0.0)
        .sqrt())
}

/// Step 4: Pythagorean estimate for two near-boundary points through their
/// closest parts. Rejects points deeper than `eta_near`.
pub fn near_boundary_distance(
    a: &NetPoint,
    b: &NetPoint,
    geom: &PartGeometry,
    eta_near: f64,
) -> Result<f64> {
    if a.r.values.len() != b.r.values.len() {
        return Err(Error::InvalidInput("partition mismatch".into()));
    }
    let argmin = |p: &NetPoint| -> (usize, f64) {
        let mut best = 0;
        for (i, &v) in p.r.values.iter().enumerate() {
            if v < p.r.values[best] {
                best = i;
            }
        }
        (best, p.r.values[best])
    };
    let (za, da) = argmin(a);
    let (zb, db) = argmin(b);
    if da > eta_near || db > eta_near {
        return Err(Error::InvalidInput(format!(
            "depths ({da}, {db}) exceed eta_near = {eta_near}"
        )));
    }
    let along = geom.rep_dist[za][zb];
    if !along.is_finite() {
        return Err(Error::InvalidInput(
            "footpoints on different boundary components".into(),
        ));
    }
    Ok((along * along + (da - db) * (da - db)).sqrt())
}

/// Step 5: all-pairs shortest paths over the symmetrized edge graph.
/// Duplicate edges resolve to the minimum value, exact ties to the
/// higher-priority method.
pub fn complete_metric(n: usize, edges: &[EdgeEstimate]) -> Result<FiniteMetricSpace> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    let mut method = vec![vec![EdgeMethod::Triangle; n]; n];
    for e in edges {
        if e.i >= n || e.j >= n || e.i == e.j {
            return Err(Error::InvalidInput(format!(
                "bad edge ({}, {}) for {n} points",
                e.i, e.j
            )));
        }
        if !(e.value >= 0.0) {
            return Err(Error::InvalidInput(format!("negative edge {}", e.value)));
        }
        let better = e.value < d[e.i][e.j]
            || (e.value == d[e.i][e.j] && e.method < method[e.i][e.j]);
        if better {
            d[e.i][e.j] = e.value;
            d[e.j][e.i] = e.value;
            method[e.i][e.j] = e.method;
            method[e.j][e.i] = e.method;
        }
    }
    for k in 0..n {
        let rowk = d[k].clone();
        for i in 0..n {
            let dik = d[i][k];
            if !dik.is_finite() {
                continue;
            }
            let ri = &mut d[i][..n];
            for j in 0..n {
                let via = dik + rowk[j];
                if via < ri[j] {
                    ri[j] = via;
                }
            }
        }
    }
    if d.iter().flatten().any(|x| !x.is_finite()) {
        // Count connected components for the error report.
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            for (i, c) in comp.iter_mut().enumerate() {
                if d[start][i].is_finite() {
                    *c = count;
                }
            }
            count += 1;
        }
        return Err(Error::DisconnectedNet { components: count });
    }
    let labels = (0..n).map(|i| i.to_string()).collect();
    FiniteMetricSpace::new(labels, d)
}

/// Tunables of [`reconstruct`]; `None` fields fall back to multiples of the
/// net scale (`rho = 3 eta`, `eta_near = 3 eta`, collinearity slack
/// `eta / 2`).
#[derive(Debug, Clone, Copy, Default)]
pub struct ReconstructConfig {
    pub rho: Option<f64>,
    pub eta_near: Option<f64>,
    pub collinear_tol: Option<f64>,
}

/// The reconstructed space with the per-edge audit of direct estimates.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub space: FiniteMetricSpace,
    pub edges: Vec<EdgeEstimate>,
}

/// Orchestrates the estimators: near-boundary pairs get the Pythagorean
/// edge, every pair gets the aligned edge when the alignment test passes,
/// remaining uncovered pairs are tried against comparison triangles built
/// from already-estimated edges, and shortest-path completion closes the
/// metric.
pub fn reconstruct(
    net: &DistanceNet,
    mesh: &BoundaryMesh,
    config: &ReconstructConfig,
) -> Result<Reconstruction> {
    if net.members.is_empty() {
        return Err(Error::InvalidInput("empty distance net".into()));
    }
    let eta = net.eta;
    let rho = config.rho.unwrap_or(3.0 * eta);
    let eta_near = config.eta_near.unwrap_or(3.0 * eta);
    let col_tol = config.collinear_tol.unwrap_or(0.5 * eta);
    let geom = part_geometry(mesh, &net.partition)?;
    let points: Vec<NetPoint> = net
        .members
        .iter()
        .enumerate()
        .map(|(id, r)| NetPoint { id, r: r.clone() })
        .collect();
    let n = points.len();
    if n == 1 {
        return Ok(Reconstruction {
            space: FiniteMetricSpace::new(vec!["0".into()], vec![vec![0.0]])?,
            edges: Vec::new(),
        });
    }
    let depth = |p: &NetPoint| p.r.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut edges: Vec<EdgeEstimate> = Vec::new();
    let mut direct = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut got = false;
            if depth(&points[i]) <= eta_near && depth(&points[j]) <= eta_near {
                if let Ok(v) = near_boundary_distance(&points[i], &points[j], &geom, eta_near) {
                    // The sup-norm lower-bounds the distance up to net
                    // error; flooring prevents shared-footpoint collapse.
                    let v = v.max(sup_norm_distance(&points[i], &points[j])?);
                    edges.push(EdgeEstimate {
                        i,
                        j,
                        value: v,
                        method: EdgeMethod::NearBoundary,
                        quality: eta * v + v * v,
                    });
                    direct[i][j] = direct[i][j].min(v);
                    direct[j][i] = direct[i][j];
                    got = true;
                }
            }
            if let Some(v) = aligned_pair_distance(&points[i], &points[j], &geom, eta)? {
                edges.push(EdgeEstimate {
                    i,
                    j,
                    value: v,
                    method: EdgeMethod::Aligned,
                    quality: 2.0 * eta,
                });
                direct[i][j] = direct[i][j].min(v);
                direct[j][i] = direct[i][j];
                got = true;
            }
            let _ = got;
        }
    }
    // Comparison triangles for pairs without a direct estimate: hinge y3
    // with known edges to both endpoints, extension points y1 beyond x1 and
    // y2 beyond x2 chosen collinear within tolerance and within rho.
    // Extension candidates are the rho-neighborhoods, precomputed once; a
    // per-pair work budget keeps the search from degenerating on large nets
    // (pairs it gives up on fall through to shortest-path completion).
    let near: Vec<Vec<usize>> = (0..n)
        .map(|p| {
            (0..n)
                .filter(|&e| e != p && direct[p][e].is_finite() && direct[p][e] <= rho)
                .collect()
        })
        .collect();
    let mut total_budget = 1_000_000_000usize;
    for p in 0..n {
        for q in (p + 1)..n {
            if direct[p][q].is_finite() {
                continue;
            }
            let mut budget = 20_000usize.min(total_budget);
            total_budget -= budget;
            'hinges: for c in 0..n {
                if budget == 0 {
                    break;
                }
                budget -= 1;
                if c == p || c == q {
                    continue;
                }
                let (dcp, dcq) = (direct[c][p], direct[c][q]);
                if !dcp.is_finite() || !dcq.is_finite() {
                    continue;
                }
                for &e1 in &near[p] {
                    if budget == 0 {
                        break 'hinges;
                    }
                    budget -= 1;
                    if e1 == q || e1 == c {
                        continue;
                    }
                    let (dce1, dpe1) = (direct[c][e1], direct[p][e1]);
                    if !dce1.is_finite() {
                        continue;
                    }
                    if (dce1 - dcp - dpe1).abs() > col_tol {
                        continue;
                    }
                    for &e2 in &near[q] {
                        if e2 == p || e2 == c || e2 == e1 {
                            continue;
                        }
                        if budget == 0 {
                            break 'hinges;
                        }
                        budget -= 1;
                        let (dce2, dqe2, de12) =
                            (direct[c][e2], direct[q][e2], direct[e1][e2]);
                        if !dce2.is_finite() || !de12.is_finite() {
                            continue;
                        }
                        if (dce2 - dcq - dqe2).abs() > col_tol {
                            continue;
                        }
                        if let Ok(v) = triangle_distance(dce1, dce2, de12, dcp, dcq) {
                            edges.push(EdgeEstimate {
                                i: p,
                                j: q,
                                value: v,
                                method: EdgeMethod::Triangle,
                                quality: rho * rho,
                            });
                            break 'hinges;
                        }
                    }
                }
            }
            // Return the unused slice of this pair's allowance to the pool.
            total_budget += budget;
        }
    }
    let space = complete_metric(n, &edges)?;
    Ok(Reconstruction { space, edges })
}
