//! Distance nets: volumes of shell domains by set algebra over the wave
//! domains of influence, and the resulting finite set `R*` of
//! piecewise-constant approximate boundary distance functions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::control::{approx_volume, BoundaryPartition, ControlParams, MultiIndex};
use crate::error::{Error, Result};
use crate::geometry::{true_distance, BoundaryMesh, ModelManifold, Point};
use crate::spectral::SpectralDataset;

/// Default cap on the part count for shell-volume expansion, which costs
/// `2^L` ball volumes per shell.
pub const L_MAX_DEFAULT: usize = 8;

/// Hard cap on the shell enumeration lattice in [`build_distance_net`].
const LATTICE_MAX: usize = 2_000_000;

/// Multi-index of a shell domain `M_beta* = {x : d(x, Gamma_l) in
/// ((beta_l - 2) eta, (beta_l + 2) eta) for all l}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SliceIndex {
    pub beta: Vec<usize>,
}

impl SliceIndex {
    pub fn new(beta: Vec<usize>) -> Self {
        SliceIndex { beta }
    }

    pub fn validate(&self, p: &BoundaryPartition, d_time: f64) -> Result<()> {
        if self.beta.len() != p.len() {
            return Err(Error::InvalidInput(format!(
                "slice index length {} vs {} parts",
                self.beta.len(),
                p.len()
            )));
        }
        for &b in &self.beta {
            if b as f64 * p.eta > d_time + 2.0 * p.eta + 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "beta_l = {b} puts the shell beyond reach at eta = {}",
                    p.eta
                )));
            }
        }
        Ok(())
    }
}

/// A piecewise-constant approximate boundary distance function
/// `r_beta(z) = beta_l eta` for `z` in part `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceFunction {
    pub beta: SliceIndex,
    pub values: Vec<f64>,
}

impl DistanceFunction {
    pub fn from_beta(beta: SliceIndex, eta: f64) -> Self {
        let values = beta.beta.iter().map(|&b| b as f64 * eta).collect();
        DistanceFunction { beta, values }
    }

    /// Sup-norm distance to another per-part function on the same partition.
    pub fn sup_distance(&self, other: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The finite net of retained distance functions, with the parameters that
/// produced it. `partition` lists the mesh node indices of each part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceNet {
    pub eta: f64,
    pub sigma: f64,
    pub partition: Vec<Vec<usize>>,
    pub members: Vec<DistanceFunction>,
}

impl DistanceNet {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("net serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("bad net JSON: {e}")))
    }
}

/// Memoized evaluator of ball-union volumes `vol^a(M_gamma)`, shared across
/// a shell lattice.
pub struct VolumeTable<'a> {
    d: &'a SpectralDataset,
    p: &'a BoundaryPartition,
    params: ControlParams,
    d_time: f64,
    /// Largest per-part window count expressible with observation time `D`.
    cap: usize,
    pub l_max: usize,
    memo: HashMap<Vec<usize>, f64>,
}

impl<'a> VolumeTable<'a> {
    pub fn new(
        d: &'a SpectralDataset,
        p: &'a BoundaryPartition,
        params: ControlParams,
        d_time: f64,
    ) -> Result<Self> {
        params.validate(d.len())?;
        if !(d_time > 0.0) {
            return Err(Error::InvalidInput(format!("D = {d_time}")));
        }
        Ok(VolumeTable {
            d,
            p,
            params,
            d_time,
            cap: (d_time / p.eta * (1.0 + 1e-9)).floor() as usize,
            l_max: L_MAX_DEFAULT,
            memo: HashMap::new(),
        })
    }

    /// Window counts above the cap are clamped: with `cap * eta >= the
    /// part's reach` the ball has already saturated, so this is exact.
    pub fn ball_volume(&mut self, gamma: &[usize]) -> Result<f64> {
        let key: Vec<usize> = gamma.iter().map(|&g| g.min(self.cap)).collect();
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = approx_volume(
            self.d,
            self.p,
            &MultiIndex::new(key.clone()),
            &self.params,
            self.d_time,
        )?;
        self.memo.insert(key, v);
        Ok(v)
    }

    /// Volume of the shell `M_beta*` by indicator algebra: writing the shell
    /// as an intersection of ball differences and expanding, every union of
    /// balls collapses to a single multi-index by the max rule, leaving
    /// `2^L` signed ball volumes.
    pub fn slice_volume(&mut self, beta: &SliceIndex) -> Result<f64> {
        beta.validate(self.p, self.d_time)?;
        let l = beta.beta.len();
        if l > self.l_max {
            return Err(Error::ComplexityGuard {
                parts: l,
                max: self.l_max,
            });
        }
        let a: Vec<usize> = beta.beta.iter().map(|&b| (b + 2).min(self.cap)).collect();
        let b: Vec<usize> = beta
            .beta
            .iter()
            .map(|&x| x.saturating_sub(2).min(self.cap))
            .collect();
        if a.iter().zip(&b).any(|(x, y)| x == y) {
            return Ok(0.0);
        }
        let mut acc = 0.0;
        let sign_base = if (l + 1) % 2 == 0 { 1.0 } else { -1.0 };
        for t in 0..(1usize << l) {
            let gamma: Vec<usize> = (0..l)
                .map(|i| if t >> i & 1 == 1 { b[i] } else { a[i] })
                .collect();
            let sign = sign_base * if t.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * self.ball_volume(&gamma)?;
        }
        Ok(acc.max(0.0))
    }
}

/// One-shot convenience wrapper around [`VolumeTable::slice_volume`].
pub fn slice_volume(
    d: &SpectralDataset,
    beta: &SliceIndex,
    p: &BoundaryPartition,
    params: &ControlParams,
    d_time: f64,
) -> Result<f64> {
    VolumeTable::new(d, p, *params, d_time)?.slice_volume(beta)
}

/// Enumerate the shell lattice in lexicographic order and retain every
/// `beta` whose estimated shell volume reaches `sigma`.
pub fn build_distance_net(
    d: &SpectralDataset,
    p: &BoundaryPartition,
    params: &ControlParams,
    d_time: f64,
    sigma: f64,
) -> Result<DistanceNet> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput(format!("sigma = {sigma}")));
    }
    let mut table = VolumeTable::new(d, p, *params, d_time)?;
    let l = p.len();
    if l > table.l_max {
        return Err(Error::ComplexityGuard {
            parts: l,
            max: table.l_max,
        });
    }
    let beta_max = table.cap + 2;
    let lattice = (beta_max + 1).checked_pow(l as u32).unwrap_or(usize::MAX);
    if lattice > LATTICE_MAX {
        return Err(Error::SizeLimit(format!(
            "shell lattice has {lattice} points (cap {LATTICE_MAX})"
        )));
    }
    // Pruning bound: the shell is contained in each enclosing ball
    // M(Gamma_l, (beta_l + 2) eta), so a component whose single ball is
    // already below sigma kills every beta using it.
    let mut component_ok = vec![vec![true; beta_max + 1]; l];
    for li in 0..l {
        for b in 0..=beta_max {
            let mut gamma = vec![0usize; l];
            gamma[li] = b + 2;
            component_ok[li][b] = table.ball_volume(&gamma)? >= sigma;
        }
    }
    let mut members = Vec::new();
    let mut beta = vec![0usize; l];
    'outer: loop {
        if (0..l).all(|li| component_ok[li][beta[li]]) {
            let idx = SliceIndex::new(beta.clone());
            if table.slice_volume(&idx)? >= sigma {
                members.push(DistanceFunction::from_beta(idx, p.eta));
            }
        }
        // Lexicographic increment.
        for li in (0..l).rev() {
            if beta[li] < beta_max {
                beta[li] += 1;
                continue 'outer;
            }
            beta[li] = 0;
        }
        break;
    }
    Ok(DistanceNet {
        eta: p.eta,
        sigma,
        partition: p.parts.clone(),
        members,
    })
}

/// True per-part boundary distance profile of an interior point: for each
/// part, the distance to the nearest of its mesh nodes.
pub fn true_profile(
    m: &ModelManifold,
    mesh: &BoundaryMesh,
    partition: &[Vec<usize>],
    x: Point,
) -> Result<Vec<f64>> {
    partition
        .iter()
        .map(|part| {
            let mut d = f64::INFINITY;
            for &z in part {
                d = d.min(true_distance(m, x, mesh.nodes[z].point)?);
            }
            Ok(d)
        })
        .collect()
}

/// Two-sided Hausdorff distance, in sup-norm over boundary parts, between
/// the net members and the true distance profiles of a probe sample.
pub fn hausdorff_to_truth(
    net: &DistanceNet,
    m: &ModelManifold,
    mesh: &BoundaryMesh,
    probe: &[Point],
) -> Result<f64> {
    if net.members.is_empty() || probe.is_empty() {
        return Err(Error::InvalidInput(
            "Hausdorff distance needs nonempty net and probe".into(),
        ));
    }
    let profiles: Vec<Vec<f64>> = probe
        .iter()
        .map(|&x| true_profile(m, mesh, &net.partition, x))
        .collect::<Result<_>>()?;
    let mut net_to_truth = 0.0_f64;
    for r in &net.members {
        let nearest = profiles
            .iter()
            .map(|p| r.sup_distance(p))
            .fold(f64::INFINITY, f64::min);
        net_to_truth = net_to_truth.max(nearest);
    }
    let mut truth_to_net = 0.0_f64;
    for p in &profiles {
        let nearest = net
            .members
            .iter()
            .map(|r| r.sup_distance(p))
            .fold(f64::INFINITY, f64::min);
        truth_to_net = truth_to_net.max(nearest);
    }
    Ok(net_to_truth.max(truth_to_net))
}
