//! Forward spectral solves for the model manifolds.
//!
//! Interval and rectangle use the classical closed-form Neumann spectra; the
//! annulus separates in the angle and each Fourier mode becomes a radial
//! Sturm-Liouville problem solved by finite differences with grid-doubling
//! self-convergence.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryMesh, ModelManifold, ANNULUS_R_IN, ANNULUS_R_OUT};
use crate::spectral::sturm::{radial_modes, EndCondition};
use crate::spectral::{DatasetSource, SpectralDataset};

/// All Neumann eigenvalues `<= lambda_max` with multiplicity, with boundary
/// traces sampled on `mesh` and a deterministic sign convention: the first
/// trace node of significant size is positive.
pub fn compute_spectrum(
    m: &ModelManifold,
    lambda_max: f64,
    mesh: &BoundaryMesh,
) -> Result<SpectralDataset> {
    m.validate()?;
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidInput(format!("lambda_max = {lambda_max}")));
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = match *m {
        ModelManifold::Interval { length } => interval_pairs(length, lambda_max, mesh),
        ModelManifold::Rectangle { lx, ly } => rectangle_pairs(lx, ly, lambda_max, mesh),
        ModelManifold::WarpedAnnulus { .. } => annulus_pairs(m, lambda_max, mesh)?,
    };
    finish_pairs(&mut pairs);
    let (eigenvalues, traces) = pairs.into_iter().unzip();
    SpectralDataset::new(
        DatasetSource::Model { manifold: *m },
        mesh.clone(),
        lambda_max,
        eigenvalues,
        traces,
    )
}

/// Spectral data of the degeneration endpoint of the warped annulus family:
/// the disjoint union of the flat annuli `A(1,2)` and `A(3,4)`. At the pinch
/// circles (r = 2 and r = 3) the limit conditions are mixed: Neumann for the
/// angular mode k = 0 (the collapsing neck still conducts radially) and
/// Dirichlet for k >= 1 (the `k^2/w^2` angular potential blows up in the
/// neck). Traces live on the given warped-annulus boundary mesh (circles
/// r=1 and r=4) and vanish on the circle of the other piece.
pub fn disconnected_limit_spectrum(
    lambda_max: f64,
    mesh: &BoundaryMesh,
) -> Result<SpectralDataset> {
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidInput(format!("lambda_max = {lambda_max}")));
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::new();
    // piece 0: A(1,2), boundary trace on mesh component 0 (r = 1);
    // piece 1: A(3,4), boundary trace on mesh component 1 (r = 4).
    for (component, ra, rb) in [(0usize, 1.0, 2.0), (1usize, 3.0, 4.0)] {
        let piece = flat_annulus_piece_pairs(ra, rb, lambda_max, mesh, component)?;
        pairs.extend(piece);
    }
    finish_pairs(&mut pairs);
    let (eigenvalues, traces) = pairs.into_iter().unzip();
    SpectralDataset::new(
        DatasetSource::DisconnectedLimit,
        mesh.clone(),
        lambda_max,
        eigenvalues,
        traces,
    )
}

/// Sort ascending (ties kept in construction order) and apply the sign
/// convention.
fn finish_pairs(pairs: &mut [(f64, Vec<f64>)]) {
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (_, t) in pairs.iter_mut() {
        let amax = t.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
        if let Some(&lead) = t.iter().find(|x| x.abs() > 1e-12 * amax) {
            if lead < 0.0 {
                for x in t.iter_mut() {
                    *x = -*x;
                }
            }
        }
    }
}

fn interval_pairs(length: f64, lambda_max: f64, mesh: &BoundaryMesh) -> Vec<(f64, Vec<f64>)> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let lambda = (k as f64 * PI / length).powi(2);
        if lambda > lambda_max {
            break;
        }
        let amp = if k == 0 {
            (1.0 / length).sqrt()
        } else {
            (2.0 / length).sqrt()
        };
        let trace: Vec<f64> = mesh
            .nodes
            .iter()
            .map(|n| amp * (k as f64 * PI * n.point.u / length).cos())
            .collect();
        out.push((lambda, trace));
        k += 1;
    }
    out
}

fn rectangle_pairs(lx: f64, ly: f64, lambda_max: f64, mesh: &BoundaryMesh) -> Vec<(f64, Vec<f64>)> {
    let cos_factor = |l: f64, k: usize, s: f64| -> f64 {
        let amp = if k == 0 { (1.0 / l).sqrt() } else { (2.0 / l).sqrt() };
        amp * (k as f64 * PI * s / l).cos()
    };
    let mut modes: Vec<(f64, usize, usize)> = Vec::new();
    let mmax = (lambda_max.sqrt() * lx / PI).floor() as usize;
    for mx in 0..=mmax {
        let lam_x = (mx as f64 * PI / lx).powi(2);
        let nmax = ((lambda_max - lam_x).max(0.0).sqrt() * ly / PI).floor() as usize;
        for ny in 0..=nmax {
            let lambda = lam_x + (ny as f64 * PI / ly).powi(2);
            if lambda <= lambda_max {
                modes.push((lambda, mx, ny));
            }
        }
    }
    // Ascending in lambda; degenerate groups ordered (m, n) lexicographic.
    modes.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    modes
        .into_iter()
        .map(|(lambda, mx, ny)| {
            let trace: Vec<f64> = mesh
                .nodes
                .iter()
                .map(|n| cos_factor(lx, mx, n.point.u) * cos_factor(ly, ny, n.point.v))
                .collect();
            (lambda, trace)
        })
        .collect()
}

/// Warped-annulus modes: separate as `R(r) T_k(theta)` where the radial part
/// solves `-(w R')' + (k^2 / w) R = lambda w R`, Neumann at r = 1, 4.
fn annulus_pairs(
    m: &ModelManifold,
    lambda_max: f64,
    mesh: &BoundaryMesh,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let w = |r: f64| m.warp(r);
    let mut pairs = Vec::new();
    // Exact constant mode.
    let vol = m.volume();
    pairs.push((0.0, vec![vol.powf(-0.5); mesh.len()]));
    // Rayleigh bound: lambda >= k^2 / max w^2 >= k^2 / 16.
    let kmax = (ANNULUS_R_OUT * lambda_max.sqrt()).floor() as usize;
    let neumann = (EndCondition::Neumann, EndCondition::Neumann);
    for k in 0..=kmax {
        let modes =
            converged_radial_modes(&w, ANNULUS_R_IN, ANNULUS_R_OUT, k, lambda_max, neumann)?;
        for (skip_first, lambda, r_in, r_out) in modes {
            if skip_first {
                continue;
            }
            push_angular_modes(&mut pairs, mesh, k, lambda, r_in, r_out, |_p| true);
        }
    }
    Ok(pairs)
}

fn flat_annulus_piece_pairs(
    ra: f64,
    rb: f64,
    lambda_max: f64,
    mesh: &BoundaryMesh,
    component: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let w = |r: f64| r;
    let vol = PI * (rb * rb - ra * ra);
    let mut pairs = Vec::new();
    let mask = |node_component: usize| node_component == component;
    // Exact constant mode of the piece, zero on the other circle.
    let t0: Vec<f64> = mesh
        .nodes
        .iter()
        .map(|n| if mask(n.component) { vol.powf(-0.5) } else { 0.0 })
        .collect();
    pairs.push((0.0, t0));
    let kmax = (rb * lambda_max.sqrt()).floor() as usize;
    for k in 0..=kmax {
        // Pinch-side circle: piece 0's outer end (r=2), piece 1's inner end
        // (r=3). Dirichlet there for the angular modes, Neumann for k=0.
        let bc = if k == 0 {
            (EndCondition::Neumann, EndCondition::Neumann)
        } else if component == 0 {
            (EndCondition::Neumann, EndCondition::Dirichlet)
        } else {
            (EndCondition::Dirichlet, EndCondition::Neumann)
        };
        let modes = converged_radial_modes(&w, ra, rb, k, lambda_max, bc)?;
        for (skip_first, lambda, r_in, r_out) in modes {
            if skip_first {
                continue;
            }
            // The mesh circle of this piece sits at its outer radius for
            // A(3,4) (r = 4) and at its inner radius for A(1,2) (r = 1).
            let (ri, ro) = if component == 0 { (r_in, 0.0) } else { (0.0, r_out) };
            push_angular_modes(&mut pairs, mesh, k, lambda, ri, ro, mask);
        }
    }
    Ok(pairs)
}

/// Expand one radial mode into its angular factors and append the trace
/// vectors. `r_in` / `r_out` are the radial values at the two mesh circles
/// (component 0 at r=1, component 1 at r=4); `mask` selects which mesh
/// components carry the trace.
#[allow(clippy::too_many_arguments)]
fn push_angular_modes<F: Fn(usize) -> bool>(
    pairs: &mut Vec<(f64, Vec<f64>)>,
    mesh: &BoundaryMesh,
    k: usize,
    lambda: f64,
    r_in: f64,
    r_out: f64,
    mask: F,
) {
    let radial_at = |node: &crate::geometry::BoundaryNode| -> f64 {
        if !mask(node.component) {
            return 0.0;
        }
        if node.component == 0 {
            r_in
        } else {
            r_out
        }
    };
    if k == 0 {
        let amp = 1.0 / (2.0 * PI).sqrt();
        let t: Vec<f64> = mesh.nodes.iter().map(|n| amp * radial_at(n)).collect();
        pairs.push((lambda, t));
    } else {
        let amp = 1.0 / PI.sqrt();
        let kf = k as f64;
        let tc: Vec<f64> = mesh
            .nodes
            .iter()
            .map(|n| amp * radial_at(n) * (kf * n.point.v).cos())
            .collect();
        let ts: Vec<f64> = mesh
            .nodes
            .iter()
            .map(|n| amp * radial_at(n) * (kf * n.point.v).sin())
            .collect();
        pairs.push((lambda, tc));
        pairs.push((lambda, ts));
    }
}

/// Radial modes for angular wavenumber `k`, on grids doubled until
/// eigenvalues agree to 1e-4 relative and boundary values to 1e-3. Returns
/// `(is_zero_mode, lambda, R(ra), R(rb))`; the k=0 near-zero mode is flagged
/// so callers can replace it by the exact constant.
fn converged_radial_modes<W: Fn(f64) -> f64>(
    w: &W,
    ra: f64,
    rb: f64,
    k: usize,
    lambda_max: f64,
    bc: (EndCondition, EndCondition),
) -> Result<Vec<(bool, f64, f64, f64)>> {
    let q = (k * k) as f64;
    let mut n = 401usize;
    let mut prev: Option<Vec<(f64, f64, f64)>> = None;
    for _ in 0..5 {
        let modes = radial_modes(w, ra, rb, q, lambda_max, n, bc)?;
        let cur: Vec<(f64, f64, f64)> = modes
            .iter()
            .map(|m| {
                // Fix the radial sign here so endpoint values are comparable
                // across grids: largest-magnitude endpoint positive.
                let (a, b) = (m.values[0], *m.values.last().unwrap());
                let s = if a.abs() >= b.abs() {
                    a.signum()
                } else {
                    b.signum()
                };
                (m.lambda, s * a, s * b)
            })
            .collect();
        if let Some(p) = &prev {
            let ok = p.len() == cur.len()
                && p.iter().zip(&cur).all(|(x, y)| {
                    (x.0 - y.0).abs() <= 1e-4 * (1.0 + y.0.abs())
                        && (x.1 - y.1).abs() <= 1e-3
                        && (x.2 - y.2).abs() <= 1e-3
                });
            if ok {
                return Ok(cur
                    .into_iter()
                    .enumerate()
                    .map(|(i, (l, a, b))| {
                        let zero_mode = k == 0 && i == 0;
                        debug_assert!(!zero_mode || l.abs() < 1e-6, "k=0 ground mode {l}");
                        (zero_mode, l, a, b)
                    })
                    .collect());
            }
        }
        prev = Some(cur);
        n = n * 2 - 1;
    }
    Err(Error::DiscretizationFailure(format!(
        "radial mode k={k} on [{ra},{rb}] did not self-converge"
    )))
}
