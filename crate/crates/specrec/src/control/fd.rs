//! Finite-difference wave solvers for the flat model manifolds, used only
//! as independent cross-checks of the spectral wave computations: leapfrog
//! in time, ghost-node Neumann boundary forcing `d_nu u = f`.

use crate::control::{kernel_time_factor, BoundaryPartition, WaveSource};
use crate::error::{Error, Result};
use crate::geometry::ModelManifold;
use crate::spectral::SpectralDataset;

/// Evaluate a kernel-basis source as a function on boundary mesh nodes:
/// `f(z, t) = sum_n a_n g_{lambda_n}(D - t) phi_n(z)` when `z`'s part
/// window is active at `t`, else 0.
pub struct SourceEval<'a> {
    d: &'a SpectralDataset,
    src: &'a WaveSource,
    /// Part index of each mesh node.
    part_of: Vec<usize>,
}

impl<'a> SourceEval<'a> {
    pub fn new(d: &'a SpectralDataset, p: &'a BoundaryPartition, src: &'a WaveSource) -> Self {
        let mut part_of = vec![0usize; d.mesh.len()];
        for (l, part) in p.parts.iter().enumerate() {
            for &i in part {
                part_of[i] = l;
            }
        }
        SourceEval { d, src, part_of }
    }

    /// Window length of the part containing mesh node `z`.
    pub fn window(&self, z: usize, p: &BoundaryPartition) -> f64 {
        self.src.alpha.alpha[self.part_of[z]] as f64 * p.eta
    }

    pub fn value(&self, z: usize, t: f64, p: &BoundaryPartition) -> f64 {
        let tau = self.window(z, p);
        if t < self.src.d_time - tau || t > self.src.d_time {
            return 0.0;
        }
        let s = self.src.d_time - t;
        self.src
            .coefficients
            .iter()
            .enumerate()
            .map(|(n, &a)| a * kernel_time_factor(self.d.eigenvalues[n], s) * self.d.traces[n][z])
            .sum()
    }
}

/// Solve `u_tt = u_xx` on `[0, length]` with Neumann data `f0` at 0 and
/// `f1` at `length`, zero initial conditions, to `t_final`. Returns the
/// final state on the uniform grid of `nx + 1` nodes.
pub fn interval_wave_final(
    length: f64,
    nx: usize,
    nt: usize,
    t_final: f64,
    f0: &dyn Fn(f64) -> f64,
    f1: &dyn Fn(f64) -> f64,
) -> Vec<f64> {
    let h = length / nx as f64;
    let dt = t_final / nt as f64;
    assert!(dt <= h, "CFL violated: dt {dt} > h {h}");
    let c2 = (dt / h) * (dt / h);
    let mut u_old = vec![0.0; nx + 1];
    let mut u = vec![0.0; nx + 1];
    let mut u_new = vec![0.0; nx + 1];
    for step in 0..nt {
        let t = step as f64 * dt;
        for i in 1..nx {
            u_new[i] = 2.0 * u[i] - u_old[i] + c2 * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
        }
        // Ghost nodes: (u[1] - u[-1]) / 2h = -f0 (outward normal is -x).
        let ghost_left = u[1] + 2.0 * h * f0(t);
        u_new[0] = 2.0 * u[0] - u_old[0] + c2 * (u[1] - 2.0 * u[0] + ghost_left);
        let ghost_right = u[nx - 1] + 2.0 * h * f1(t);
        u_new[nx] = 2.0 * u[nx] - u_old[nx] + c2 * (u[nx - 1] - 2.0 * u[nx] + ghost_right);
        std::mem::swap(&mut u_old, &mut u);
        std::mem::swap(&mut u, &mut u_new);
    }
    u
}

/// Interior L2 projections of a grid function onto the first `k_max`
/// interval Neumann modes (trapezoid quadrature).
pub fn interval_mode_coefficients(u: &[f64], length: f64, k_max: usize) -> Vec<f64> {
    let nx = u.len() - 1;
    let h = length / nx as f64;
    (0..k_max)
        .map(|k| {
            let amp = if k == 0 {
                (1.0 / length).sqrt()
            } else {
                (2.0 / length).sqrt()
            };
            let mut acc = 0.0;
            for (i, &ui) in u.iter().enumerate() {
                let x = i as f64 * h;
                let wgt = if i == 0 || i == nx { 0.5 } else { 1.0 };
                acc += wgt * h * ui * amp * (k as f64 * std::f64::consts::PI * x / length).cos();
            }
            acc
        })
        .collect()
}

/// Solve `u_tt = Delta u` on the rectangle with Neumann data given by a
/// boundary source `f(x, y, t)`, zero initial conditions. Returns the final
/// grid (row-major, `(nx+1) x (ny+1)`).
#[allow(clippy::too_many_arguments)]
pub fn rectangle_wave_final(
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    nt: usize,
    t_final: f64,
    f: &dyn Fn(f64, f64, f64) -> f64,
) -> Vec<f64> {
    let hx = lx / nx as f64;
    let hy = ly / ny as f64;
    let dt = t_final / nt as f64;
    let h = hx.min(hy);
    assert!(dt <= h / std::f64::consts::SQRT_2, "CFL violated");
    let cx = (dt / hx) * (dt / hx);
    let cy = (dt / hy) * (dt / hy);
    let w = ny + 1;
    let idx = |i: usize, j: usize| i * w + j;
    let n = (nx + 1) * w;
    let mut u_old = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut u_new = vec![0.0; n];
    for step in 0..nt {
        let t = step as f64 * dt;
        for i in 0..=nx {
            let x = i as f64 * hx;
            for j in 0..=ny {
                let y = j as f64 * hy;
                // Neighbors with ghost-node Neumann closure on each face.
                let left = if i > 0 {
                    u[idx(i - 1, j)]
                } else {
                    u[idx(1, j)] + 2.0 * hx * f(0.0, y, t)
                };
                let right = if i < nx {
                    u[idx(i + 1, j)]
                } else {
                    u[idx(nx - 1, j)] + 2.0 * hx * f(lx, y, t)
                };
                let down = if j > 0 {
                    u[idx(i, j - 1)]
                } else {
                    u[idx(i, 1)] + 2.0 * hy * f(x, 0.0, t)
                };
                let up = if j < ny {
                    u[idx(i, j + 1)]
                } else {
                    u[idx(i, ny - 1)] + 2.0 * hy * f(x, ly, t)
                };
                let c = idx(i, j);
                u_new[c] = 2.0 * u[c] - u_old[c]
                    + cx * (left - 2.0 * u[c] + right)
                    + cy * (down - 2.0 * u[c] + up);
            }
        }
        std::mem::swap(&mut u_old, &mut u);
        std::mem::swap(&mut u, &mut u_new);
    }
    u
}

/// Fraction of the final wave's L2 mass lying outside the domain of
/// influence `M_alpha` fattened by `2 * grid h`, from an FD simulation.
/// Interval and rectangle only.
pub fn finite_speed_check(
    d: &SpectralDataset,
    p: &BoundaryPartition,
    src: &WaveSource,
    resolution: usize,
) -> Result<f64> {
    let manifold = match d.source {
        crate::spectral::DatasetSource::Model { manifold } => manifold,
        _ => return Err(Error::InvalidInput("FD check needs a model manifold".into())),
    };
    let eval = SourceEval::new(d, p, src);
    match manifold {
        ModelManifold::Interval { length } => {
            let nx = resolution;
            let h = length / nx as f64;
            let nt = ((src.d_time / (0.5 * h)).ceil() as usize).max(1);
            // Boundary node indices: mesh node with point.u == 0 is f0.
            let (z0, z1) = if d.mesh.nodes[0].point.u < d.mesh.nodes[1].point.u {
                (0, 1)
            } else {
                (1, 0)
            };
            let u = interval_wave_final(
                length,
                nx,
                nt,
                src.d_time,
                &|t| eval.value(z0, t, p),
                &|t| eval.value(z1, t, p),
            );
            let inside = |x: f64| -> bool {
                p.parts.iter().enumerate().any(|(l, part)| {
                    let tau = src.alpha.alpha[l] as f64 * p.eta;
                    tau > 0.0
                        && part.iter().any(|&z| {
                            (x - d.mesh.nodes[z].point.u).abs() <= tau + 2.0 * h
                        })
                })
            };
            let mut outside = 0.0;
            let mut total = 0.0;
            for (i, &ui) in u.iter().enumerate() {
                let x = i as f64 * h;
                let wgt = if i == 0 || i == nx { 0.5 } else { 1.0 };
                let m = wgt * h * ui * ui;
                total += m;
                if !inside(x) {
                    outside += m;
                }
            }
            if total == 0.0 {
                return Ok(0.0);
            }
            Ok(outside / total)
        }
        ModelManifold::Rectangle { lx, ly } => {
            let nx = resolution;
            let ny = ((resolution as f64) * ly / lx).round().max(8.0) as usize;
            let h = (lx / nx as f64).min(ly / ny as f64);
            let nt = ((src.d_time / (0.4 * h)).ceil() as usize).max(1);
            // Nearest mesh node lookup for boundary source values.
            let nearest = |x: f64, y: f64| -> usize {
                let mut best = 0;
                let mut bd = f64::INFINITY;
                for (i, n) in d.mesh.nodes.iter().enumerate() {
                    let dd = (n.point.u - x).powi(2) + (n.point.v - y).powi(2);
                    if dd < bd {
                        bd = dd;
                        best = i;
                    }
                }
                best
            };
            let u = rectangle_wave_final(lx, ly, nx, ny, nt, src.d_time, &|x, y, t| {
                eval.value(nearest(x, y), t, p)
            });
            let inside = |x: f64, y: f64| -> bool {
                p.parts.iter().enumerate().any(|(l, part)| {
                    let tau = src.alpha.alpha[l] as f64 * p.eta;
                    tau > 0.0
                        && part.iter().any(|&z| {
                            let n = &d.mesh.nodes[z];
                            let dd = ((x - n.point.u).powi(2) + (y - n.point.v).powi(2)).sqrt();
                            dd <= tau + 2.0 * h
                        })
                })
            };
            let hx = lx / nx as f64;
            let hy = ly / ny as f64;
            let w = ny + 1;
            let mut outside = 0.0;
            let mut total = 0.0;
            for i in 0..=nx {
                for j in 0..=ny {
                    let wgt = (if i == 0 || i == nx { 0.5 } else { 1.0 })
                        * (if j == 0 || j == ny { 0.5 } else { 1.0 });
                    let ui = u[i * w + j];
                    let m = wgt * hx * hy * ui * ui;
                    total += m;
                    if !inside(i as f64 * hx, j as f64 * hy) {
                        outside += m;
                    }
                }
            }
            if total == 0.0 {
                return Ok(0.0);
            }
            Ok(outside / total)
        }
        ModelManifold::WarpedAnnulus { .. } => Err(Error::InvalidInput(
            "FD check implemented for flat variants only".into(),
        )),
    }
}
