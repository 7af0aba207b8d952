//! Seeded truncation and perturbation of spectral datasets, emulating noisy
//! finite measurements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralDataset;

/// Noise magnitudes for [`perturb_dataset`]. Bounds, not standard
/// deviations: the output satisfies `|mu_j - lambda_j| <= eig_abs` and
/// `||psi_j - phi_j||_{L2(boundary)} <= trace_l2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub eig_abs: f64,
    pub trace_l2: f64,
    /// Additionally mix traces by a random orthogonal matrix within each
    /// multiplicity cluster (a pure gauge change).
    #[serde(default)]
    pub mix_clusters: bool,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            eig_abs: 0.0,
            trace_l2: 0.0,
            mix_clusters: false,
        }
    }
}

/// Keep only eigenvalues below `delta_inv` and add bounded seeded noise.
pub fn perturb_dataset(
    d: &SpectralDataset,
    noise: NoiseSpec,
    delta_inv: f64,
    seed: u64,
) -> Result<SpectralDataset> {
    if !(delta_inv > 0.0) {
        return Err(Error::InvalidInput(format!("delta_inv = {delta_inv}")));
    }
    if noise.eig_abs < 0.0 || noise.trace_l2 < 0.0 {
        return Err(Error::InvalidInput("negative noise magnitude".into()));
    }
    let keep: Vec<usize> = (0..d.len())
        .filter(|&j| d.eigenvalues[j] < delta_inv)
        .collect();
    let mut eigenvalues: Vec<f64> = keep.iter().map(|&j| d.eigenvalues[j]).collect();
    let mut traces: Vec<Vec<f64>> = keep.iter().map(|&j| d.traces[j].clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if noise.mix_clusters {
        // Cluster structure of the *retained* eigenvalues.
        let truncated = SpectralDataset::new(
            d.source,
            d.mesh.clone(),
            delta_inv,
            eigenvalues.clone(),
            traces.clone(),
        )?;
        for cluster in truncated.multiplicity_clusters() {
            let n = cluster.len();
            if n < 2 {
                continue;
            }
            let q = random_orthogonal(&mut rng, n);
            let old: Vec<Vec<f64>> = cluster.iter().map(|&j| traces[j].clone()).collect();
            for (a, &j) in cluster.iter().enumerate() {
                let mut t = vec![0.0; d.mesh.len()];
                for (b, row) in old.iter().enumerate() {
                    for (x, &y) in t.iter_mut().zip(row) {
                        *x += q[(a, b)] * y;
                    }
                }
                traces[j] = t;
            }
        }
    }

    for l in eigenvalues.iter_mut() {
        *l += noise.eig_abs * rng.gen_range(-1.0..=1.0);
    }
    for t in traces.iter_mut() {
        if noise.trace_l2 == 0.0 {
            continue;
        }
        let g: Vec<f64> = (0..t.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = d.mesh.norm(&g);
        if norm == 0.0 {
            continue;
        }
        let amp = noise.trace_l2 * rng.gen_range(0.0..=1.0) / norm;
        for (x, &y) in t.iter_mut().zip(&g) {
            *x += amp * y;
        }
    }

    // Noise may reorder near-degenerate eigenvalues; restore ascending order.
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigenvalues[a].partial_cmp(&eigenvalues[b]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&j| eigenvalues[j]).collect();
    let traces: Vec<Vec<f64>> = order.iter().map(|&j| traces[j].clone()).collect();
    SpectralDataset::new(d.source, d.mesh.clone(), delta_inv, eigenvalues, traces)
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> nalgebra::DMatrix<f64> {
    // QR of a Gaussian matrix, sign-fixed so R has positive diagonal (Haar).
    let a = nalgebra::DMatrix::from_fn(n, n, |_, _| {
        // Box-Muller from two uniforms.
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    });
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_boundary_mesh, ModelManifold};
    use crate::spectral::compute_spectrum;
    use std::f64::consts::PI;

    #[test]
    fn zero_noise_is_exact_truncation() {
        let m = ModelManifold::interval(PI);
        let mesh = build_boundary_mesh(&m, 1.0).unwrap();
        let d = compute_spectrum(&m, 100.0, &mesh).unwrap();
        let p = perturb_dataset(&d, NoiseSpec::none(), 10.0, 7).unwrap();
        assert_eq!(p.eigenvalues, vec![0.0, 1.0, 4.0, 9.0]);
        assert_eq!(p.traces, d.traces[..4].to_vec());
    }

    #[test]
    fn noise_bounds_hold() {
        let m = ModelManifold::rectangle(PI, PI);
        let mesh = build_boundary_mesh(&m, PI / 8.0).unwrap();
        let d = compute_spectrum(&m, 10.0, &mesh).unwrap();
        let noise = NoiseSpec {
            eig_abs: 0.01,
            trace_l2: 0.05,
            mix_clusters: false,
        };
        let p = perturb_dataset(&d, noise, 11.0, 42).unwrap();
        assert_eq!(p.len(), d.len());
        // Noise may permute members of exact multiplicity clusters, so each
        // perturbed pair must be within bounds of *some* original pair.
        for (&mu, psi) in p.eigenvalues.iter().zip(&p.traces) {
            let ok = d.eigenvalues.iter().zip(&d.traces).any(|(&l, phi)| {
                if (mu - l).abs() > 0.01 + 1e-12 {
                    return false;
                }
                let diff: Vec<f64> = psi.iter().zip(phi).map(|(a, b)| a - b).collect();
                d.mesh.norm(&diff) <= 0.05 + 1e-12
            });
            assert!(ok, "no original pair within bounds of mu = {mu}");
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let m = ModelManifold::interval(PI);
        let mesh = build_boundary_mesh(&m, 1.0).unwrap();
        let d = compute_spectrum(&m, 50.0, &mesh).unwrap();
        let noise = NoiseSpec {
            eig_abs: 0.02,
            trace_l2: 0.02,
            mix_clusters: false,
        };
        let a = perturb_dataset(&d, noise, 50.0, 5).unwrap();
        let c = perturb_dataset(&d, noise, 50.0, 5).unwrap();
        assert_eq!(a.eigenvalues, c.eigenvalues);
        assert_eq!(a.traces, c.traces);
        let e = perturb_dataset(&d, noise, 50.0, 6).unwrap();
        assert_ne!(a.eigenvalues, e.eigenvalues);
    }

    #[test]
    fn mixing_preserves_gram() {
        let m = ModelManifold::rectangle(PI, PI);
        let mesh = build_boundary_mesh(&m, PI / 16.0).unwrap();
        let d = compute_spectrum(&m, 5.0, &mesh).unwrap();
        let noise = NoiseSpec {
            eig_abs: 0.0,
            trace_l2: 0.0,
            mix_clusters: true,
        };
        let p = perturb_dataset(&d, noise, 5.5, 11).unwrap();
        // Mixing within a cluster keeps the boundary Gram matrix of the
        // cluster's span: compare total boundary norms per cluster.
        for cluster in d.multiplicity_clusters() {
            let before: f64 = cluster.iter().map(|&j| d.mesh.inner(&d.traces[j], &d.traces[j])).sum();
            let after: f64 = cluster.iter().map(|&j| d.mesh.inner(&p.traces[j], &p.traces[j])).sum();
            assert!((before - after).abs() < 1e-10 * (1.0 + before));
        }
        // And the doubly-degenerate pair really got mixed.
        assert_ne!(d.traces[1], p.traces[1]);
    }

    #[test]
    fn rejects_bad_delta_inv() {
        let m = ModelManifold::interval(PI);
        let mesh = build_boundary_mesh(&m, 1.0).unwrap();
        let d = compute_spectrum(&m, 10.0, &mesh).unwrap();
        assert!(perturb_dataset(&d, NoiseSpec::none(), 0.0, 0).is_err());
        assert!(perturb_dataset(&d, NoiseSpec::none(), -1.0, 0).is_err());
    }
}
