//! Boundary wave control from spectral data.
//!
//! Sources are built from the one-parameter kernel family
//! `s_k^t(y, t') = sin(sqrt(lambda_k) (t - t')) / sqrt(lambda_k) * phi_k(y)`
//! restricted to space-time windows `Gamma_l x [D - alpha_l eta, D]`. All
//! wave quantities reduce to closed-form time integrals times boundary
//! quadrature sums, so no time stepping is involved; the finite-difference
//! solvers in [`fd`] exist only as independent cross-checks.

pub mod fd;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::BoundaryMesh;
use crate::spectral::{vol_from_phi1, SpectralDataset};

/// Disjoint contiguous groups of boundary nodes covering the mesh, each of
/// boundary-arc diameter below `eta`.
#[derive(Debug, Clone)]
pub struct BoundaryPartition {
    pub parts: Vec<Vec<usize>>,
    pub eta: f64,
}

impl BoundaryPartition {
    /// Validating constructor: parts disjoint, covering, diameters < eta.
    pub fn new(mesh: &BoundaryMesh, parts: Vec<Vec<usize>>, eta: f64) -> Result<Self> {
        let p = Self::new_coarse(mesh, parts, eta)?;
        for (l, part) in p.parts.iter().enumerate() {
            let d = part_diameter(mesh, part);
            if d >= eta * (1.0 + 1e-9) {
                return Err(Error::InvalidInput(format!(
                    "part {l} has boundary diameter {d} >= eta = {eta}"
                )));
            }
        }
        Ok(p)
    }

    /// Like [`BoundaryPartition::new`] but without the diameter bound, for
    /// deliberately coarse partitions (e.g. one part per rectangle side at
    /// large scales).
    pub fn new_coarse(mesh: &BoundaryMesh, parts: Vec<Vec<usize>>, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidInput(format!("eta = {eta}")));
        }
        let mut seen = vec![false; mesh.len()];
        for part in &parts {
            if part.is_empty() {
                return Err(Error::InvalidInput("empty partition part".into()));
            }
            for &i in part {
                if i >= mesh.len() || seen[i] {
                    return Err(Error::InvalidInput(format!(
                        "node {i} missing or repeated in partition"
                    )));
                }
                seen[i] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidInput("partition does not cover the mesh".into()));
        }
        Ok(BoundaryPartition { parts, eta })
    }

    /// Partition every boundary component into contiguous arcs of length
    /// (hence diameter) below `eta`; point components become singletons.
    pub fn by_arc(mesh: &BoundaryMesh, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidInput(format!("eta = {eta}")));
        }
        let ncomp = mesh.component_lengths.len();
        let mut parts = Vec::new();
        for comp in 0..ncomp {
            let mut idx: Vec<usize> = (0..mesh.len())
                .filter(|&i| mesh.nodes[i].component == comp)
                .collect();
            idx.sort_by(|&a, &b| {
                mesh.nodes[a].arc.partial_cmp(&mesh.nodes[b].arc).unwrap()
            });
            let len = mesh.component_lengths[comp];
            if len == 0.0 {
                parts.push(idx);
                continue;
            }
            let q = (len / (0.999 * eta)).ceil().max(1.0) as usize;
            let seg = len / q as f64;
            let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); q];
            for i in idx {
                let b = ((mesh.nodes[i].arc / seg).floor() as usize).min(q - 1);
                buckets[b].push(i);
            }
            parts.extend(buckets.into_iter().filter(|b| !b.is_empty()));
        }
        Self::new(mesh, parts, eta)
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// Boundary-arc diameter of a node set (infinite across components).
pub fn part_diameter(mesh: &BoundaryMesh, part: &[usize]) -> f64 {
    let mut d = 0.0_f64;
    for (a, &i) in part.iter().enumerate() {
        for &j in &part[a + 1..] {
            d = d.max(mesh.boundary_distance(i, j));
        }
    }
    d
}

/// Per-part window counts: source windows are `[D - alpha_l eta, D]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub alpha: Vec<usize>,
}

impl MultiIndex {
    pub fn new(alpha: Vec<usize>) -> Self {
        MultiIndex { alpha }
    }

    pub fn zeros(l: usize) -> Self {
        MultiIndex { alpha: vec![0; l] }
    }

    pub fn validate(&self, p: &BoundaryPartition, d_time: f64) -> Result<()> {
        if self.alpha.len() != p.len() {
            return Err(Error::InvalidInput(format!(
                "multi-index length {} vs {} parts",
                self.alpha.len(),
                p.len()
            )));
        }
        let cap = d_time / p.eta;
        for (&a, _) in self.alpha.iter().zip(&p.parts) {
            if a as f64 > cap * (1.0 + 1e-9) {
                return Err(Error::InvalidInput(format!(
                    "alpha_l = {a} exceeds D/eta = {cap}"
                )));
            }
        }
        Ok(())
    }

    /// Componentwise max (the index of the union of the two domains).
    pub fn union(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex {
            alpha: self
                .alpha
                .iter()
                .zip(&other.alpha)
                .map(|(&a, &b)| a.max(b))
                .collect(),
        }
    }
}

/// Control solve parameters: source space dimension `N`, test space
/// dimension `I`, projection order `K`, source norm bound `C` and target
/// residual `sigma`.
#[derive(Debug, Clone, Copy)]
pub struct ControlParams {
    pub n: usize,
    pub i: usize,
    pub k: usize,
    pub c: f64,
    pub sigma: f64,
}

impl ControlParams {
    pub fn validate(&self, dataset_len: usize) -> Result<()> {
        if !(self.n >= 1 && self.n <= self.i && self.i <= self.k && self.k <= dataset_len) {
            return Err(Error::InvalidInput(format!(
                "need 1 <= N <= I <= K <= {dataset_len}, got N={} I={} K={}",
                self.n, self.i, self.k
            )));
        }
        if !(self.c > 0.0 && self.sigma > 0.0) {
            return Err(Error::InvalidInput("C and sigma must be positive".into()));
        }
        Ok(())
    }
}

/// A boundary source expressed in the kernel basis, with its achieved
/// control residual.
#[derive(Debug, Clone)]
pub struct WaveSource {
    pub coefficients: Vec<f64>,
    pub alpha: MultiIndex,
    pub d_time: f64,
    /// Control functional value at the minimizer.
    pub residual: f64,
    /// `||f||_{L2(boundary x [0,D])}` of the source.
    pub norm: f64,
}

/// The kernel time factor `g_lambda(s)`: `sin(sqrt(lambda) s)/sqrt(lambda)`,
/// extended continuously through `lambda = 0` and to (slightly) negative
/// eigenvalues from perturbed data.
pub fn kernel_time_factor(lambda: f64, s: f64) -> f64 {
    if lambda > 1e-12 {
        let w = lambda.sqrt();
        (w * s).sin() / w
    } else if lambda >= -1e-12 {
        s
    } else {
        let w = (-lambda).sqrt();
        (w * s).sinh() / w
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `integral_0^tau g_{lk}(s) g_{ln}(s) ds` in closed form where available
/// (nonnegative eigenvalues), numerically otherwise.
pub fn kernel_product_integral(lk: f64, ln: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    let zk = lk.abs() <= 1e-12;
    let zn = ln.abs() <= 1e-12;
    if zk && zn {
        return tau * tau * tau / 3.0;
    }
    if (zk && ln > 0.0) || (zn && lk > 0.0) {
        let b = if zk { ln.sqrt() } else { lk.sqrt() };
        // integral s sin(b s) ds / b = (sin(b tau) - b tau cos(b tau)) / b^3
        let bt = b * tau;
        return (bt.sin() - bt * bt.cos()) / (b * b * b);
    }
    if lk > 0.0 && ln > 0.0 {
        let (a, b) = (lk.sqrt(), ln.sqrt());
        // product-to-sum, stabilized through a == b by sinc.
        let half = 0.5 * tau * (sinc((a - b) * tau) - sinc((a + b) * tau));
        return half / (a * b);
    }
    // Negative eigenvalue present (perturbed data): composite Simpson.
    let m = 400;
    let h = tau / m as f64;
    let f = |s: f64| kernel_time_factor(lk, s) * kernel_time_factor(ln, s);
    let mut acc = 0.0;
    for i in 0..m {
        let s = i as f64 * h;
        acc += h / 6.0 * (f(s) + 4.0 * f(s + 0.5 * h) + f(s + h));
    }
    acc
}

/// The `K x N` matrix of wave Fourier coefficients: entry `(k, n)` is the
/// k-th Fourier coefficient at time `D` of the wave driven by the windowed
/// kernel source `s_n^D chi`. Symmetric in its top square block.
pub fn wave_fourier_matrix(
    d: &SpectralDataset,
    p: &BoundaryPartition,
    alpha: &MultiIndex,
    n_src: usize,
    k_max: usize,
    d_time: f64,
) -> Result<DMatrix<f64>> {
    if n_src > d.len() || k_max > d.len() {
        return Err(Error::InvalidInput(format!(
            "K={k_max}, N={n_src} exceed dataset size {}",
            d.len()
        )));
    }
    if !(d_time > 0.0) {
        return Err(Error::InvalidInput(format!("D = {d_time}")));
    }
    alpha.validate(p, d_time)?;
    let mut m = DMatrix::zeros(k_max, n_src);
    for (l, part) in p.parts.iter().enumerate() {
        let tau = (alpha.alpha[l] as f64 * p.eta).min(d_time);
        if tau <= 0.0 {
            continue;
        }
        // Boundary quadrature of phi_k phi_n over the part.
        let b = DMatrix::from_fn(k_max, n_src, |k, n| {
            part.iter()
                .map(|&z| {
                    d.mesh.nodes[z].weight * d.traces[k][z] * d.traces[n][z]
                })
                .sum::<f64>()
        });
        for k in 0..k_max {
            for n in 0..n_src {
                m[(k, n)] +=
                    b[(k, n)] * kernel_product_integral(d.eigenvalues[k], d.eigenvalues[n], tau);
            }
        }
    }
    Ok(m)
}

/// The control functional value together with a rank-deficiency flag for
/// the test-space Gram matrix.
#[derive(Debug, Clone, Copy)]
pub struct ControlValue {
    pub value: f64,
    pub gram_rank_deficient: bool,
}

/// Shared precomputation for the functional and its minimization over one
/// window family.
struct ControlSystem {
    /// K x N source-to-coefficient map.
    u_n: DMatrix<f64>,
    /// K x I test map.
    u_i: DMatrix<f64>,
    /// Eigendecomposition of the I x I test Gram.
    gram_eigen: SymmetricEigen<f64, nalgebra::Dyn>,
    gram_tol: f64,
}

impl ControlSystem {
    fn build(
        d: &SpectralDataset,
        p: &BoundaryPartition,
        alpha: &MultiIndex,
        params: &ControlParams,
        d_time: f64,
    ) -> Result<Self> {
        params.validate(d.len())?;
        let u_i = wave_fourier_matrix(d, p, alpha, params.i, params.k, d_time)?;
        let u_n = u_i.columns(0, params.n).into_owned();
        let gram = u_i.transpose() * &u_i;
        let scale = gram.diagonal().max().max(0.0);
        let gram_eigen = SymmetricEigen::new(gram);
        Ok(ControlSystem {
            u_n,
            u_i,
            gram_eigen,
            gram_tol: 1e-12 * scale.max(1e-300),
        })
    }

    fn rank_deficient(&self) -> bool {
        self.gram_eigen.eigenvalues.iter().any(|&e| e <= self.gram_tol)
    }

    /// `sup { |b^T w| : b^T G b <= 1 }` with `w = U_I^T (U_N a - e_1)`:
    /// the dual norm `sqrt(w^T G^+ w)` through the eigendecomposition.
    fn functional_at(&self, a: &DVector<f64>) -> f64 {
        let mut resid = self.u_n.column(0).clone_owned() * 0.0;
        resid += &self.u_n * a;
        resid[0] -= 1.0;
        let w = self.u_i.transpose() * resid;
        let proj = self.gram_eigen.eigenvectors.transpose() * w;
        let mut acc = 0.0;
        for (c, &e) in proj.iter().zip(self.gram_eigen.eigenvalues.iter()) {
            if e > self.gram_tol {
                acc += c * c / e;
            }
        }
        acc.max(0.0).sqrt()
    }
}

/// Evaluate the control functional at source coefficients `f` (length `N`).
pub fn control_functional(
    d: &SpectralDataset,
    p: &BoundaryPartition,
    alpha: &MultiIndex,
    params: &ControlParams,
    f: &[f64],
    d_time: f64,
) -> Result<ControlValue> {
    if f.len() != params.n {
        return Err(Error::InvalidInput(format!(
            "coefficient length {} vs N = {}",
            f.len(),
            params.n
        )));
    }
    let sys = ControlSystem::build(d, p, alpha, params, d_time)?;
    let a = DVector::from_column_slice(f);
    Ok(ControlValue {
        value: sys.functional_at(&a),
        gram_rank_deficient: sys.rank_deficient(),
    })
}

/// Minimize the control functional over sources with `||f|| <= C`,
/// by Lagrange-multiplier bisection on the norm constraint.
pub fn minimize_control(
    d: &SpectralDataset,
    p: &BoundaryPartition,
    alpha: &MultiIndex,
    params: &ControlParams,
    d_time: f64,
) -> Result<WaveSource> {
    let sys = ControlSystem::build(d, p, alpha, params, d_time)?;
    let n = params.n;
    // Quadratic model: A(a)^2 = a^T Q a - 2 q^T a + c0 with
    // P = U_I G^+ U_I^T, Q = U_N^T P U_N, q = U_N^T P e1.
    let mut pk = DMatrix::zeros(params.k, params.k);
    for (j, &e) in sys.gram_eigen.eigenvalues.iter().enumerate() {
        if e > sys.gram_tol {
            let v = sys.gram_eigen.eigenvectors.column(j);
            let uv = &sys.u_i * v;
            pk += &uv * uv.transpose() / e;
        }
    }
    let q_mat = sys.u_n.transpose() * &pk * &sys.u_n;
    let e1 = DVector::from_fn(params.k, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let q_vec = sys.u_n.transpose() * (&pk * e1);
    // Source norm Gram: S_{nm} = <f_n, f_m> over the window set, which is
    // exactly the top N x N block of the wave matrix.
    let s_mat = sys.u_i.view((0, 0), (n, n)).into_owned();

    let ridge = 1e-13 * (q_mat.trace() + s_mat.trace()).max(1e-300);
    let solve_at = |mu: f64| -> DVector<f64> {
        let mut m = &q_mat + &s_mat * mu;
        for i in 0..n {
            m[(i, i)] += ridge;
        }
        let eig = SymmetricEigen::new(m);
        let tol = 1e-14 * eig.eigenvalues.amax().max(1e-300);
        let proj = eig.eigenvectors.transpose() * &q_vec;
        let mut a = DVector::zeros(n);
        for (j, &e) in eig.eigenvalues.iter().enumerate() {
            if e.abs() > tol {
                a += eig.eigenvectors.column(j) * (proj[j] / e);
            }
        }
        a
    };
    let norm2 = |a: &DVector<f64>| (a.transpose() * &s_mat * a)[(0, 0)].max(0.0);

    let c2 = params.c * params.c;
    let mut a = solve_at(0.0);
    if norm2(&a) > c2 {
        // Find mu with the constraint active; norm is decreasing in mu.
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut guard = 0;
        while norm2(&solve_at(hi)) > c2 {
            hi *= 10.0;
            guard += 1;
            if guard > 40 {
                return Err(Error::NotConverged {
                    residual: sys.functional_at(&a),
                });
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if norm2(&solve_at(mid)) > c2 {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= 1e-12 * hi {
                break;
            }
        }
        // Tie-break at the boundary: the smaller-norm (larger mu) solution.
        a = solve_at(hi);
    }
    let residual = sys.functional_at(&a);
    Ok(WaveSource {
        coefficients: a.iter().copied().collect(),
        alpha: alpha.clone(),
        d_time,
        residual,
        norm: norm2(&a).sqrt(),
    })
}

/// Approximate volume of the domain of influence `M_alpha`:
/// `vol(M) * sum_k (u^{f*}_k)^2`, the squared norm of the controlled wave
/// approximating the scaled indicator.
pub fn approx_volume(
    d: &SpectralDataset,
    p: &BoundaryPartition,
    alpha: &MultiIndex,
    params: &ControlParams,
    d_time: f64,
) -> Result<f64> {
    let src = minimize_control(d, p, alpha, params, d_time)?;
    if src.residual > params.sigma {
        return Err(Error::NotConverged {
            residual: src.residual,
        });
    }
    let vol = vol_from_phi1(d)?;
    let u = wave_fourier_matrix(d, p, alpha, params.n, params.k, d_time)?;
    let a = DVector::from_column_slice(&src.coefficients);
    let uk = u * a;
    Ok(vol * uk.norm_squared())
}
