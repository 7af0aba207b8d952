//! Symmetric tridiagonal eigensolver (Sturm-sequence bisection plus inverse
//! iteration) and the radial Neumann Sturm-Liouville solver built on it.
//!
//! The radial problem is `-(w R')' + (q/w) R = lambda w R` on `[ra, rb]` with
//! Neumann ends, discretized in flux form on a uniform vertex-centered grid;
//! the lumped mass matrix is diagonal, so the generalized problem reduces to
//! a symmetric tridiagonal standard one.

use crate::error::{Error, Result};

/// Number of eigenvalues of the symmetric tridiagonal matrix `(d, e)` that
/// are strictly below `x` (Sturm count via the LDL^T recurrence).
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let n = d.len();
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        if q == 0.0 {
            q = 1e-300;
        }
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues strictly below `bound`, ascending, each bisected to
/// absolute tolerance `tol * scale` where `scale` is the Gershgorin radius.
pub fn tridiag_eigs_below(d: &[f64], e: &[f64], bound: f64) -> Vec<f64> {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let scale = (hi - lo).max(1.0);
    let top = bound.min(hi + 1.0);
    let m = sturm_count(d, e, top);
    let mut out = Vec::with_capacity(m);
    for idx in 0..m {
        // Invariant: count(a) <= idx < count(b).
        let (mut a, mut b) = (lo, top);
        while b - a > 1e-13 * scale {
            let mid = 0.5 * (a + b);
            if sturm_count(d, e, mid) <= idx {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Eigenvector by inverse iteration at (a slight shift off) `lambda`,
/// normalized to Euclidean unit length.
pub fn tridiag_eigenvector(d: &[f64], e: &[f64], lambda: f64) -> Vec<f64> {
    let n = d.len();
    let scale = d.iter().fold(0.0_f64, |a, &x| a.max(x.abs())).max(1.0);
    let shift = lambda + 1e-11 * scale;
    let lu = TridiagLu::factor(d, e, shift);
    // Deterministic pseudo-random start to avoid accidental orthogonality.
    let mut v: Vec<f64> = (0..n)
        .map(|i| (i as f64 * 0.754877666 + 0.1).fract() - 0.5)
        .collect();
    for _ in 0..4 {
        let mut w = lu.solve(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in w.iter_mut() {
            *x /= norm;
        }
        v = w;
    }
    // Fix a deterministic overall sign: first entry of significant size
    // positive (callers re-fix signs by their own conventions anyway).
    if let Some(&lead) = v.iter().find(|x| x.abs() > 1e-8) {
        if lead < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
    v
}

/// LU factorization with partial pivoting of a shifted tridiagonal matrix;
/// row swaps introduce a second superdiagonal.
struct TridiagLu {
    n: usize,
    low: Vec<f64>,
    diag: Vec<f64>,
    up1: Vec<f64>,
    up2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(d: &[f64], e: &[f64], shift: f64) -> Self {
        let n = d.len();
        let mut a: Vec<f64> = vec![0.0; n]; // subdiagonal of working matrix
        let mut b: Vec<f64> = d.iter().map(|&x| x - shift).collect();
        let mut c: Vec<f64> = vec![0.0; n];
        let mut f: Vec<f64> = vec![0.0; n];
        for i in 0..n - 1 {
            a[i + 1] = e[i];
            c[i] = e[i];
        }
        let mut low = vec![0.0; n];
        let mut swapped = vec![false; n];
        for i in 0..n - 1 {
            if a[i + 1].abs() > b[i].abs() {
                swapped[i] = true;
                // Swap row i with row i+1.
                std::mem::swap(&mut b[i], &mut a[i + 1]);
                let bi1 = b[i + 1];
                b[i + 1] = c[i];
                c[i] = bi1;
                // Row i+1's old c moves into the new second superdiagonal.
                f[i] = c[i + 1];
                c[i + 1] = 0.0;
                // After swap the working names are: b[i] pivot, c[i], f[i]
                // row i; a[i+1], b[i+1], c[i+1] row i+1.
            }
            let pivot = if b[i] == 0.0 { 1e-300 } else { b[i] };
            let l = a[i + 1] / pivot;
            low[i] = l;
            b[i + 1] -= l * c[i];
            if i + 2 < n {
                c[i + 1] -= l * f[i];
            }
        }
        TridiagLu {
            n,
            low,
            diag: b,
            up1: c,
            up2: f,
            swapped,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = rhs.to_vec();
        for i in 0..n - 1 {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.low[i] * y[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.up1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.up2[i] * x[i + 2];
            }
            let pivot = if self.diag[i] == 0.0 { 1e-300 } else { self.diag[i] };
            x[i] = s / pivot;
        }
        x
    }
}

/// One radial Neumann mode: eigenvalue, node values (normalized so that the
/// discrete `integral R^2 w dr = 1`), and the grid it lives on.
#[derive(Debug, Clone)]
pub struct RadialMode {
    pub lambda: f64,
    /// Values at the uniform grid nodes `ra + i h`.
    pub values: Vec<f64>,
}

/// Boundary condition at one end of the radial problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndCondition {
    Neumann,
    Dirichlet,
}

/// Solve `-(w R')' + (q / w) R = lambda w R` on `[ra, rb]`, Neumann both
/// ends, on a uniform grid with `n` nodes; returns all modes with
/// `lambda < lambda_max`, ascending.
pub fn radial_neumann_modes<W: Fn(f64) -> f64>(
    w: &W,
    ra: f64,
    rb: f64,
    q: f64,
    lambda_max: f64,
    n: usize,
) -> Result<Vec<RadialMode>> {
    radial_modes(
        w,
        ra,
        rb,
        q,
        lambda_max,
        n,
        (EndCondition::Neumann, EndCondition::Neumann),
    )
}

/// Same radial problem with a choice of Neumann or Dirichlet condition at
/// each end. Dirichlet nodes are eliminated from the system; the returned
/// value vectors keep the full grid length with zeros there.
pub fn radial_modes<W: Fn(f64) -> f64>(
    w: &W,
    ra: f64,
    rb: f64,
    q: f64,
    lambda_max: f64,
    n: usize,
    bc: (EndCondition, EndCondition),
) -> Result<Vec<RadialMode>> {
    if n < 8 || !(rb > ra) {
        return Err(Error::InvalidInput("bad radial grid".into()));
    }
    let h = (rb - ra) / (n - 1) as f64;
    let r = |i: usize| ra + i as f64 * h;
    // Lumped mass: w_i h (half cells at the ends).
    let mass: Vec<f64> = (0..n)
        .map(|i| {
            let full = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            w(r(i)) * h * full
        })
        .collect();
    // Stiffness in flux form with midpoint weights, plus the potential term
    // integrated with the same lumped rule.
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let wm = w(r(i) + 0.5 * h) / h;
        diag[i] += wm;
        diag[i + 1] += wm;
        off[i] = -wm;
    }
    for (i, d) in diag.iter_mut().enumerate() {
        let full = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        *d += q / w(r(i)) * h * full;
    }
    // Dirichlet ends drop out of the active index range; the flux coupling
    // to the eliminated (zero-valued) node already sits in its neighbor's
    // diagonal entry.
    let i0 = usize::from(bc.0 == EndCondition::Dirichlet);
    let i1 = n - usize::from(bc.1 == EndCondition::Dirichlet);
    let na = i1 - i0;
    // Reduce A x = lambda M x to standard form with D = M^{1/2}.
    let sqm: Vec<f64> = mass[i0..i1].iter().map(|m| m.sqrt()).collect();
    let sd: Vec<f64> = (0..na).map(|i| diag[i0 + i] / mass[i0 + i]).collect();
    let se: Vec<f64> = (0..na - 1)
        .map(|i| off[i0 + i] / (sqm[i] * sqm[i + 1]))
        .collect();
    let eigs = tridiag_eigs_below(&sd, &se, lambda_max);
    let mut out = Vec::with_capacity(eigs.len());
    for lambda in eigs {
        let y = tridiag_eigenvector(&sd, &se, lambda);
        // Back-transform and normalize in the weighted measure.
        let mut v = vec![0.0; n];
        for i in 0..na {
            v[i0 + i] = y[i] / sqm[i];
        }
        let norm2: f64 = (0..n).map(|i| mass[i] * v[i] * v[i]).sum();
        let norm = norm2.sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        out.push(RadialMode { lambda, values: v });
    }
    Ok(out)
}
