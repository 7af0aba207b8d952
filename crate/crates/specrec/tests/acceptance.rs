//! End-to-end acceptance gate. Each numbered check prints one `[PASS]` /
//! `[FAIL]` line; the suite fails if any check does.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specrec::control::fd::{
    finite_speed_check, interval_mode_coefficients, interval_wave_final, SourceEval,
};
use specrec::control::{
    approx_volume, minimize_control, wave_fourier_matrix, BoundaryPartition, ControlParams,
    MultiIndex, WaveSource,
};
use specrec::dnet::{build_distance_net, hausdorff_to_truth, SliceIndex, VolumeTable};
use specrec::geometry::{build_boundary_mesh, AnnulusOracle, BumpSpec, ModelManifold, Point};
use specrec::gh::{gh_distance_bounds, gh_distance_exact, gh_distance_exact_brute};
use specrec::metric::FiniteMetricSpace;
use specrec::pipeline::{
    run_pipeline, ControlSpec, ExperimentConfig, PartitionSpec, CONFIG_SCHEMA,
};
use specrec::reconstruct::{complete_metric, triangle_distance, EdgeEstimate, EdgeMethod};
use specrec::spectral::{
    compute_spectrum, disconnected_limit_spectrum, perturb_dataset, vol_from_phi1, NoiseSpec,
};
use specrec::topology::{optimal_unitary_alignment, spectral_distance, DistanceOpts};

type CheckResult = Result<(), String>;

fn fail(msg: String) -> CheckResult {
    Err(msg)
}

fn within(name: &str, value: f64, tol: f64) -> CheckResult {
    if value.abs() <= tol {
        Ok(())
    } else {
        fail(format!("{name}: |{value:.6e}| exceeds {tol:.1e}"))
    }
}

fn under(name: &str, elapsed: Duration, budget: Duration) -> CheckResult {
    if elapsed <= budget {
        Ok(())
    } else {
        fail(format!("{name} took {elapsed:?}, budget {budget:?}"))
    }
}

/// First-run regression pins. `None` disables the regression comparison
/// (used only while establishing the values).
const PIN_RESIDUALS: Option<[f64; 4]> = Some([
    0.16558129163139976,
    0.11394543186635492,
    0.07621908383682091,
    7.911860914096649e-7,
]);
const PIN_GH_INTERVAL: Option<[f64; 3]> = Some([
    1.4398966328953218,
    1.0564540201990762,
    0.5134074994411462,
]);
const PIN_GH_RECTANGLE: Option<[f64; 3]> = Some([
    2.356194490192345,
    1.5707963267948966,
    1.2344182140762032,
]);

fn check_regression(name: &str, got: &[f64], pin: Option<&[f64]>, tol: f64) -> CheckResult {
    let Some(pin) = pin else {
        println!("  (no pin for {name}; observed {got:?})");
        return Ok(());
    };
    for (g, p) in got.iter().zip(pin) {
        if (g - p).abs() > tol {
            return fail(format!("{name} regression: got {got:?}, pinned {pin:?}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------

/// 01: closed-form Neumann spectra of the interval and the square, and the
/// volume recovered from the constant first trace; everything inside 1 s.
fn check_01_spectra_and_volumes() -> CheckResult {
    let t0 = Instant::now();
    let m = ModelManifold::interval(PI);
    let mesh = build_boundary_mesh(&m, 1.0).map_err(|e| e.to_string())?;
    let d = compute_spectrum(&m, 100.0, &mesh).map_err(|e| e.to_string())?;
    for (k, &lambda) in d.eigenvalues.iter().enumerate() {
        within("interval eigenvalue", lambda - (k * k) as f64, 1e-8)?;
    }
    let v = vol_from_phi1(&d).map_err(|e| e.to_string())?;
    within("interval volume", v - PI, 1e-6)?;

    let m = ModelManifold::rectangle(PI, PI);
    let mesh = build_boundary_mesh(&m, PI / 8.0).map_err(|e| e.to_string())?;
    let d = compute_spectrum(&m, 50.0, &mesh).map_err(|e| e.to_string())?;
    let mut truth: Vec<f64> = (0..8)
        .flat_map(|j| (0..8).map(move |k| (j * j + k * k) as f64))
        .filter(|&l| l <= 50.0)
        .collect();
    truth.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if truth.len() != d.len() {
        return fail(format!(
            "square spectrum has {} values, expected {}",
            d.len(),
            truth.len()
        ));
    }
    for (a, b) in d.eigenvalues.iter().zip(&truth) {
        within("square eigenvalue", a - b, 1e-8)?;
    }
    let v = vol_from_phi1(&d).map_err(|e| e.to_string())?;
    within("square volume", v - PI * PI, 1e-6)?;
    under("spectra and volumes", t0.elapsed(), Duration::from_secs(1))
}

/// 02: columns of the spectral wave matrix (K = N = 8) against a direct
/// finite-difference wave simulation on the interval, inside 30 s.
fn check_02_wave_matrix_vs_fd() -> CheckResult {
    let t0 = Instant::now();
    let m = ModelManifold::interval(PI);
    let mesh = build_boundary_mesh(&m, 1.0).map_err(|e| e.to_string())?;
    let d = compute_spectrum(&m, 60.0, &mesh).map_err(|e| e.to_string())?;
    let p = BoundaryPartition::new(&mesh, vec![vec![0], vec![1]], PI / 6.0)
        .map_err(|e| e.to_string())?;
    let alpha = MultiIndex::new(vec![6, 3]);
    let mat = wave_fourier_matrix(&d, &p, &alpha, 8, 8, PI).map_err(|e| e.to_string())?;
    for n in 0..8 {
        let src = WaveSource {
            coefficients: (0..8).map(|i| if i == n { 1.0 } else { 0.0 }).collect(),
            alpha: alpha.clone(),
            d_time: PI,
            residual: 0.0,
            norm: 0.0,
        };
        let eval = SourceEval::new(&d, &p, &src);
        let nx = 3000;
        let nt = 6 * ((PI / (0.5 * PI / nx as f64)).ceil() as usize / 6 + 1);
        let u = interval_wave_final(
            PI,
            nx,
            nt,
            PI,
            &|t| eval.value(0, t, &p),
            &|t| eval.value(1, t, &p),
        );
        let coeffs = interval_mode_coefficients(&u, PI, 8);
        let col_norm = (0..8).map(|k| mat[(k, n)] * mat[(k, n)]).sum::<f64>().sqrt();
        for k in 0..8 {
            let err = (coeffs[k] - mat[(k, n)]).abs();
            if err > 1e-3 * col_norm.max(1e-6) {
                return fail(format!(
                    "entry ({k},{n}): fd {} vs spectral {}",
                    coeffs[k],
                    mat[(k, n)]
                ));
            }
        }
    }
    under("wave matrix vs fd", t0.elapsed(), Duration::from_secs(30))
}

/// 03: finite propagation speed of a minimized control: the final wave has
/// mass fraction below 1e-3 outside the light cone of its window.
fn check_03_finite_speed() -> CheckResult {
    let m = ModelManifold::interval(PI);
    let mesh = build_boundary_mesh(&m, 1.0).map_err(|e| e.to_string())?;
    let d = compute_spectrum(&m, 120.0, &mesh).map_err(|e| e.to_string())?;
    let p = BoundaryPartition::new(&mesh, vec![vec![0], vec![1]], 0.25)
        .map_err(|e| e.to_string())?;
    let alpha = MultiIndex::new(vec![4, 0]);
    let params = ControlParams {
        n: 6,
        i: 8,
        k: 10,
        c: 100.0,
        sigma: 10.0,
    };
    let src = minimize_control(&d, &p, &alpha, &params, PI).map_err(|e| e.to_string())?;
    let frac = finite_speed_check(&d, &p, &src, 4000).map_err(|e| e.to_string())?;
    if frac < 1e-3 {
        Ok(())
    } else {
        fail(format!("outside-cone mass fraction {frac}"))
    }
}

/// 04: the projected control residual is nonincreasing in the source
/// dimension N over {5, 10, 20, 40} at fixed projection order 40, ends
/// below 0.15 with bounded source norm, and reproduces pinned values.
fn check_04_control_convergence() -> CheckResult {
    let m = ModelManifold::interval(PI);
    let mesh = build_boundary_mesh(&m, 1.0).map_err(|e| e.to_string())?;
    let d = compute_spectrum(&m, 1700.0, &mesh).map_err(|e| e.to_string())?;
    let p = BoundaryPartition::new(&mesh, vec![vec![0], vec![1]], PI / 6.0)
        .map_err(|e| e.to_string())?;
    let alpha = MultiIndex::new(vec![6, 0]);
    let k_proj = 40;
    let c_bound = 50.0;
    let mut residuals = Vec::new();
    let mut prev = f64::INFINITY;
    for n in [5usize, 10, 20, 40] {
        let params = ControlParams {
            n,
            i: k_proj,
            k: k_proj,
            c: c_bound,
            sigma: 10.0,
        };
        let src = minimize_control(&d, &p, &alpha, &params, PI).map_err(|e| e.to_string())?;
        let u = wave_fourier_matrix(&d, &p, &alpha, n, k_proj, PI).map_err(|e| e.to_string())?;
        let a = DVector::from_column_slice(&src.coefficients);
        let mut r = u * a;
        r[0] -= 1.0;
        let resid = r.norm();
        if resid > prev + 1e-6 {
            return fail(format!("residual rose at N={n}: {resid} > {prev}"));
        }
        if src.norm > c_bound * (1.0 + 1e-6) {
            return fail(format!("source norm {} above bound {c_bound}", src.norm));
        }
        residuals.push(resid);
        prev = resid;
    }
    if prev > 0.15 {
        return fail(format!("final residual {prev} above 0.15"));
    }
    check_regression("control residuals", &residuals, PIN_RESIDUALS.as_ref().map(|p| &p[..]), 1e-6)
}

/// 05: approximate volumes of domains of influence on the interval for five
/// window vectors, each within 5% of the total volume, and shell volumes
/// that tile the interval to the same relative tolerance.
fn check_05_volumes() -> CheckResult {
    let m = ModelManifold::interval(PI);
    let mesh = build_boundary_mesh(&m, 1.0).map_err(|e| e.to_string())?;
    let d = compute_spectrum(&m, 400.0, &mesh).map_err(|e| e.to_string())?;
    let eta = 0.25;
    let p = BoundaryPartition::new(&mesh, vec![vec![0], vec![1]], eta)
        .map_err(|e| e.to_string())?;
    let params = ControlParams {
        n: 18,
        i: d.len(),
        k: d.len(),
        c: 1e4,
        sigma: 10.0,
    };
    let tol = 0.05 * PI;
    for (alpha, truth) in [
        (vec![4usize, 0], 1.0),
        (vec![0, 4], 1.0),
        (vec![4, 4], 2.0),
        (vec![2, 6], 2.0),
        (vec![12, 12], PI),
    ] {
        let v = approx_volume(&d, &p, &MultiIndex::new(alpha.clone()), &params, PI)
            .map_err(|e| e.to_string())?;
        if (v - truth).abs() > tol {
            return fail(format!("window {alpha:?}: volume {v} vs true {truth}"));
        }
    }
    // One coarse part holding both endpoints: shells over boundary distance
    // in (0,1), (1,2), (2,3) tile the interval; L = 1 part.
    let p = BoundaryPartition::new_coarse(&mesh, vec![vec![0, 1]], eta)
        .map_err(|e| e.to_string())?;
    let mut table = VolumeTable::new(&d, &p, params, PI).map_err(|e| e.to_string())?;
    let mut total = 0.0;
    for b in [2usize, 6, 10] {
        total += table
            .slice_volume(&SliceIndex::new(vec![b]))
            .map_err(|e| e.to_string())?;
    }
    if (total - PI).abs() > tol {
        return fail(format!("shell tiling {total} vs {PI}"));
    }
    Ok(())
}

/// 06: Hausdorff distance of the distance net to the true profile set is at
/// most 4 eta on interval and rectangle exact data, and does not increase
/// as the spectral cutoff doubles over three steps.
fn check_06_net_hausdorff() -> CheckResult {
    let m = ModelManifold::interval(PI);
    let mesh = build_boundary_mesh(&m, 1.0).map_err(|e| e.to_string())?;
    let eta = PI / 8.0;
    let probe: Vec<Point> = (1..100)
        .map(|i| Point::on_interval(PI * i as f64 / 100.0))
        .collect();
    // At fixed eta the Hausdorff error saturates at the net resolution, so
    // the cutoff trend is read over the data-limited low range; past it the
    // value fluctuates by one member at the 4 eta clamp.
    let mut dhs = Vec::new();
    for cutoff in [50.0, 100.0, 200.0] {
        let d = compute_spectrum(&m, cutoff, &mesh).map_err(|e| e.to_string())?;
        let p = BoundaryPartition::new(&mesh, vec![vec![0], vec![1]], eta)
            .map_err(|e| e.to_string())?;
        let params = ControlParams {
            n: 18.min(d.len()),
            i: d.len(),
            k: d.len(),
            c: 1e4,
            sigma: 10.0,
        };
        let net = build_distance_net(&d, &p, &params, PI, 0.1 * eta).map_err(|e| e.to_string())?;
        let dh = hausdorff_to_truth(&net, &m, &mesh, &probe).map_err(|e| e.to_string())?;
        dhs.push(dh);
    }
    for &dh in &dhs {
        if dh > 4.0 * eta + 1e-12 {
            return fail(format!("interval Hausdorff {dh} vs 4 eta {}", 4.0 * eta));
        }
    }
    for w in dhs.windows(2) {
        if w[1] > w[0] + 1e-6 {
            return fail(format!("Hausdorff rose with the cutoff: {dhs:?}"));
        }
    }

    let m = ModelManifold::rectangle(PI, PI);
    let mesh = build_boundary_mesh(&m, PI / 16.0).map_err(|e| e.to_string())?;
    let d = compute_spectrum(&m, 120.0, &mesh).map_err(|e| e.to_string())?;
    let eta = PI / 4.0;
    let mut sides: Vec<Vec<usize>> = vec![Vec::new(); 4];
    for (i, n) in mesh.nodes.iter().enumerate() {
        let (x, y) = (n.point.u, n.point.v);
        if y == 0.0 {
            sides[0].push(i);
        } else if x == PI {
            sides[1].push(i);
        } else if y == PI {
            sides[2].push(i);
        } else {
            sides[3].push(i);
        }
    }
    let p = BoundaryPartition::new_coarse(&mesh, sides, eta).map_err(|e| e.to_string())?;
    let params = ControlParams {
        n: 18.min(d.len()),
        i: d.len(),
        k: d.len(),
        c: 1e4,
        sigma: 10.0,
    };
    let net = build_distance_net(&d, &p, &params, PI, 0.1 * eta * eta)
        .map_err(|e| e.to_string())?;
    let n_grid = 24;
    let probe: Vec<Point> = (1..n_grid)
        .flat_map(|i| {
            (1..n_grid).map(move |j| {
                Point::xy(PI * i as f64 / n_grid as f64, PI * j as f64 / n_grid as f64)
            })
        })
        .collect();
    let dh = hausdorff_to_truth(&net, &m, &mesh, &probe).map_err(|e| e.to_string())?;
    // The finite probe overestimates the continuum Hausdorff distance by at
    // most its fill radius; 0.2 covers the 24 x 24 grid.
    if dh > 4.0 * eta + 0.2 {
        return fail(format!("rectangle Hausdorff {dh} vs 4 eta {}", 4.0 * eta));
    }
    Ok(())
}

fn pipeline_config(m: ModelManifold, mesh_h: f64, delta_inv: f64, eta: f64, partition: PartitionSpec, out: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        schema: CONFIG_SCHEMA,
        manifold: m,
        mesh_h,
        delta_inv,
        noise: NoiseSpec::none(),
        seed: 1,
        eta,
        partition,
        control: ControlSpec {
            n: 18,
            i: 1000,
            k: 1000,
            c: 1e4,
            sigma: 10.0,
        },
        d_time: PI,
        net_sigma: None,
        rho: None,
        eta_near: None,
        out_dir: out.to_string_lossy().into_owned(),
    }
}

/// 07: full-pipeline upper Gromov-Hausdorff bounds decrease monotonically
/// as eta is refined over three levels, on interval and rectangle exact
/// data, and reproduce pinned first-run values.
fn check_07_pipeline_gh() -> CheckResult {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut interval = Vec::new();
    for eta in [PI / 4.0, PI / 8.0, PI / 16.0] {
        let cfg = pipeline_config(
            ModelManifold::interval(PI),
            1.0,
            400.0,
            eta,
            PartitionSpec::Arc,
            tmp.path(),
        );
        let r = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        interval.push(r.gh_upper.ok_or("missing interval gh upper")?);
    }
    let mut rectangle = Vec::new();
    for eta in [PI / 2.0, PI / 4.0, PI / 8.0] {
        let cfg = pipeline_config(
            ModelManifold::rectangle(PI, PI),
            PI / 16.0,
            120.0,
            eta,
            PartitionSpec::Sides,
            tmp.path(),
        );
        let r = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        rectangle.push(r.gh_upper.ok_or("missing rectangle gh upper")?);
    }
    for (name, seq) in [("interval", &interval), ("rectangle", &rectangle)] {
        for w in seq.windows(2) {
            if w[1] >= w[0] {
                return fail(format!("{name} gh upper not decreasing: {seq:?}"));
            }
        }
    }
    check_regression(
        "interval gh upper",
        &interval,
        PIN_GH_INTERVAL.as_ref().map(|p| &p[..]),
        1e-6,
    )?;
    check_regression(
        "rectangle gh upper",
        &rectangle,
        PIN_GH_RECTANGLE.as_ref().map(|p| &p[..]),
        1e-6,
    )
}

/// 08: spectral distance gauge checks: self-distance below 1e-4, invariance
/// under in-cluster orthogonal mixing within 2e-4, and the Procrustes block
/// alignment matching a dense rotation/reflection grid search to 1e-4.
fn check_08_spectral_gauge() -> CheckResult {
    let m = ModelManifold::interval(PI);
    let mesh = build_boundary_mesh(&m, 1.0).map_err(|e| e.to_string())?;
    let d = compute_spectrum(&m, 20.0, &mesh).map_err(|e| e.to_string())?;
    let dist = spectral_distance(&d, &d, DistanceOpts::default()).map_err(|e| e.to_string())?;
    if dist >= 1e-4 {
        return fail(format!("self distance {dist}"));
    }

    let m = ModelManifold::rectangle(PI, PI);
    let mesh = build_boundary_mesh(&m, PI / 8.0).map_err(|e| e.to_string())?;
    let d = compute_spectrum(&m, 5.0, &mesh).map_err(|e| e.to_string())?;
    let noise = NoiseSpec {
        eig_abs: 0.0,
        trace_l2: 0.0,
        mix_clusters: true,
    };
    let mixed = perturb_dataset(&d, noise, 5.5, 3).map_err(|e| e.to_string())?;
    let dist = spectral_distance(&d, &mixed, DistanceOpts::default()).map_err(|e| e.to_string())?;
    if dist >= 2e-4 {
        return fail(format!("gauge-mixed distance {dist}"));
    }

    let m = ModelManifold::rectangle(PI, 2.0);
    let mesh = build_boundary_mesh(&m, 0.4).map_err(|e| e.to_string())?;
    let d = compute_spectrum(&m, 4.0, &mesh).map_err(|e| e.to_string())?;
    let b1 = vec![d.traces[1].clone(), d.traces[2].clone()];
    let b2 = vec![d.traces[3].clone(), d.traces[4].clone()];
    let al = optimal_unitary_alignment(&b1, &b2, &mesh).map_err(|e| e.to_string())?;
    let mut best = f64::INFINITY;
    let n = 10_000;
    for i in 0..n {
        let th = std::f64::consts::TAU * i as f64 / n as f64;
        for refl in [1.0, -1.0] {
            let (c, s) = (th.cos(), th.sin());
            let mut res2 = 0.0;
            for (a, t2) in b2.iter().enumerate() {
                let (ua, ub) = if a == 0 { (c, -s * refl) } else { (s, c * refl) };
                let diff: Vec<f64> = b1[0]
                    .iter()
                    .zip(&b1[1])
                    .zip(t2.iter())
                    .map(|((x, y), z)| ua * x + ub * y - z)
                    .collect();
                res2 += mesh.inner(&diff, &diff);
            }
            best = best.min(res2.sqrt());
        }
    }
    if (al.residual - best).abs() >= 1e-4 || al.residual > best + 1e-10 {
        return fail(format!("procrustes {} vs grid {best}", al.residual));
    }
    Ok(())
}

/// 09: spectral distance from the pinched annulus to its disconnected limit
/// strictly decreases as the neck parameter shrinks over four values,
/// inside 5 minutes. The deep-pinch bump amplitude puts the listed eps
/// values in the regime where the sub-threshold spectrum already matches
/// the limit's.
fn check_09_degeneration() -> CheckResult {
    let t0 = Instant::now();
    let cutoff = 2.0;
    let bump = BumpSpec {
        amplitude: 1e6,
        ..BumpSpec::default()
    };
    let mesh = build_boundary_mesh(&ModelManifold::WarpedAnnulus { eps: 1.0, bump }, 0.5)
        .map_err(|e| e.to_string())?;
    let limit = disconnected_limit_spectrum(cutoff, &mesh).map_err(|e| e.to_string())?;
    let mut prev = f64::INFINITY;
    let mut dists = Vec::new();
    for eps in [1.0, 0.3, 0.1, 0.03] {
        let m = ModelManifold::WarpedAnnulus { eps, bump };
        let d = compute_spectrum(&m, cutoff, &mesh).map_err(|e| e.to_string())?;
        let dist = spectral_distance(
            &d,
            &limit,
            DistanceOpts {
                tol: 1e-4,
                delta_hi: Some(5.0),
            },
        )
        .map_err(|e| e.to_string())?;
        if !(dist < prev) {
            return fail(format!("distance not strictly decreasing at eps {eps}: {dist} >= {prev}"));
        }
        dists.push(dist);
        prev = dist;
    }
    println!("  (degeneration distances {dists:?})");
    under("degeneration sweep", t0.elapsed(), Duration::from_secs(300))
}

/// 10: metric completion always yields a finite metric space on random
/// connected edge sets; the exact Gromov-Hausdorff distance matches a
/// brute-force oracle (and the point-vs-segment closed form), and the
/// cheap bounds bracket the exact value on every random pair.
fn check_10_metric_and_gh() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..1000 {
        let n = rng.gen_range(3..=8);
        let mut edges = Vec::new();
        for j in 1..n {
            // Random spanning tree edge keeps the graph connected.
            let i = rng.gen_range(0..j);
            edges.push(EdgeEstimate {
                i,
                j,
                value: rng.gen_range(0.1..3.0),
                method: EdgeMethod::Aligned,
                quality: 0.1,
            });
        }
        for _ in 0..rng.gen_range(0..2 * n) {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j {
                edges.push(EdgeEstimate {
                    i,
                    j,
                    value: rng.gen_range(0.1..3.0),
                    method: EdgeMethod::Triangle,
                    quality: 0.3,
                });
            }
        }
        let space = complete_metric(n, &edges)
            .map_err(|e| format!("trial {trial}: completion failed: {e}"))?;
        for i in 0..n {
            if space.dist(i, i) != 0.0 {
                return fail(format!("trial {trial}: nonzero diagonal"));
            }
            for j in 0..n {
                if space.dist(i, j) != space.dist(j, i) {
                    return fail(format!("trial {trial}: asymmetry at ({i},{j})"));
                }
                if i != j && !(space.dist(i, j) > 0.0) {
                    return fail(format!("trial {trial}: nonpositive distance at ({i},{j})"));
                }
                for k in 0..n {
                    if space.dist(i, j) > space.dist(i, k) + space.dist(k, j) + 1e-12 {
                        return fail(format!("trial {trial}: triangle violation at ({i},{j},{k})"));
                    }
                }
            }
        }
    }

    let one = FiniteMetricSpace::new(vec!["p".into()], vec![vec![0.0]])
        .map_err(|e| e.to_string())?;
    let t = 1.7;
    let two = FiniteMetricSpace::new(
        vec!["a".into(), "b".into()],
        vec![vec![0.0, t], vec![t, 0.0]],
    )
    .map_err(|e| e.to_string())?;
    let d = gh_distance_exact(&one, &two).map_err(|e| e.to_string())?;
    within("point vs segment", d - t / 2.0, 1e-12)?;

    let random_space = |rng: &mut ChaCha8Rng, n: usize| {
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0)))
            .collect();
        let labels = (0..n).map(|i| i.to_string()).collect();
        FiniteMetricSpace::from_points(&pts, labels, |a, b| {
            ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
        })
        .unwrap()
    };
    for trial in 0..1000 {
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(2..=5);
        let x = random_space(&mut rng, n);
        let y = random_space(&mut rng, m);
        let exact = gh_distance_exact(&x, &y).map_err(|e| e.to_string())?;
        let brute = gh_distance_exact_brute(&x, &y).map_err(|e| e.to_string())?;
        if (exact - brute).abs() > 1e-12 {
            return fail(format!("trial {trial}: exact {exact} vs brute {brute}"));
        }
        let (lo, hi) = gh_distance_bounds(&x, &y).map_err(|e| e.to_string())?;
        if !(lo <= exact + 1e-12 && exact <= hi + 1e-12) {
            return fail(format!("trial {trial}: bounds [{lo}, {hi}] miss exact {exact}"));
        }
    }
    Ok(())
}

/// 11: Euclidean comparison triangles converge to the true distance on the
/// (positively curved, pinched) annulus at better than first order: the
/// log-log error slope over sigma in {0.4, 0.2, 0.1} is at least 1.7.
fn check_11_comparison_triangles() -> CheckResult {
    let eps = 0.3;
    let bump = BumpSpec::default();
    let m = ModelManifold::WarpedAnnulus { eps, bump };
    let oracle = AnnulusOracle::new(eps, bump);
    let r0 = 2.5;
    let w0 = m.warp(r0);
    let tol = 1e-6;
    let mut pts = Vec::new();
    for sigma in [0.4, 0.2, 0.1] {
        // A geodesic triangle with one radial side: y3 at the bump center,
        // y1 radially inward, y2 along the circle. x1 is the midpoint of
        // the radial side, x2 = y2 the far vertex.
        let y3 = Point::polar(r0, 0.0);
        let y1 = Point::polar(r0 - 2.0 * sigma, 0.0);
        let y2 = Point::polar(r0, 2.0 * sigma / w0);
        let x1 = Point::polar(r0 - sigma, 0.0);
        let d31 = 2.0 * sigma;
        let d32 = oracle.distance(y3, y2, tol);
        let d12 = oracle.distance(y1, y2, tol);
        let est = triangle_distance(d31, d32, d12, sigma, d32).map_err(|e| e.to_string())?;
        let truth = oracle.distance(x1, y2, tol);
        let err = (est - truth).abs().max(1e-15);
        pts.push((sigma.ln(), err.ln()));
    }
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let slope = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - xm) * (p.0 - xm)).sum::<f64>();
    if slope >= 1.7 {
        Ok(())
    } else {
        fail(format!("log-log error slope {slope:.3} below 1.7 ({pts:?})"))
    }
}

#[test]
fn acceptance_criteria() {
    let checks: Vec<(&str, fn() -> CheckResult)> = vec![
        ("01 closed-form spectra and volume recovery", check_01_spectra_and_volumes),
        ("02 spectral wave matrix vs finite differences", check_02_wave_matrix_vs_fd),
        ("03 finite propagation speed of controls", check_03_finite_speed),
        ("04 control residual convergence", check_04_control_convergence),
        ("05 approximate volumes of influence domains", check_05_volumes),
        ("06 distance net Hausdorff accuracy", check_06_net_hausdorff),
        ("07 pipeline GH bound refinement", check_07_pipeline_gh),
        ("08 spectral distance gauge invariance", check_08_spectral_gauge),
        ("09 degeneration toward the disconnected limit", check_09_degeneration),
        ("10 metric completion and GH oracles", check_10_metric_and_gh),
        ("11 comparison triangle convergence order", check_11_comparison_triangles),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        match f() {
            Ok(()) => println!("[PASS] {name}"),
            Err(e) => {
                println!("[FAIL] {name}: {e}");
                failed += 1;
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance check(s) failed");
}
