//! Deterministic interior nets and exact finite metric spaces on them.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::annulus::AnnulusOracle;
use crate::geometry::manifold::{ModelManifold, Point, ANNULUS_R_IN, ANNULUS_R_OUT};
use crate::metric::FiniteMetricSpace;

/// Sample a deterministic `sigma`-net of the manifold: every point lies
/// within `sigma` of some net point. Grid-based, no randomness.
pub fn sample_interior_net(m: &ModelManifold, sigma: f64) -> Result<Vec<Point>> {
    m.validate()?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput(format!("nonpositive net scale {sigma}")));
    }
    let mut pts = Vec::new();
    match *m {
        ModelManifold::Interval { length } => {
            // Centers spaced 2*sigma cover with radius sigma; use spacing
            // sigma for slack.
            let n = (length / sigma).ceil() as usize;
            let h = length / n as f64;
            for k in 0..n {
                pts.push(Point::on_interval((k as f64 + 0.5) * h));
            }
        }
        ModelManifold::Rectangle { lx, ly } => {
            // Cell half-diagonal <= sigma when each spacing <= sigma*sqrt(2).
            let s = sigma * std::f64::consts::SQRT_2;
            let nx = (lx / s).ceil() as usize;
            let ny = (ly / s).ceil() as usize;
            let (hx, hy) = (lx / nx as f64, ly / ny as f64);
            for i in 0..nx {
                for j in 0..ny {
                    pts.push(Point::xy((i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy));
                }
            }
        }
        ModelManifold::WarpedAnnulus { .. } => {
            // Radial rings spaced sigma; on each ring, angular spacing so the
            // circumferential step costs at most sigma. Radial + angular
            // detour then reaches any point within sigma.
            let nr = ((ANNULUS_R_OUT - ANNULUS_R_IN) / sigma).ceil() as usize;
            let dr = (ANNULUS_R_OUT - ANNULUS_R_IN) / nr as f64;
            for i in 0..nr {
                let r = ANNULUS_R_IN + (i as f64 + 0.5) * dr;
                // Warp weight on the ring band, sampled at the band edges and
                // center; w is smooth and slowly varying at these scales.
                let wmax = [r - 0.5 * dr, r, r + 0.5 * dr]
                    .iter()
                    .map(|&rr| m.warp(rr.clamp(ANNULUS_R_IN, ANNULUS_R_OUT)))
                    .fold(0.0_f64, f64::max);
                let nth = ((TAU * wmax) / sigma).ceil().max(1.0) as usize;
                let dth = TAU / nth as f64;
                for j in 0..nth {
                    pts.push(Point::polar(r, (j as f64 + 0.5) * dth));
                }
            }
        }
    }
    Ok(pts)
}

/// Measure the covering radius of `net` against a dense probe grid: the
/// largest probe-to-net distance found. Distances are exact for the flat
/// variants; for the annulus a coordinate-path upper bound is used, so the
/// returned value is an upper bound on the true covering radius over the
/// probe set.
pub fn verify_net_coverage(m: &ModelManifold, net: &[Point], probe_h: f64) -> Result<f64> {
    m.validate()?;
    if net.is_empty() {
        return Err(Error::InvalidInput("empty net".into()));
    }
    if !(probe_h > 0.0) {
        return Err(Error::InvalidInput(format!("nonpositive probe spacing {probe_h}")));
    }
    let probes = probe_points(m, probe_h);
    let mut worst = 0.0_f64;
    for p in probes {
        let mut best = f64::INFINITY;
        for &q in net {
            best = best.min(upper_bound_distance(m, p, q));
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Cheap upper bound on the geodesic distance: exact for the flat variants,
/// radial-then-angular coordinate path for the annulus.
pub fn upper_bound_distance(m: &ModelManifold, a: Point, b: Point) -> f64 {
    match *m {
        ModelManifold::Interval { .. } => (a.u - b.u).abs(),
        ModelManifold::Rectangle { .. } => ((a.u - b.u).powi(2) + (a.v - b.v).powi(2)).sqrt(),
        ModelManifold::WarpedAnnulus { .. } => {
            let mut dth = (a.v - b.v).rem_euclid(TAU);
            if dth > PI {
                dth = TAU - dth;
            }
            // Travel the angular arc at whichever of the two radii is
            // cheaper, plus the radial leg.
            let w = m.warp(a.u).min(m.warp(b.u));
            (a.u - b.u).abs() + w * dth
        }
    }
}

fn probe_points(m: &ModelManifold, h: f64) -> Vec<Point> {
    let mut pts = Vec::new();
    match *m {
        ModelManifold::Interval { length } => {
            let n = (length / h).ceil() as usize;
            for k in 0..=n {
                pts.push(Point::on_interval(length * k as f64 / n as f64));
            }
        }
        ModelManifold::Rectangle { lx, ly } => {
            let nx = (lx / h).ceil() as usize;
            let ny = (ly / h).ceil() as usize;
            for i in 0..=nx {
                for j in 0..=ny {
                    pts.push(Point::xy(lx * i as f64 / nx as f64, ly * j as f64 / ny as f64));
                }
            }
        }
        ModelManifold::WarpedAnnulus { .. } => {
            let nr = ((ANNULUS_R_OUT - ANNULUS_R_IN) / h).ceil() as usize;
            for i in 0..=nr {
                let r = ANNULUS_R_IN + (ANNULUS_R_OUT - ANNULUS_R_IN) * i as f64 / nr as f64;
                let nth = ((TAU * m.warp(r)) / h).ceil().max(4.0) as usize;
                for j in 0..nth {
                    pts.push(Point::polar(r, TAU * j as f64 / nth as f64));
                }
            }
        }
    }
    pts
}

/// Exact pairwise distance matrix on a list of points, as a finite metric
/// space. Labels are the point indices. For the annulus the matrix is
/// symmetrized and closed under shortest paths to absorb the solver
/// tolerance before metric validation.
pub fn metric_space_from_points(m: &ModelManifold, points: &[Point]) -> Result<FiniteMetricSpace> {
    for &p in points {
        m.check_point(p)?;
    }
    let n = points.len();
    let mut d = vec![vec![0.0_f64; n]; n];
    match m {
        ModelManifold::WarpedAnnulus { eps, bump } => {
            let oracle = AnnulusOracle::new(*eps, *bump);
            for i in 0..n {
                let targets: Vec<Point> = points[i + 1..].to_vec();
                let row = oracle.distances_to_many(points[i], &targets, 1e-4);
                for (k, v) in row.into_iter().enumerate() {
                    d[i][i + 1 + k] = v;
                    d[i + 1 + k][i] = v;
                }
            }
        }
        _ => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = super::true_distance(m, points[i], points[j])?;
                    d[i][j] = v;
                    d[j][i] = v;
                }
            }
        }
    }
    // Shortest-path closure: removes small triangle violations left by the
    // numerical annulus oracle, never increases any entry.
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                    d[j][i] = via;
                }
            }
        }
    }
    let labels = (0..n).map(|i| i.to_string()).collect();
    FiniteMetricSpace::new(labels, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_net_covers() {
        let m = ModelManifold::interval(PI);
        let net = sample_interior_net(&m, 0.3).unwrap();
        let cover = verify_net_coverage(&m, &net, 0.05).unwrap();
        assert!(cover <= 0.3, "covering radius {cover}");
    }

    #[test]
    fn rectangle_net_covers() {
        let m = ModelManifold::rectangle(PI, PI);
        let net = sample_interior_net(&m, 0.5).unwrap();
        let cover = verify_net_coverage(&m, &net, 0.1).unwrap();
        assert!(cover <= 0.5, "covering radius {cover}");
    }

    #[test]
    fn annulus_net_covers() {
        let m = ModelManifold::warped_annulus(0.5);
        let net = sample_interior_net(&m, 0.6).unwrap();
        let cover = verify_net_coverage(&m, &net, 0.15).unwrap();
        assert!(cover <= 0.6, "covering radius {cover}");
    }

    #[test]
    fn metric_space_matches_interval_geometry() {
        let m = ModelManifold::interval(2.0);
        let pts = vec![
            Point::on_interval(0.0),
            Point::on_interval(0.5),
            Point::on_interval(2.0),
        ];
        let ms = metric_space_from_points(&m, &pts).unwrap();
        assert_eq!(ms.dist(0, 2), 2.0);
        assert_eq!(ms.dist(1, 2), 1.5);
    }

    #[test]
    fn metric_space_annulus_valid() {
        let m = ModelManifold::warped_annulus(1.0);
        let pts = vec![
            Point::polar(1.2, 0.1),
            Point::polar(2.5, 2.0),
            Point::polar(3.9, 4.5),
            Point::polar(1.8, 3.3),
        ];
        let ms = metric_space_from_points(&m, &pts).unwrap();
        assert!(ms.diameter() > 1.0 && ms.diameter() < 15.0);
    }
}
