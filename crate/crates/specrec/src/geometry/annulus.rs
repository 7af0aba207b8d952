//! Distance oracle for the warped annulus.
//!
//! Distances are found in two stages: Dijkstra on a polar tensor grid with a
//! wide stencil picks the globally shortest corridor, and polyline relaxation
//! of that path removes the graph metrication bias. Successive grid doublings
//! provide the convergence check.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use crate::geometry::manifold::{BumpSpec, Point, ANNULUS_R_IN, ANNULUS_R_OUT};

const GAUSS3: [(f64, f64); 3] = [
    (0.112701665379258, 0.277777777777778),
    (0.5, 0.444444444444444),
    (0.887298334620742, 0.277777777777778),
];

#[derive(Debug, Clone, Copy)]
pub struct AnnulusOracle {
    eps: f64,
    bump: BumpSpec,
}

impl AnnulusOracle {
    pub fn new(eps: f64, bump: BumpSpec) -> Self {
        AnnulusOracle { eps, bump }
    }

    pub fn warp(&self, r: f64) -> f64 {
        r / (1.0 + self.bump.chi(r) / self.eps).sqrt()
    }

    fn warp_prime(&self, r: f64) -> f64 {
        let chi = self.bump.chi(r);
        let s = (r - self.bump.center) / self.bump.halfwidth;
        let chi_prime = if s.abs() >= 1.0 {
            0.0
        } else {
            chi * (-2.0 * s / ((1.0 - s * s) * (1.0 - s * s))) / self.bump.halfwidth
        };
        let q = 1.0 + chi / self.eps;
        q.powf(-0.5) - 0.5 * r * q.powf(-1.5) * chi_prime / self.eps
    }

    /// Length of the straight coordinate segment between two (r, theta)
    /// points, theta already unwrapped.
    fn segment_length(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let dr = b.0 - a.0;
        let dth = b.1 - a.1;
        let mut acc = 0.0;
        for (t, w) in GAUSS3 {
            let r = a.0 + t * dr;
            let ww = self.warp(r);
            acc += w * (dr * dr + ww * ww * dth * dth).sqrt();
        }
        acc
    }

    /// Gradient of `segment_length` with respect to the endpoint `b`.
    fn segment_length_grad_b(&self, a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
        let dr = b.0 - a.0;
        let dth = b.1 - a.1;
        let mut gr = 0.0;
        let mut gth = 0.0;
        for (t, w) in GAUSS3 {
            let r = a.0 + t * dr;
            let ww = self.warp(r);
            let len = (dr * dr + ww * ww * dth * dth).sqrt().max(1e-300);
            gr += w * (dr + ww * self.warp_prime(r) * t * dth * dth) / len;
            gth += w * (ww * ww * dth) / len;
        }
        (gr, gth)
    }

    fn polyline_length(&self, path: &[(f64, f64)]) -> f64 {
        path.windows(2).map(|s| self.segment_length(s[0], s[1])).sum()
    }

    /// Geodesic distance between two points, via Dijkstra plus relaxation,
    /// with successive grid doublings until agreement within `tol`.
    pub fn distance(&self, x: Point, y: Point, tol: f64) -> f64 {
        let mut prev: Option<f64> = None;
        let mut nr = 81;
        let mut nth = 161;
        for _ in 0..4 {
            let grid = Grid::new(nr, nth);
            let (dist, prev_node) = self.dijkstra(&grid, grid.snap(x), Some(grid.snap(y)));
            let raw = self.grid_path(&grid, &prev_node, grid.snap(y));
            debug_assert!(dist[grid.snap(y)].is_finite());
            let path = fix_endpoints(raw, x, y);
            let len = self.relax(path, tol * 0.1);
            if let Some(p) = prev {
                if (p - len).abs() < tol {
                    return len.min(p);
                }
            }
            prev = Some(len);
            nr = nr * 2 - 1;
            nth *= 2;
        }
        prev.unwrap()
    }

    /// Distances from `x` to many targets using a single Dijkstra sweep,
    /// each path polished by relaxation.
    pub fn distances_to_many(&self, x: Point, targets: &[Point], tol: f64) -> Vec<f64> {
        let grid = Grid::new(161, 321);
        let src = grid.snap(x);
        let (_, prev_node) = self.dijkstra(&grid, src, None);
        targets
            .iter()
            .map(|&t| {
                let raw = self.grid_path(&grid, &prev_node, grid.snap(t));
                let path = fix_endpoints(raw, x, t);
                self.relax(path, tol * 0.1)
            })
            .collect()
    }

    /// Relax a coordinate polyline to a local geodesic and return its length.
    /// Refines hierarchically: relax, subdivide, relax again, until the
    /// length change falls below `tol`.
    fn relax(&self, mut path: Vec<(f64, f64)>, tol: f64) -> f64 {
        if path.len() < 2 {
            return 0.0;
        }
        path = resample(path, 16);
        let mut len = self.relax_at_resolution(&mut path);
        loop {
            if path.len() > 800 {
                return len;
            }
            let mut finer = subdivide(&path);
            let next = self.relax_at_resolution(&mut finer);
            let done = (len - next).abs() < tol;
            path = finer;
            len = next;
            if done {
                return len;
            }
        }
    }

    /// Projected gradient descent with Barzilai-Borwein steps on the interior
    /// vertices of `path`.
    fn relax_at_resolution(&self, path: &mut [(f64, f64)]) -> f64 {
        let m = path.len();
        if m < 3 {
            return self.polyline_length(path);
        }
        let mut grad = vec![(0.0, 0.0); m];
        let mut prev_grad = vec![(0.0, 0.0); m];
        let mut prev_pos: Vec<(f64, f64)> = path.to_vec();
        let mut len = self.polyline_length(path);
        let mut step = 1e-3;
        for iter in 0..4000 {
            for g in grad.iter_mut() {
                *g = (0.0, 0.0);
            }
            for i in 0..m - 1 {
                let gb = self.segment_length_grad_b(path[i], path[i + 1]);
                grad[i + 1].0 += gb.0;
                grad[i + 1].1 += gb.1;
                // By symmetry of the integrand in the two endpoints:
                let ga = self.segment_length_grad_b(path[i + 1], path[i]);
                grad[i].0 += ga.0;
                grad[i].1 += ga.1;
            }
            grad[0] = (0.0, 0.0);
            grad[m - 1] = (0.0, 0.0);
            let gnorm: f64 = grad.iter().map(|g| g.0 * g.0 + g.1 * g.1).sum::<f64>().sqrt();
            if gnorm < 1e-12 {
                break;
            }
            if iter > 0 {
                // BB1 step from successive positions and gradients.
                let mut sy = 0.0;
                let mut ss = 0.0;
                for i in 1..m - 1 {
                    let s = (path[i].0 - prev_pos[i].0, path[i].1 - prev_pos[i].1);
                    let y = (grad[i].0 - prev_grad[i].0, grad[i].1 - prev_grad[i].1);
                    sy += s.0 * y.0 + s.1 * y.1;
                    ss += s.0 * s.0 + s.1 * s.1;
                }
                if sy > 1e-300 {
                    step = (ss / sy).clamp(1e-8, 10.0);
                }
            }
            prev_pos.copy_from_slice(path);
            prev_grad.copy_from_slice(&grad);
            for i in 1..m - 1 {
                path[i].0 = (path[i].0 - step * grad[i].0).clamp(ANNULUS_R_IN, ANNULUS_R_OUT);
                path[i].1 -= step * grad[i].1;
            }
            if iter % 50 == 49 {
                let new_len = self.polyline_length(path);
                if (len - new_len).abs() < 1e-13 * (1.0 + len) {
                    break;
                }
                len = new_len;
            }
        }
        self.polyline_length(path)
    }

    fn dijkstra(
        &self,
        grid: &Grid,
        src: usize,
        stop_at: Option<usize>,
    ) -> (Vec<f64>, Vec<u32>) {
        let n = grid.nr * grid.nth;
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![u32::MAX; n];
        let mut done = vec![false; n];
        let mut heap: BinaryHeap<HeapItem> = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(HeapItem { cost: 0.0, node: src });
        while let Some(HeapItem { cost, node }) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            if stop_at == Some(node) {
                break;
            }
            let (i, j) = (node / grid.nth, node % grid.nth);
            for &(di, dj) in &grid.stencil {
                let ni = i as i64 + di as i64;
                if ni < 0 || ni >= grid.nr as i64 {
                    continue;
                }
                let nj = (j as i64 + dj as i64).rem_euclid(grid.nth as i64) as usize;
                let nn = ni as usize * grid.nth + nj;
                if done[nn] {
                    continue;
                }
                let a = grid.coords(node);
                let mut b = grid.coords(nn);
                // Use the unwrapped angular step of the stencil move.
                b.1 = a.1 + dj as f64 * grid.dth;
                let w = self.segment_length(a, b);
                let nd = cost + w;
                if nd < dist[nn] {
                    dist[nn] = nd;
                    prev[nn] = node as u32;
                    heap.push(HeapItem { cost: nd, node: nn });
                }
            }
        }
        (dist, prev)
    }

    /// Extract the grid path into unwrapped coordinates, target first wound
    /// back to the source.
    fn grid_path(&self, grid: &Grid, prev: &[u32], target: usize) -> Vec<(f64, f64)> {
        let mut rev = vec![grid.coords(target)];
        let mut node = target;
        while prev[node] != u32::MAX {
            let p = prev[node] as usize;
            let cur = *rev.last().unwrap();
            let raw = grid.coords(p);
            let mut dth = raw.1 - cur.1;
            while dth > PI {
                dth -= TAU;
            }
            while dth < -PI {
                dth += TAU;
            }
            rev.push((raw.0, cur.1 + dth));
            node = p;
        }
        rev.reverse();
        rev
    }
}

struct Grid {
    nr: usize,
    nth: usize,
    dr: f64,
    dth: f64,
    stencil: Vec<(i32, i32)>,
}

impl Grid {
    fn new(nr: usize, nth: usize) -> Self {
        let mut stencil = Vec::new();
        let s = 3i32;
        for di in -s..=s {
            for dj in -s..=s {
                if (di, dj) == (0, 0) {
                    continue;
                }
                if gcd(di.unsigned_abs(), dj.unsigned_abs()) == 1 {
                    stencil.push((di, dj));
                }
            }
        }
        Grid {
            nr,
            nth,
            dr: (ANNULUS_R_OUT - ANNULUS_R_IN) / (nr - 1) as f64,
            dth: TAU / nth as f64,
            stencil,
        }
    }

    fn coords(&self, node: usize) -> (f64, f64) {
        let (i, j) = (node / self.nth, node % self.nth);
        (ANNULUS_R_IN + i as f64 * self.dr, j as f64 * self.dth)
    }

    fn snap(&self, p: Point) -> usize {
        let i = (((p.u - ANNULUS_R_IN) / self.dr).round() as i64).clamp(0, self.nr as i64 - 1);
        let j = ((p.v.rem_euclid(TAU) / self.dth).round() as i64).rem_euclid(self.nth as i64);
        i as usize * self.nth + j as usize
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Replace snapped endpoints by exact coordinates, keeping the unwrapped
/// angular branch of the path.
fn fix_endpoints(mut path: Vec<(f64, f64)>, x: Point, y: Point) -> Vec<(f64, f64)> {
    if path.is_empty() {
        return path;
    }
    let rewrap = |target: f64, near: f64| {
        let mut t = target;
        while t - near > PI {
            t -= TAU;
        }
        while t - near < -PI {
            t += TAU;
        }
        t
    };
    let first = path[0];
    path[0] = (x.u, rewrap(x.v, first.1));
    let last = *path.last().unwrap();
    let n = path.len();
    path[n - 1] = (y.u, rewrap(y.v, last.1));
    path
}

/// Resample a polyline to at least `min_vertices` roughly equidistant
/// vertices (in coordinate chord length).
fn resample(path: Vec<(f64, f64)>, min_vertices: usize) -> Vec<(f64, f64)> {
    if path.len() < 2 {
        return path;
    }
    let chord = |a: (f64, f64), b: (f64, f64)| -> f64 {
        ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt()
    };
    let total: f64 = path.windows(2).map(|s| chord(s[0], s[1])).sum();
    if total == 0.0 {
        return vec![path[0], *path.last().unwrap()];
    }
    let m = min_vertices.max(path.len().min(64));
    let mut out = Vec::with_capacity(m + 1);
    out.push(path[0]);
    let step = total / m as f64;
    let mut acc = 0.0;
    let mut next_at = step;
    for s in path.windows(2) {
        let seg = chord(s[0], s[1]);
        while next_at <= acc + seg && out.len() < m {
            let t = (next_at - acc) / seg;
            out.push((
                s[0].0 + t * (s[1].0 - s[0].0),
                s[0].1 + t * (s[1].1 - s[0].1),
            ));
            next_at += step;
        }
        acc += seg;
    }
    out.push(*path.last().unwrap());
    out
}

fn subdivide(path: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(path.len() * 2);
    for s in path.windows(2) {
        out.push(s[0]);
        out.push((0.5 * (s[0].0 + s[1].0), 0.5 * (s[0].1 + s[1].1)));
    }
    out.push(*path.last().unwrap());
    out
}

#[derive(PartialEq)]
struct HeapItem {
    cost: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_oracle() -> AnnulusOracle {
        // Huge eps turns the warp off: the metric is plane polar coordinates.
        AnnulusOracle::new(1e12, BumpSpec::default())
    }

    fn euclid(a: Point, b: Point) -> f64 {
        let (x1, y1) = (a.u * a.v.cos(), a.u * a.v.sin());
        let (x2, y2) = (b.u * b.v.cos(), b.u * b.v.sin());
        ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt()
    }

    #[test]
    fn flat_radial_distance() {
        let o = flat_oracle();
        let d = o.distance(Point::polar(1.0, 0.0), Point::polar(4.0, 0.0), 1e-4);
        assert!((d - 3.0).abs() < 1e-3, "d = {d}");
    }

    #[test]
    fn flat_chord_distance() {
        let o = flat_oracle();
        // Chord between two points on the same side, segment stays in the
        // annulus: plane Euclidean distance.
        let a = Point::polar(3.0, 0.2);
        let b = Point::polar(3.5, 0.9);
        let d = o.distance(a, b, 1e-4);
        assert!((d - euclid(a, b)).abs() < 2e-4, "d = {d} vs {}", euclid(a, b));
    }

    #[test]
    fn wrapping_around_inner_circle() {
        let o = flat_oracle();
        // Antipodal points on the inner boundary: the geodesic hugs the
        // inner circle, length pi * r_in = pi.
        let a = Point::polar(1.0, 0.0);
        let b = Point::polar(1.0, PI);
        let d = o.distance(a, b, 1e-4);
        assert!((d - PI).abs() < 3e-3, "d = {d}");
    }

    #[test]
    fn symmetric_and_triangle() {
        let o = AnnulusOracle::new(0.5, BumpSpec::default());
        let p = [
            Point::polar(1.5, 0.3),
            Point::polar(2.5, 1.2),
            Point::polar(3.7, 4.0),
        ];
        let mut d = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    d[i][j] = o.distance(p[i], p[j], 1e-4);
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                assert!((d[i][j] - d[j][i]).abs() < 2e-3);
                for k in 0..3 {
                    assert!(d[i][j] <= d[i][k] + d[k][j] + 2e-3);
                }
            }
        }
    }

    #[test]
    fn pinch_shortens_circles() {
        // With a strong pinch the warped region's circles are short, so
        // crossing the annulus radially stays near 3 while the same-radius
        // angular trip through the pinch region gets cheaper than flat.
        let flat = flat_oracle();
        let pinched = AnnulusOracle::new(0.05, BumpSpec::default());
        let a = Point::polar(2.5, 0.0);
        let b = Point::polar(2.5, PI / 2.0);
        let df = flat.distance(a, b, 1e-3);
        let dp = pinched.distance(a, b, 1e-3);
        assert!(dp < df, "pinched {dp} !< flat {df}");
    }

    #[test]
    fn many_targets_consistent_with_single() {
        let o = AnnulusOracle::new(1.0, BumpSpec::default());
        let x = Point::polar(2.0, 0.7);
        let targets = [Point::polar(1.0, 0.0), Point::polar(4.0, 2.0)];
        let many = o.distances_to_many(x, &targets, 1e-3);
        for (t, m) in targets.iter().zip(&many) {
            let single = o.distance(x, *t, 1e-4);
            assert!((single - m).abs() < 5e-3, "{single} vs {m}");
        }
    }
}
