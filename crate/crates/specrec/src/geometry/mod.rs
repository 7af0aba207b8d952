//! Model manifolds with boundary, boundary meshes, and exact geometric
//! oracles (distances, volumes, boundary distance functions).
//!
//! Three model families are supported, each in intrinsic coordinates:
//!
//! * `Interval(L)` — points `x in [0, L]`, boundary = two endpoints;
//! * `Rectangle(Lx, Ly)` — flat metric, boundary = the perimeter;
//! * `WarpedAnnulus(eps)` — `(r, theta)` on `[1,4] x [0,2pi)` with length
//!   element `dr^2 + r^2/(1 + eps^-1 chi(r)) dtheta^2`, where `chi` is a
//!   smooth bump supported on `(2, 3)`. Shrinking `eps` pinches the annulus
//!   toward two disconnected components.

mod annulus;
mod manifold;
mod mesh;
mod net;

pub use annulus::AnnulusOracle;
pub use manifold::{BumpSpec, ClassBounds, ModelManifold, Point, ANNULUS_R_IN, ANNULUS_R_OUT};
pub use mesh::{build_boundary_mesh, BoundaryMesh, BoundaryNode};
pub use net::{metric_space_from_points, sample_interior_net, verify_net_coverage};

use crate::error::Result;

/// Geodesic distance between two points of the model manifold.
///
/// Exact for the interval and rectangle. For the warped annulus the value
/// comes from a shortest-path search on a polar graph followed by polyline
/// relaxation of the path; `tol` controls the relaxation convergence check.
pub fn true_distance(m: &ModelManifold, x: Point, y: Point) -> Result<f64> {
    true_distance_with_tol(m, x, y, 1e-3)
}

pub fn true_distance_with_tol(m: &ModelManifold, x: Point, y: Point, tol: f64) -> Result<f64> {
    m.check_point(x)?;
    m.check_point(y)?;
    match m {
        ModelManifold::Interval { .. } => Ok((x.u - y.u).abs()),
        ModelManifold::Rectangle { .. } => Ok(((x.u - y.u).powi(2) + (x.v - y.v).powi(2)).sqrt()),
        ModelManifold::WarpedAnnulus { eps, bump } => {
            let oracle = AnnulusOracle::new(*eps, *bump);
            Ok(oracle.distance(x, y, tol))
        }
    }
}

/// The boundary distance function `r_x`: distances from `x` to every node of
/// the boundary mesh, in mesh node order.
pub fn boundary_distance_function(
    m: &ModelManifold,
    x: Point,
    mesh: &BoundaryMesh,
) -> Result<Vec<f64>> {
    m.check_point(x)?;
    match m {
        ModelManifold::Interval { .. } | ModelManifold::Rectangle { .. } => mesh
            .nodes
            .iter()
            .map(|n| true_distance(m, x, n.point))
            .collect(),
        ModelManifold::WarpedAnnulus { eps, bump } => {
            let oracle = AnnulusOracle::new(*eps, *bump);
            let targets: Vec<Point> = mesh.nodes.iter().map(|n| n.point).collect();
            Ok(oracle.distances_to_many(x, &targets, 1e-3))
        }
    }
}
