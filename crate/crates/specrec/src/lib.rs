//! Boundary spectral data for model Riemannian manifolds with boundary, and
//! approximate reconstruction of the manifold as a finite metric space.
//!
//! The library covers the full loop:
//!
//! * [`geometry`] — model manifolds (interval, flat rectangle, warped annulus),
//!   boundary meshes, and exact distance/volume oracles used for grading;
//! * [`spectral`] — Neumann eigenvalues and boundary traces of eigenfunctions
//!   (the inverse data), plus truncation and seeded perturbation;
//! * [`topology`] — delta-closeness of two spectral datasets: eigenvalue
//!   clustering, per-cluster orthogonal alignment of traces, and a bisection
//!   search for the smallest feasible delta;
//! * [`control`] — Fourier coefficients of boundary-controlled waves, the
//!   control functional and its constrained minimization, and the derived
//!   approximate volumes of domains of influence;
//! * [`dnet`] — volumes of shell domains by set algebra over domains of
//!   influence and the resulting net of approximate boundary distance
//!   functions;
//! * [`reconstruct`] — equipping the net with an approximate intrinsic metric
//!   (aligned pairs, comparison triangles, near-boundary estimates, shortest
//!   path completion);
//! * [`gh`] — Gromov-Hausdorff and Hausdorff distances used to grade results;
//! * [`pipeline`] — config-driven experiment runner and stability sweeps.

pub mod control;
pub mod dnet;
pub mod error;
pub mod geometry;
pub mod gh;
pub mod metric;
pub mod pipeline;
pub mod reconstruct;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
pub use metric::FiniteMetricSpace;
