use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inner and outer radii of the warped annulus.
pub const ANNULUS_R_IN: f64 = 1.0;
pub const ANNULUS_R_OUT: f64 = 4.0;

/// A point in intrinsic coordinates. The meaning of `(u, v)` depends on the
/// manifold variant: `x` (with `v = 0`) for the interval, `(x, y)` for the
/// rectangle, `(r, theta)` for the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub u: f64,
    pub v: f64,
}

impl Point {
    pub fn on_interval(x: f64) -> Self {
        Point { u: x, v: 0.0 }
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Point { u: x, v: y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Point { u: r, v: theta }
    }
}

/// Smooth bump profile for the annulus warp:
/// `chi(r) = amplitude * exp(-1/(1-s^2))` with `s = (r - center)/halfwidth`,
/// zero outside `(center - halfwidth, center + halfwidth)`. Scaling the
/// amplitude by `A` is the same deformation family as scaling `eps` by
/// `1/A`, so the amplitude selects how deeply pinched a given `eps` range
/// is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub center: f64,
    pub halfwidth: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_amplitude() -> f64 {
    1.0
}

impl Default for BumpSpec {
    fn default() -> Self {
        // Supported on (2, 3), strictly positive inside.
        BumpSpec {
            center: 2.5,
            halfwidth: 0.5,
            amplitude: 1.0,
        }
    }
}

impl BumpSpec {
    pub fn chi(&self, r: f64) -> f64 {
        let s = (r - self.center) / self.halfwidth;
        if s.abs() >= 1.0 {
            0.0
        } else {
            self.amplitude * (-1.0 / (1.0 - s * s)).exp()
        }
    }
}

/// The model manifold families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
pub enum ModelManifold {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
    WarpedAnnulus { eps: f64, bump: BumpSpec },
}

impl ModelManifold {
    pub fn interval(length: f64) -> Self {
        ModelManifold::Interval { length }
    }

    pub fn rectangle(lx: f64, ly: f64) -> Self {
        ModelManifold::Rectangle { lx, ly }
    }

    pub fn warped_annulus(eps: f64) -> Self {
        ModelManifold::WarpedAnnulus {
            eps,
            bump: BumpSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ModelManifold::Interval { length } => length.is_finite() && length > 0.0,
            ModelManifold::Rectangle { lx, ly } => {
                lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0
            }
            ModelManifold::WarpedAnnulus { eps, bump } => {
                eps.is_finite()
                    && eps > 0.0
                    && bump.halfwidth > 0.0
                    && bump.amplitude.is_finite()
                    && bump.amplitude > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("bad manifold parameters: {self:?}")))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelManifold::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Warp weight `w(r)` of the annulus length element
    /// `dr^2 + w(r)^2 dtheta^2`; strictly positive on `[1, 4]`.
    pub fn warp(&self, r: f64) -> f64 {
        match self {
            ModelManifold::WarpedAnnulus { eps, bump } => {
                r / (1.0 + bump.chi(r) / eps).sqrt()
            }
            _ => panic!("warp weight only defined for the annulus"),
        }
    }

    pub fn check_point(&self, p: Point) -> Result<()> {
        let tol = 1e-12;
        let inside = match *self {
            ModelManifold::Interval { length } => p.u >= -tol && p.u <= length + tol,
            ModelManifold::Rectangle { lx, ly } => {
                p.u >= -tol && p.u <= lx + tol && p.v >= -tol && p.v <= ly + tol
            }
            ModelManifold::WarpedAnnulus { .. } => {
                p.u >= ANNULUS_R_IN - tol && p.u <= ANNULUS_R_OUT + tol && p.v.is_finite()
            }
        };
        if inside {
            Ok(())
        } else {
            Err(Error::PointOutsideDomain(format!("{p:?}")))
        }
    }

    /// Riemannian volume (length / area) of the manifold.
    pub fn volume(&self) -> f64 {
        match *self {
            ModelManifold::Interval { length } => length,
            ModelManifold::Rectangle { lx, ly } => lx * ly,
            ModelManifold::WarpedAnnulus { .. } => {
                // 2*pi * integral of w(r) dr, Simpson on a fine grid.
                let n = 4000;
                let h = (ANNULUS_R_OUT - ANNULUS_R_IN) / n as f64;
                let mut acc = 0.0;
                for i in 0..n {
                    let a = ANNULUS_R_IN + i as f64 * h;
                    acc += h / 6.0
                        * (self.warp(a) + 4.0 * self.warp(a + 0.5 * h) + self.warp(a + h));
                }
                2.0 * std::f64::consts::PI * acc
            }
        }
    }

    /// Exact diameter where known; an upper bound for the annulus.
    pub fn diameter_upper_bound(&self) -> f64 {
        match *self {
            ModelManifold::Interval { length } => length,
            ModelManifold::Rectangle { lx, ly } => (lx * lx + ly * ly).sqrt(),
            ModelManifold::WarpedAnnulus { .. } => {
                // Radial travel plus half of the longest boundary circle.
                (ANNULUS_R_OUT - ANNULUS_R_IN) + std::f64::consts::PI * ANNULUS_R_OUT
            }
        }
    }
}

/// Recorded bounded-geometry class bounds (metadata only; curvature and
/// second fundamental form are not computed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassBounds {
    pub lambda: f64,
    pub d: f64,
    pub i0: f64,
}

impl ClassBounds {
    pub fn validate_for(&self, m: &ModelManifold) -> Result<()> {
        if !(self.lambda > 0.0 && self.d > 0.0 && self.i0 > 0.0) {
            return Err(Error::InvalidInput("class bounds must be positive".into()));
        }
        if self.d < m.diameter_upper_bound() {
            return Err(Error::InvalidInput(format!(
                "declared diameter bound {} below diameter of {m:?}",
                self.d
            )));
        }
        // Injectivity radius oracle only known for the flat variants.
        let inj = match *m {
            ModelManifold::Interval { length } => Some(length / 2.0),
            ModelManifold::Rectangle { lx, ly } => Some(0.5 * lx.min(ly)),
            ModelManifold::WarpedAnnulus { .. } => None,
        };
        if let Some(inj) = inj {
            if self.i0 > inj {
                return Err(Error::InvalidInput(format!(
                    "declared injectivity bound {} above oracle value {inj}",
                    self.i0
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bump_support() {
        let b = BumpSpec::default();
        assert_eq!(b.chi(1.9), 0.0);
        assert_eq!(b.chi(3.1), 0.0);
        assert!(b.chi(2.5) > 0.0);
        assert!((b.chi(2.5) - (-1.0_f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn warp_positive() {
        let m = ModelManifold::warped_annulus(0.01);
        let mut r = 1.0;
        while r <= 4.0 {
            assert!(m.warp(r) > 0.0, "warp nonpositive at r={r}");
            r += 0.01;
        }
        // chi vanishes at the boundary radii, so the warp is the flat one.
        assert!((m.warp(1.0) - 1.0).abs() < 1e-15);
        assert!((m.warp(4.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn volumes() {
        assert!((ModelManifold::interval(PI).volume() - PI).abs() < 1e-15);
        assert!((ModelManifold::rectangle(PI, PI).volume() - PI * PI).abs() < 1e-12);
        // eps -> infinity turns the warp off; area = pi*(16-1).
        let m = ModelManifold::WarpedAnnulus {
            eps: 1e12,
            bump: BumpSpec::default(),
        };
        assert!((m.volume() - 15.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn manifold_json_round_trip() {
        let m = ModelManifold::warped_annulus(0.1);
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"variant\":\"warped_annulus\""));
        let m2: ModelManifold = serde_json::from_str(&s).unwrap();
        assert_eq!(m, m2);
    }
}
