//! Uniformly convex computational domains.
//!
//! The Dirichlet solver needs three geometric services from a domain:
//! an inside test, the exact crossing point of the boundary along a grid
//! line (for ghost-value interpolation), and an inscribed ball (for the
//! hyperboloid initial guess).

use serde::Serialize;

use crate::{Error, Result};

/// A bounded uniformly convex domain.
#[derive(Debug, Clone, Serialize)]
pub enum ConvexDomain {
    /// Euclidean ball.
    Ball {
        /// Center.
        center: Vec<f64>,
        /// Radius, `> 0`.
        radius: f64,
    },
    /// Sublevel set `{ sum ((x_i - c_i)/a_i)^2 < 1 }` of a uniformly
    /// convex quadratic — an axis-aligned ellipsoid.
    Ellipsoid {
        /// Center.
        center: Vec<f64>,
        /// Semi-axes, all `> 0`.
        semi_axes: Vec<f64>,
    },
}

impl ConvexDomain {
    /// Ball constructor with validation.
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::OutOfRange(format!("ball radius {radius} must be > 0")));
        }
        Ok(ConvexDomain::Ball { center, radius })
    }

    /// Ellipsoid constructor with validation.
    pub fn ellipsoid(center: Vec<f64>, semi_axes: Vec<f64>) -> Result<Self> {
        if semi_axes.len() != center.len() {
            return Err(Error::OutOfRange("center/semi-axis dimension mismatch".into()));
        }
        if semi_axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::OutOfRange(format!("semi-axes {semi_axes:?} must be > 0")));
        }
        Ok(ConvexDomain::Ellipsoid { center, semi_axes })
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        match self {
            ConvexDomain::Ball { center, .. } | ConvexDomain::Ellipsoid { center, .. } => {
                center.len()
            }
        }
    }

    /// The level function `Phi(x)` with the boundary at `Phi = 0`,
    /// negative inside: `|x-c|^2 - R^2` resp. `sum ((x-c)/a)^2 - 1`.
    pub fn level(&self, x: &[f64]) -> f64 {
        match self {
            ConvexDomain::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(xi, ci)| (xi - ci).powi(2)).sum();
                d2 - radius * radius
            }
            ConvexDomain::Ellipsoid { center, semi_axes } => {
                let q: f64 = x
                    .iter()
                    .zip(center)
                    .zip(semi_axes)
                    .map(|((xi, ci), ai)| ((xi - ci) / ai).powi(2))
                    .sum();
                q - 1.0
            }
        }
    }

    /// Strict inside test.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.level(x) < 0.0
    }

    /// First-order estimate of the signed distance to the boundary
    /// (negative inside): `Phi(x) / |grad Phi(x)|`. Exact for balls,
    /// accurate near the boundary for ellipsoids.
    pub fn signed_margin(&self, x: &[f64]) -> f64 {
        let grad: Vec<f64> = match self {
            ConvexDomain::Ball { center, .. } => {
                x.iter().zip(center).map(|(xi, ci)| 2.0 * (xi - ci)).collect()
            }
            ConvexDomain::Ellipsoid { center, semi_axes } => x
                .iter()
                .zip(center)
                .zip(semi_axes)
                .map(|((xi, ci), ai)| 2.0 * (xi - ci) / (ai * ai))
                .collect(),
        };
        let norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.level(x) / norm.max(f64::MIN_POSITIVE.sqrt())
    }

    /// Project a point onto the boundary along the ray from the shape
    /// center. For points very near the boundary this is within
    /// first order of the nearest boundary point; it is exact for balls.
    /// A point at the exact center projects along the first axis.
    pub fn project_to_boundary(&self, x: &[f64]) -> Vec<f64> {
        let (center, mut rel): (&[f64], Vec<f64>) = match self {
            ConvexDomain::Ball { center, .. } | ConvexDomain::Ellipsoid { center, .. } => {
                (center, x.iter().zip(center).map(|(xi, ci)| xi - ci).collect())
            }
        };
        if rel.iter().map(|v| v * v).sum::<f64>() == 0.0 {
            rel[0] = 1.0;
        }
        // Scale factor s with Phi(c + s * rel) = 0; both shapes give a
        // pure quadratic in s.
        let q: f64 = match self {
            ConvexDomain::Ball { radius, .. } => {
                rel.iter().map(|v| v * v).sum::<f64>() / (radius * radius)
            }
            ConvexDomain::Ellipsoid { semi_axes, .. } => rel
                .iter()
                .zip(semi_axes)
                .map(|(v, a)| (v / a).powi(2))
                .sum(),
        };
        let s = 1.0 / q.sqrt();
        center.iter().zip(&rel).map(|(c, v)| c + s * v).collect()
    }

    /// Center and radius of a maximal inscribed ball.
    pub fn inscribed_ball(&self) -> (Vec<f64>, f64) {
        match self {
            ConvexDomain::Ball { center, radius } => (center.clone(), *radius),
            ConvexDomain::Ellipsoid { center, semi_axes } => {
                let r = semi_axes.iter().cloned().fold(f64::INFINITY, f64::min);
                (center.clone(), r)
            }
        }
    }

    /// Tight axis-aligned bounding box `(lo, hi)` per axis.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ConvexDomain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            ConvexDomain::Ellipsoid { center, semi_axes } => (
                center.iter().zip(semi_axes).map(|(c, a)| c - a).collect(),
                center.iter().zip(semi_axes).map(|(c, a)| c + a).collect(),
            ),
        }
    }

    /// Crossing of the boundary along the segment from `from` (inside or
    /// outside) in direction `dir` (unit not required), as the parameter
    /// `t in (0, t_max]` with `from + t * dir` on the boundary. Returns
    /// the smallest positive crossing, or `None`.
    ///
    /// Both supported shapes are quadratic level sets, so the crossing
    /// is a root of a scalar quadratic and is computed exactly.
    pub fn line_crossing(&self, from: &[f64], dir: &[f64], t_max: f64) -> Option<f64> {
        // Phi(from + t dir) = a t^2 + b t + c with the shape's metric.
        let (a, b, c) = match self {
            ConvexDomain::Ball { center, radius } => {
                let rel: Vec<f64> = from.iter().zip(center).map(|(x, c)| x - c).collect();
                let a: f64 = dir.iter().map(|d| d * d).sum();
                let b: f64 = 2.0 * rel.iter().zip(dir).map(|(r, d)| r * d).sum::<f64>();
                let c: f64 = rel.iter().map(|r| r * r).sum::<f64>() - radius * radius;
                (a, b, c)
            }
            ConvexDomain::Ellipsoid { center, semi_axes } => {
                let rel: Vec<f64> = from
                    .iter()
                    .zip(center)
                    .zip(semi_axes)
                    .map(|((x, c), s)| (x - c) / s)
                    .collect();
                let dscaled: Vec<f64> = dir.iter().zip(semi_axes).map(|(d, s)| d / s).collect();
                let a: f64 = dscaled.iter().map(|d| d * d).sum();
                let b: f64 = 2.0 * rel.iter().zip(&dscaled).map(|(r, d)| r * d).sum::<f64>();
                let c: f64 = rel.iter().map(|r| r * r).sum::<f64>() - 1.0;
                (a, b, c)
            }
        };
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 || a == 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        // Smallest positive root.
        let (t1, t2) = ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a));
        for t in [t1.min(t2), t1.max(t2)] {
            if t > 0.0 && t <= t_max {
                return Some(t);
            }
        }
        None
    }

    /// Outward unit normal at a boundary point (gradient of the level
    /// function, normalized).
    pub fn outward_normal(&self, x: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = match self {
            ConvexDomain::Ball { center, .. } => {
                x.iter().zip(center).map(|(xi, ci)| xi - ci).collect()
            }
            ConvexDomain::Ellipsoid { center, semi_axes } => x
                .iter()
                .zip(center)
                .zip(semi_axes)
                .map(|((xi, ci), ai)| (xi - ci) / (ai * ai))
                .collect(),
        };
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut g {
            *v /= norm;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ball_basics() {
        let b = ConvexDomain::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        assert!(b.contains(&[0.5, 0.5, 0.5]));
        assert!(!b.contains(&[0.9, 0.5, 0.5]));
        let t = b.line_crossing(&[0.5, 0.0, 0.0], &[1.0, 0.0, 0.0], 10.0).unwrap();
        assert_abs_diff_eq!(t, 0.5, epsilon = 1e-14);
        let n = b.outward_normal(&[0.0, 1.0, 0.0]);
        assert_abs_diff_eq!(n[1], 1.0, epsilon = 1e-14);
        assert!(ConvexDomain::ball(vec![0.0; 3], 0.0).is_err());
    }

    #[test]
    fn ellipsoid_crossing_and_normal() {
        let e = ConvexDomain::ellipsoid(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        assert!(e.contains(&[1.9, 0.0]));
        assert!(!e.contains(&[0.0, 1.1]));
        let t = e.line_crossing(&[0.0, 0.0], &[1.0, 0.0], 10.0).unwrap();
        assert_abs_diff_eq!(t, 2.0, epsilon = 1e-14);
        // Crossing from outside pointing inward finds the near side.
        let t = e.line_crossing(&[3.0, 0.0], &[-1.0, 0.0], 10.0).unwrap();
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-14);
        let n = e.outward_normal(&[2.0, 0.0]);
        assert_abs_diff_eq!(n[0], 1.0, epsilon = 1e-14);
        let (c, r) = e.inscribed_ball();
        assert_eq!(c, vec![0.0, 0.0]);
        assert_abs_diff_eq!(r, 1.0);
    }

    #[test]
    fn missed_crossings_return_none() {
        let b = ConvexDomain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(b.line_crossing(&[2.0, 0.0], &[0.0, 1.0], 10.0).is_none());
        assert!(b.line_crossing(&[0.0, 0.0], &[1.0, 0.0], 0.5).is_none());
    }
}
