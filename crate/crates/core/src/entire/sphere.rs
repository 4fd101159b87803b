//! Quasi-uniform sampling and local frames on the unit sphere in `R^3`.
//!
//! The barrier envelopes are suprema/infima over a sphere of directions;
//! they are evaluated by scanning a fixed quasi-uniform sample set and
//! then refining locally around the extremal direction.  The golden-angle
//! (Fibonacci) spiral gives a deterministic point set whose nearest
//! neighbor distance shrinks like `1/sqrt(count)`, which is all the scan
//! needs; no randomness is involved.

use crate::{Error, Result};

/// Deterministic golden-angle spiral on the unit sphere.
///
/// Points have exactly unit norm; consecutive points wind around the
/// vertical axis by the golden angle while the height descends uniformly
/// from near the north pole to near the south pole.
pub fn fibonacci_sphere(count: usize) -> Result<Vec<Vec<f64>>> {
    if count < 8 {
        return Err(Error::DegenerateSamples(format!(
            "spherical sample set needs at least 8 points, got {count}"
        )));
    }
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    let mut points = Vec::with_capacity(count);
    for k in 0..count {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
        let rho = (1.0 - z * z).sqrt();
        let phi = golden_angle * k as f64;
        points.push(vec![rho * phi.cos(), rho * phi.sin(), z]);
    }
    Ok(points)
}

/// An orthonormal basis `(t1, t2)` of the tangent plane at a unit vector.
///
/// Built from the coordinate axis least aligned with the direction, so
/// the basis is well conditioned everywhere on the sphere.
pub fn tangent_basis(dir: &[f64]) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(dir.len(), 3);
    let mut axis = [0.0; 3];
    let least = (0..3)
        .min_by(|&i, &j| dir[i].abs().partial_cmp(&dir[j].abs()).expect("finite direction"))
        .expect("three components");
    axis[least] = 1.0;
    let t1 = normalize(&cross(&axis, dir));
    let t2 = cross(dir, &t1);
    (t1, t2)
}

/// A ring of `count` unit directions at angular distance `delta` around
/// `center`, used by the envelope refinement.
pub fn ring_directions(center: &[f64], delta: f64, count: usize) -> Vec<Vec<f64>> {
    let (t1, t2) = tangent_basis(center);
    let (sd, cd) = delta.sin_cos();
    (0..count)
        .map(|j| {
            let a = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
            let (sa, ca) = a.sin_cos();
            let v: Vec<f64> = (0..3)
                .map(|i| cd * center[i] + sd * (ca * t1[i] + sa * t2[i]))
                .collect();
            normalize(&v)
        })
        .collect()
}

/// Unit vector in the direction of `v`.
pub fn normalize(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    debug_assert!(n > 0.0, "cannot normalize the zero vector");
    v.iter().map(|x| x / n).collect()
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spiral_points_are_unit_and_spread() {
        let pts = fibonacci_sphere(256).unwrap();
        assert_eq!(pts.len(), 256);
        for p in &pts {
            let n: f64 = p.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
        // Quasi-uniformity: the closest pair is not much closer than the
        // mean spacing ~ sqrt(4 pi / count) ~ 0.22.
        let mut min_d2 = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d2: f64 =
                    (0..3).map(|k| (pts[i][k] - pts[j][k]).powi(2)).sum();
                min_d2 = min_d2.min(d2);
            }
        }
        assert!(min_d2.sqrt() > 0.08, "closest pair {}", min_d2.sqrt());
        assert!(fibonacci_sphere(4).is_err());
    }

    #[test]
    fn tangent_frames_are_orthonormal() {
        for dir in fibonacci_sphere(32).unwrap() {
            let (t1, t2) = tangent_basis(&dir);
            let dot = |a: &[f64], b: &[f64]| -> f64 {
                a.iter().zip(b).map(|(x, y)| x * y).sum()
            };
            assert!(dot(&t1, &t1).sqrt() - 1.0 < 1e-12);
            assert!(dot(&t2, &t2).sqrt() - 1.0 < 1e-12);
            assert!(dot(&t1, &dir).abs() < 1e-12);
            assert!(dot(&t2, &dir).abs() < 1e-12);
            assert!(dot(&t1, &t2).abs() < 1e-12);
        }
    }

    #[test]
    fn rings_surround_their_center_at_fixed_angle() {
        let center = normalize(&[1.0, 2.0, -0.5]);
        for dir in ring_directions(&center, 0.1, 8) {
            let cosang: f64 = dir.iter().zip(&center).map(|(a, b)| a * b).sum();
            assert!((cosang - 0.1_f64.cos()).abs() < 1e-12);
        }
    }
}
