//! Prescribed values at infinity: a function on the sphere of lightlike
//! directions and its finite-difference sample table.
//!
//! The entire problem prescribes, for each unit direction `x`, the limit
//! of `u(rx) - (C~ r - L log r)` as `r` grows; the prescription is a
//! function `f` on the sphere of radius `C~ = sqrt(1 - 1/C^2)`, extended
//! to `R^n \ {0}` zero-homogeneously, `f(C~ x) := f(C~ x / |x|)`.  The
//! barrier construction needs, besides values of `f`, its differential
//! (of the homogeneous extension — a tangential covector) and a constant
//! `M` dominating the quadratic Taylor remainder between sphere points.
//! Both are produced here from a quasi-uniform sample table.

use super::sphere::{fibonacci_sphere, normalize, tangent_basis};
use crate::{Error, Result};

/// Safety factor applied to the sampled quadratic-remainder maximum:
/// finite sampling can only underestimate the true supremum.
const M_SAFETY: f64 = 1.25;

/// Step (radians) for first tangential differences of the evaluator.
const FD_STEP_GRAD: f64 = 1e-5;

/// Step (radians) for second tangential differences.
const FD_STEP_SECOND: f64 = 1e-3;

/// Boundary evaluator: maps a point of the sphere `|x| = C~` to a value.
pub type SphereFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One row of the sample table.
#[derive(Debug, Clone)]
pub struct SphereSample {
    /// Unit direction of the sample.
    pub dir: Vec<f64>,
    /// Value `f(C~ dir)`.
    pub value: f64,
    /// Ambient gradient of the zero-homogeneous extension at `C~ dir`
    /// (a tangential vector: the extension is constant along rays).
    pub grad: Vec<f64>,
    /// Second tangential differences `[d11, d12, d22]` in the local
    /// orthonormal frame of [`tangent_basis`]; a smoothness diagnostic.
    pub second: [f64; 3],
}

/// Prescribed values at infinity with their sampled derivative data.
pub struct BoundaryValueF {
    /// Short name used in reports (`constant`, `cosine-mode`, `table`).
    pub kind: String,
    c_tilde: f64,
    evaluator: SphereFn,
    samples: Vec<SphereSample>,
}

impl std::fmt::Debug for BoundaryValueF {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryValueF")
            .field("kind", &self.kind)
            .field("c_tilde", &self.c_tilde)
            .field("samples", &self.samples.len())
            .finish()
    }
}

impl BoundaryValueF {
    /// Builds the sample table for an arbitrary evaluator.
    ///
    /// `c` is the curvature constant (`> 1`) fixing the sphere radius
    /// `C~ = sqrt(1 - 1/c^2)`; the table holds `sample_count`
    /// golden-angle points with finite-difference first and second
    /// tangential data.
    pub fn new(
        kind: impl Into<String>,
        c: f64,
        evaluator: SphereFn,
        sample_count: usize,
    ) -> Result<Self> {
        if !(c > 1.0) {
            return Err(Error::OutOfRange(format!(
                "curvature constant must exceed 1, got {c}"
            )));
        }
        let c_tilde = (1.0 - 1.0 / (c * c)).sqrt();
        let mut table = Self {
            kind: kind.into(),
            c_tilde,
            evaluator,
            samples: Vec::new(),
        };
        let dirs = fibonacci_sphere(sample_count)?;
        table.samples = dirs
            .into_iter()
            .map(|dir| table.sample_at(&dir))
            .collect::<Result<Vec<_>>>()?;
        Ok(table)
    }

    /// Constant boundary values (any direction maps to `value`).
    pub fn constant(value: f64, c: f64) -> Result<Self> {
        Self::new("constant", c, Box::new(move |_| value), 256)
    }

    /// The cosine mode `f = amplitude * cos(theta)` with `theta` the
    /// polar angle from the positive third axis.
    pub fn cosine_mode(amplitude: f64, c: f64) -> Result<Self> {
        let evaluator: SphereFn = Box::new(move |p: &[f64]| {
            let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            amplitude * p[2] / n
        });
        Self::new("cosine-mode", c, evaluator, 256)
    }

    /// Values from a table of spherical samples `(theta, phi, value)`
    /// with `theta` the polar angle and `phi` the azimuth.
    ///
    /// The evaluator is an inverse-distance-squared blend of the rows
    /// (Shepard interpolation on chordal distance), which reproduces the
    /// rows exactly and is smooth away from them; derivative data is
    /// finite-differenced from the blend like for any other evaluator.
    pub fn from_rows(rows: &[(f64, f64, f64)], c: f64) -> Result<Self> {
        if rows.len() < 4 {
            return Err(Error::DegenerateSamples(format!(
                "need at least 4 table rows, got {}",
                rows.len()
            )));
        }
        let nodes: Vec<(Vec<f64>, f64)> = rows
            .iter()
            .map(|&(theta, phi, value)| {
                let (st, ct) = theta.sin_cos();
                let (sp, cp) = phi.sin_cos();
                (vec![st * cp, st * sp, ct], value)
            })
            .collect();
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                let d2: f64 =
                    (0..3).map(|k| (nodes[i].0[k] - nodes[j].0[k]).powi(2)).sum();
                if d2 < 1e-20 {
                    return Err(Error::DegenerateSamples(format!(
                        "table rows {i} and {j} give coincident directions"
                    )));
                }
            }
        }
        let evaluator: SphereFn = Box::new(move |p: &[f64]| {
            let dir = normalize(p);
            let mut wsum = 0.0;
            let mut vsum = 0.0;
            for (node, value) in &nodes {
                let d2: f64 = (0..3).map(|k| (dir[k] - node[k]).powi(2)).sum();
                if d2 < 1e-24 {
                    return *value;
                }
                let w = 1.0 / (d2 * d2);
                wsum += w;
                vsum += w * value;
            }
            vsum / wsum
        });
        Self::new("table", c, evaluator, 256)
    }

    /// Sphere radius `C~`.
    pub fn c_tilde(&self) -> f64 {
        self.c_tilde
    }

    /// The sample table.
    pub fn samples(&self) -> &[SphereSample] {
        &self.samples
    }

    /// Value of the zero-homogeneous extension at any nonzero point.
    pub fn value_dir(&self, x: &[f64]) -> f64 {
        let dir = normalize(x);
        let p: Vec<f64> = dir.iter().map(|d| d * self.c_tilde).collect();
        (self.evaluator)(&p)
    }

    /// Builds the sample row (value, tangential gradient, second
    /// differences) at a unit direction.
    ///
    /// Derivatives are taken along great circles through the direction:
    /// for a tangent unit vector `t`, the curve
    /// `s -> C~ normalize(dir + s t)` has speed `C~` at `s = 0`, so the
    /// directional derivative of `f` along `t` is the curve derivative
    /// divided by `C~`.
    pub fn sample_at(&self, dir: &[f64]) -> Result<SphereSample> {
        let (t1, t2) = tangent_basis(dir);
        let at = |a: f64, b: f64| -> f64 {
            let v: Vec<f64> = (0..3).map(|i| dir[i] + a * t1[i] + b * t2[i]).collect();
            self.value_dir(&v)
        };
        let value = at(0.0, 0.0);
        if !value.is_finite() {
            return Err(Error::DegenerateSamples(format!(
                "boundary evaluator returned {value} at {dir:?}"
            )));
        }

        let dg = FD_STEP_GRAD;
        let d1 = (at(dg, 0.0) - at(-dg, 0.0)) / (2.0 * dg * self.c_tilde);
        let d2 = (at(0.0, dg) - at(0.0, -dg)) / (2.0 * dg * self.c_tilde);
        let grad: Vec<f64> = (0..3).map(|i| d1 * t1[i] + d2 * t2[i]).collect();

        let ds = FD_STEP_SECOND;
        let c2 = self.c_tilde * self.c_tilde;
        let d11 = (at(ds, 0.0) - 2.0 * value + at(-ds, 0.0)) / (ds * ds * c2);
        let d22 = (at(0.0, ds) - 2.0 * value + at(0.0, -ds)) / (ds * ds * c2);
        let d12 = (at(ds, ds) - at(ds, -ds) - at(-ds, ds) + at(-ds, -ds))
            / (4.0 * ds * ds * c2);
        let second = [d11, d12, d22];
        if grad.iter().any(|g| !g.is_finite()) || second.iter().any(|s| !s.is_finite()) {
            return Err(Error::DegenerateSamples(format!(
                "non-finite derivative data at {dir:?}"
            )));
        }

        Ok(SphereSample { dir: dir.to_vec(), value, grad, second })
    }
}

/// Constant dominating the quadratic Taylor remainder of `f` between
/// sphere points, from dense pair sampling.
///
/// Over all ordered pairs `(x, y)` of table directions the quotient
///
/// ```text
///     |f(C~ x) - f(C~ y) - df_{C~ y}(C~ x - C~ y)| / |C~ x - C~ y|^2
/// ```
///
/// is maximized (`df` is the differential of the zero-homogeneous
/// extension, i.e. the sampled tangential gradient), and the maximum is
/// inflated by a 25% safety factor against sampling underestimation.
/// The envelope construction checks the resulting barriers for ordering
/// and grows `M` further if the check fails, so the factor here only has
/// to be a reasonable head start.
pub fn lipschitz_quadratic_m(f: &BoundaryValueF) -> Result<f64> {
    Ok(M_SAFETY * quadratic_quotient_max(f)?)
}

/// The raw sampled maximum of the quadratic-remainder quotient.
pub fn quadratic_quotient_max(f: &BoundaryValueF) -> Result<f64> {
    let ct = f.c_tilde();
    let samples = f.samples();
    let mut worst = 0.0_f64;
    for (j, sy) in samples.iter().enumerate() {
        for (i, sx) in samples.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut d2 = 0.0;
            let mut df = 0.0;
            for k in 0..3 {
                let delta = ct * (sx.dir[k] - sy.dir[k]);
                d2 += delta * delta;
                df += sy.grad[k] * delta;
            }
            if d2 < 1e-24 {
                return Err(Error::DegenerateSamples(format!(
                    "directions {i} and {j} coincide"
                )));
            }
            worst = worst.max((sx.value - sy.value - df).abs() / d2);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values_have_zero_m() {
        let f = BoundaryValueF::constant(3.5, 2.0).unwrap();
        assert_eq!(f.samples().len(), 256);
        for s in f.samples() {
            assert_eq!(s.value, 3.5);
            assert!(s.grad.iter().all(|g| g.abs() < 1e-9));
        }
        assert_eq!(lipschitz_quadratic_m(&f).unwrap(), 0.0);
    }

    #[test]
    fn cosine_mode_gradient_matches_closed_form() {
        let a = 0.1;
        let c = 2.0;
        let f = BoundaryValueF::cosine_mode(a, c).unwrap();
        let ct = f.c_tilde();
        assert!((ct - (0.75_f64).sqrt()).abs() < 1e-15);
        for s in f.samples() {
            // Extension a x3/|x|: gradient (e3 - z dir) a / C~ at C~ dir.
            let z = s.dir[2];
            assert!((s.value - a * z).abs() < 1e-12);
            for k in 0..3 {
                let e3 = if k == 2 { 1.0 } else { 0.0 };
                let exact = a * (e3 - z * s.dir[k]) / ct;
                assert!(
                    (s.grad[k] - exact).abs() < 1e-6,
                    "grad[{k}] {} vs {exact}",
                    s.grad[k]
                );
            }
        }
    }

    #[test]
    fn cosine_mode_remainder_quotient_is_closed_form() {
        // For f = a x3/|x| the remainder over any sphere pair is exactly
        // -a y3 |x^ - y^|^2 / 2, so the quotient is |a y3| / (2 C~^2)
        // independently of x: the sampled maximum must match the largest
        // sampled |y3| to derivative-difference accuracy.
        let a = 0.1;
        let f = BoundaryValueF::cosine_mode(a, 2.0).unwrap();
        let zmax = f
            .samples()
            .iter()
            .map(|s| s.dir[2].abs())
            .fold(0.0_f64, f64::max);
        let ct2 = f.c_tilde() * f.c_tilde();
        let raw = quadratic_quotient_max(&f).unwrap();
        assert!(
            (raw - a * zmax / (2.0 * ct2)).abs() < 1e-6,
            "raw {raw} vs {}",
            a * zmax / (2.0 * ct2)
        );
        let m = lipschitz_quadratic_m(&f).unwrap();
        assert!((m - 1.25 * raw).abs() < 1e-15);
    }

    #[test]
    fn table_values_reproduce_rows_and_reject_duplicates() {
        let rows = vec![
            (0.3, 0.0, 1.0),
            (1.2, 1.0, -0.5),
            (2.0, 3.0, 0.25),
            (2.8, 5.0, 0.75),
        ];
        let f = BoundaryValueF::from_rows(&rows, 2.0).unwrap();
        for &(theta, phi, value) in &rows {
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            let dir = [st * cp, st * sp, ct];
            assert!((f.value_dir(&dir) - value).abs() < 1e-12);
        }

        let mut bad = rows.clone();
        bad.push((0.3, 0.0, 2.0));
        assert!(matches!(
            BoundaryValueF::from_rows(&bad, 2.0),
            Err(Error::DegenerateSamples(_))
        ));
    }

    #[test]
    fn homogeneous_extension_ignores_radius() {
        let f = BoundaryValueF::cosine_mode(0.1, 2.0).unwrap();
        let x = [1.0, -2.0, 0.5];
        let far: Vec<f64> = x.iter().map(|v| v * 137.0).collect();
        assert!((f.value_dir(&x) - f.value_dir(&far)).abs() < 1e-14);
    }
}
