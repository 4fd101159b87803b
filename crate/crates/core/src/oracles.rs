//! Closed forms and explicit bounds for the model ODEs that govern the
//! far-field of radial solitons.
//!
//! The tail of the radial profile, written as `z = (sqrt(1-1/C^2) - y) r`,
//! obeys a Riccati equation `z' = A z^2 + B` whose coefficients tend to
//! constants `A0 < 0`, `B0 > 0`. This module provides the exact solution
//! of the constant-coefficient equation, its limit `sqrt(-B0/A0)`, a
//! numerical probe for the variable-coefficient case, and the explicit
//! sup-bound for linear equations `y' + a(r) y = b(r)` with `a >= a0 > 0`.
//! They serve as independent cross-checks of the radial integrator.

use crate::numerics::ivp::{sample_path, Dopri5, OdeOptions};
use crate::{Error, Result};

/// Data of a constant-coefficient Riccati initial-value problem
/// `z' = a0 z^2 + b0`, `z(r0) = z0`, with `a0 < 0 < b0` and `z0 >= 0`.
#[derive(Debug, Clone, Copy)]
pub struct RiccatiParams {
    /// Quadratic coefficient, strictly negative.
    pub a0: f64,
    /// Constant forcing, strictly positive.
    pub b0: f64,
    /// Left endpoint of the solution interval.
    pub r0: f64,
    /// Initial value `z(r0) >= 0`.
    pub z0: f64,
}

/// Which side of its limit the Riccati solution starts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approach {
    /// `z0 < sqrt(-b0/a0)`: the solution increases toward the limit.
    Increasing,
    /// `z0 > sqrt(-b0/a0)`: the solution decreases toward the limit.
    Decreasing,
    /// `z0 = sqrt(-b0/a0)`: the solution is constant.
    Stationary,
}

impl RiccatiParams {
    /// Validate signs and ranges.
    pub fn new(a0: f64, b0: f64, r0: f64, z0: f64) -> Result<Self> {
        if !(a0 < 0.0) || !a0.is_finite() {
            return Err(Error::OutOfRange(format!("quadratic coefficient {a0} must be < 0")));
        }
        if !(b0 > 0.0) || !b0.is_finite() {
            return Err(Error::OutOfRange(format!("constant forcing {b0} must be > 0")));
        }
        if !(r0 >= 0.0) || !(z0 >= 0.0) {
            return Err(Error::OutOfRange(format!("need r0 >= 0 and z0 >= 0, got ({r0}, {z0})")));
        }
        Ok(RiccatiParams { a0, b0, r0, z0 })
    }

    /// Limiting coefficients of the tail equation of a radial soliton with
    /// speed `c` in dimension `n`:
    /// `a0 = -(n c^2 / 2) ct`, `b0 = ((n-2)/(2 c^2)) ct`
    /// where `ct = sqrt(1 - 1/c^2)`.
    pub fn soliton_tail(n: usize, c: f64, r0: f64, z0: f64) -> Result<Self> {
        if n < 3 || c <= 1.0 {
            return Err(Error::OutOfRange(format!("need n >= 3 and c > 1, got ({n}, {c})")));
        }
        let ct = (1.0 - 1.0 / (c * c)).sqrt();
        let nf = n as f64;
        RiccatiParams::new(-(nf * c * c / 2.0) * ct, (nf - 2.0) / (2.0 * c * c) * ct, r0, z0)
    }

    /// The attracting value `sqrt(-b0/a0)`.
    pub fn limit(&self) -> f64 {
        (-self.b0 / self.a0).sqrt()
    }

    /// The integration constant `K = 1 - 2 l / (z0 + l)` of the explicit
    /// solution; its sign encodes the direction of approach.
    pub fn integration_constant(&self) -> f64 {
        let l = self.limit();
        1.0 - 2.0 * l / (self.z0 + l)
    }

    /// Classify the approach to the limit from the sign of the
    /// integration constant (`K < 0`: increasing, `K > 0`: decreasing,
    /// `K = 0`: stationary).
    pub fn approach(&self) -> Approach {
        let k = self.integration_constant();
        if k == 0.0 {
            Approach::Stationary
        } else if k < 0.0 {
            Approach::Increasing
        } else {
            Approach::Decreasing
        }
    }
}

/// Exact solution of `z' = a0 z^2 + b0`, `z(r0) = z0`, evaluated at `r`:
///
/// ```text
///     z(r) = -l + 2l / (1 - K exp(2 l a0 (r - r0))),   l = sqrt(-b0/a0).
/// ```
pub fn riccati_closed_form(p: &RiccatiParams, r: f64) -> Result<f64> {
    if r < p.r0 {
        return Err(Error::OutOfRange(format!("evaluation point {r} before initial point {}", p.r0)));
    }
    let l = p.limit();
    let k = p.integration_constant();
    Ok(-l + 2.0 * l / (1.0 - k * (2.0 * l * p.a0 * (r - p.r0)).exp()))
}

/// The limit `sqrt(-b0/a0)` of any nonnegative solution of
/// `z' = a0 z^2 + b0` with `a0 < 0 < b0`.
pub fn riccati_limit(a0: f64, b0: f64) -> Result<f64> {
    if !(a0 < 0.0) || !(b0 > 0.0) {
        return Err(Error::OutOfRange(format!(
            "limit requires a0 < 0 < b0, got ({a0}, {b0})"
        )));
    }
    Ok((-b0 / a0).sqrt())
}

/// Integrate `z' = a(r) z^2 + b(r)` from `(r0, z0)` to `r_max` and return
/// `z(r_max)`.
///
/// When `a -> a0 < 0` and `b -> b0 > 0`, comparison with the
/// constant-coefficient equation forces `z -> sqrt(-b0/a0)`; callers
/// assert that. The hypothesis requires `z > 0` throughout, so the probe
/// fails with [`Error::PositivityLost`] as soon as the path touches zero.
pub fn variable_riccati_limit_probe(
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
    r0: f64,
    z0: f64,
    r_max: f64,
) -> Result<f64> {
    if !(z0 > 0.0) {
        return Err(Error::OutOfRange(format!("probe needs z0 > 0, got {z0}")));
    }
    if !(r_max > r0) {
        return Err(Error::OutOfRange(format!("need r_max > r0, got ({r0}, {r_max})")));
    }
    let f = |r: f64, z: f64| a(r) * z * z + b(r);
    let mut solver = Dopri5::new(r0, z0, r_max, OdeOptions::with_tol(1e-11));
    while solver.t() < r_max {
        solver.step(&f, r_max)?;
        if solver.y() <= 0.0 {
            return Err(Error::PositivityLost { r: solver.t(), z: solver.y() });
        }
    }
    Ok(solver.y())
}

/// Explicit sup-bound for solutions of `y' + a(r) y = b(r)` with
/// `a >= a0 > 0` and `|b| <= b_sup`: returns `|y(r0)| + b_sup / a0`.
pub fn linear_ode_bound(y_r0: f64, a0: f64, b_sup: f64) -> Result<f64> {
    if !(a0 > 0.0) {
        return Err(Error::OutOfRange(format!("damping floor {a0} must be > 0")));
    }
    if !(b_sup >= 0.0) {
        return Err(Error::OutOfRange(format!("forcing bound {b_sup} must be >= 0")));
    }
    Ok(y_r0.abs() + b_sup / a0)
}

/// Integrate `y' = -a(r) y + b(r)` and return the samples at `targets`
/// (helper for bound checks; thin wrapper over the adaptive stepper).
pub fn linear_ode_samples(
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
    r0: f64,
    y0: f64,
    targets: &[f64],
) -> Result<Vec<f64>> {
    sample_path(
        |r, y| -a(r) * y + b(r),
        r0,
        y0,
        targets,
        OdeOptions::with_tol(1e-11),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stationary_branch_is_exactly_constant() {
        let l = 2.0; // a0 = -1, b0 = 4
        let p = RiccatiParams::new(-1.0, 4.0, 0.0, l).unwrap();
        assert_eq!(p.approach(), Approach::Stationary);
        for r in [0.0, 0.5, 3.0, 50.0] {
            assert_abs_diff_eq!(riccati_closed_form(&p, r).unwrap(), l, epsilon = 1e-14);
        }
    }

    #[test]
    fn closed_form_reaches_the_limit_from_both_sides() {
        for z0 in [0.0, 0.7, 3.5, 10.0] {
            let p = RiccatiParams::new(-1.0, 4.0, 0.0, z0).unwrap();
            assert_abs_diff_eq!(riccati_closed_form(&p, 0.0).unwrap(), z0, epsilon = 1e-13);
            assert_abs_diff_eq!(riccati_closed_form(&p, 40.0).unwrap(), 2.0, epsilon = 1e-12);
            let expected = if z0 < 2.0 {
                Approach::Increasing
            } else if z0 > 2.0 {
                Approach::Decreasing
            } else {
                Approach::Stationary
            };
            assert_eq!(p.approach(), expected);
        }
    }

    #[test]
    fn closed_form_frozen_point_and_numeric_cross_check() {
        let p = RiccatiParams::new(-2.0, 8.0, 0.0, 0.0).unwrap();
        let cf = riccati_closed_form(&p, 1.0).unwrap();
        assert_abs_diff_eq!(cf, 1.9986585994781345, epsilon = 1e-12);
        let numeric = sample_path(
            |_, z| -2.0 * z * z + 8.0,
            0.0,
            0.0,
            &[1.0],
            OdeOptions::with_tol(1e-12),
        )
        .unwrap()[0];
        assert_abs_diff_eq!(cf, numeric, epsilon = 1e-10);
    }

    #[test]
    fn limits_match_hand_values() {
        assert_abs_diff_eq!(riccati_limit(-1.0, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(riccati_limit(-4.0, 1.0).unwrap(), 0.5);
        // n = 3, c = 2 tail coefficients.
        assert_abs_diff_eq!(
            riccati_limit(-5.1961524, 0.1082532).unwrap(),
            0.1443376,
            epsilon = 1e-7
        );
        assert!(riccati_limit(1.0, 1.0).is_err());
        assert!(riccati_limit(-1.0, -1.0).is_err());
    }

    #[test]
    fn soliton_tail_limit_equals_algebraic_form() {
        // sqrt(-b0/a0) with the tail coefficients collapses algebraically
        // to (1/c^2) sqrt((n-2)/n); check the identity across (n, c).
        for (n, c) in [(3, 2.0), (4, 2.0), (5, 3.0), (7, 1.25)] {
            let p = RiccatiParams::soliton_tail(n, c, 0.0, 0.0).unwrap();
            let direct = (1.0 / (c * c)) * ((n as f64 - 2.0) / n as f64).sqrt();
            assert_abs_diff_eq!(p.limit(), direct, epsilon = 1e-15);
        }
        let p = RiccatiParams::soliton_tail(3, 2.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(p.limit(), 0.1443376, epsilon = 1e-7);
    }

    #[test]
    fn probe_with_constant_coefficients_matches_closed_form() {
        let p = RiccatiParams::new(-1.5, 2.5, 0.0, 0.2).unwrap();
        let z = variable_riccati_limit_probe(|_| -1.5, |_| 2.5, 0.0, 0.2, 8.0).unwrap();
        assert_abs_diff_eq!(z, riccati_closed_form(&p, 8.0).unwrap(), epsilon = 1e-8);
    }

    #[test]
    fn probe_with_decaying_perturbations_still_converges() {
        // a -> -1, b -> 1, so the limit is 1.
        let z = variable_riccati_limit_probe(
            |r| -1.0 + 1.0 / r,
            |r| 1.0 - 1.0 / (r * r),
            1.0,
            2.0,
            1000.0,
        )
        .unwrap();
        assert_abs_diff_eq!(z, 1.0005001253, epsilon = 1e-6);
        assert!((z - 1.0).abs() < 1e-2);
    }

    #[test]
    fn probe_reports_loss_of_positivity() {
        let out = variable_riccati_limit_probe(|_| -1.0, |_| -2.0, 0.0, 0.5, 10.0);
        assert!(matches!(out, Err(Error::PositivityLost { .. })));
    }

    #[test]
    fn linear_bound_frozen_values_and_sharpness() {
        assert_abs_diff_eq!(linear_ode_bound(0.0, 1.0, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(linear_ode_bound(1.0, 2.0, 4.0).unwrap(), 3.0);
        assert!(linear_ode_bound(1.0, 0.0, 1.0).is_err());
        // y' + 2y = 4, y(0) = 1: y = 2 - e^{-2r}, sup = 2 <= 3, limit 2.
        let targets = [0.5, 1.0, 2.0, 5.0, 10.0];
        let ys = linear_ode_samples(|_| 2.0, |_| 4.0, 0.0, 1.0, &targets).unwrap();
        let bound = linear_ode_bound(1.0, 2.0, 4.0).unwrap();
        for (r, y) in targets.iter().zip(&ys) {
            assert_abs_diff_eq!(*y, 2.0 - (-2.0 * r).exp(), epsilon = 1e-9);
            assert!(y.abs() <= bound + 1e-9);
        }
        assert_abs_diff_eq!(ys[4], 2.0, epsilon = 1e-8);
    }
}
