//! Adaptive embedded Runge–Kutta integration for scalar initial value
//! problems.
//!
//! The stepper is the classic Dormand–Prince 5(4) pair with FSAL ("first
//! same as last") evaluation reuse and the standard proportional step
//! controller. A scalar state is all the crate needs: the radial soliton
//! equation, its Riccati comparison equations, and the linear bound
//! checks are all first-order scalar ODEs. Callers that must clamp the
//! state or watch for sign changes drive the [`Dopri5`] stepper directly;
//! simple callers use [`sample_path`].

use crate::{Error, Result};

/// Tolerances and step bounds for one integration.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Relative tolerance of the embedded error estimate.
    pub rtol: f64,
    /// Absolute tolerance of the embedded error estimate.
    pub atol: f64,
    /// Initial step; `None` picks a conservative fraction of the span.
    pub h_init: Option<f64>,
    /// Upper bound on the step size.
    pub h_max: f64,
    /// Hard cap on accepted + rejected steps (guards runaway stiffness).
    pub max_steps: usize,
}

impl OdeOptions {
    /// Options with `rtol = atol = tol` and default step policy.
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol, h_init: None, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }
}

// Dormand–Prince 5(4) Butcher tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights (row seven of A doubles as B; FSAL pair).
const B: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
// Error weights: B minus the embedded fourth-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// One-step Dormand–Prince 5(4) integrator with internal step control.
///
/// `step` advances by exactly one *accepted* step, never past the supplied
/// limit, so a driver can land on output points exactly and inspect (or
/// clamp) the state between steps.
pub struct Dopri5 {
    t: f64,
    y: f64,
    h: f64,
    opts: OdeOptions,
    /// FSAL slope at `(t, y)`; invalidated by [`Dopri5::set_y`].
    k_last: Option<f64>,
    steps: usize,
}

impl Dopri5 {
    /// New stepper at state `(t0, y0)` aiming toward `t_end` (used only to
    /// scale the default initial step; integration direction must be
    /// increasing `t`).
    pub fn new(t0: f64, y0: f64, t_end: f64, opts: OdeOptions) -> Self {
        let span = (t_end - t0).abs().max(f64::MIN_POSITIVE);
        let h0 = opts.h_init.unwrap_or(1e-6 * span.min(1e6)).min(opts.h_max);
        Dopri5 { t: t0, y: y0, h: h0, opts, k_last: None, steps: 0 }
    }

    /// Current abscissa.
    pub fn t(&self) -> f64 {
        self.t
    }

    /// Current state.
    pub fn y(&self) -> f64 {
        self.y
    }

    /// Overwrite the state (e.g. to clamp a tiny overshoot). Drops the
    /// FSAL cache so the next step re-evaluates the slope.
    pub fn set_y(&mut self, y: f64) {
        self.y = y;
        self.k_last = None;
    }

    /// Advance by one accepted step, at most to `t_limit`.
    pub fn step(&mut self, mut f: impl FnMut(f64, f64) -> f64, t_limit: f64) -> Result<()> {
        debug_assert!(t_limit > self.t);
        let k1_cached = match self.k_last {
            Some(k) => k,
            None => f(self.t, self.y),
        };
        loop {
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::NoConvergence {
                    what: "ode integration",
                    detail: format!("step budget {} exhausted at t = {}", self.opts.max_steps, self.t),
                });
            }
            let h = self.h.min(t_limit - self.t).min(self.opts.h_max);
            if h <= f64::EPSILON * self.t.abs().max(1.0) {
                return Err(Error::NoConvergence {
                    what: "ode integration",
                    detail: format!("step size underflow at t = {}", self.t),
                });
            }

            let mut k = [0.0_f64; 7];
            k[0] = k1_cached;
            for s in 1..7 {
                let mut yi = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    yi += A[s - 1][j] * kj;
                }
                k[s] = f(self.t + C[s] * h, self.y + h * yi);
            }
            let mut dy = 0.0;
            let mut err = 0.0;
            for s in 0..7 {
                dy += B[s] * k[s];
                err += E[s] * k[s];
            }
            let y_new = self.y + h * dy;
            let scale = self.opts.atol + self.opts.rtol * self.y.abs().max(y_new.abs());
            let err_ratio = (h * err).abs() / scale;

            // Proportional controller with the usual safety and clamps.
            let factor = if err_ratio > 0.0 {
                (0.9 * err_ratio.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            if err_ratio <= 1.0 {
                self.t += h;
                self.y = y_new;
                // k7 was evaluated at (t + h, y_new): reuse as next k1.
                self.k_last = Some(k[6]);
                self.h = h * factor;
                return Ok(());
            }
            self.h = h * factor;
        }
    }
}

/// Integrate `y' = f(t, y)` from `(t0, y0)` and return the state at each of
/// the (strictly increasing, all `> t0`) target abscissae.
pub fn sample_path(
    mut f: impl FnMut(f64, f64) -> f64,
    t0: f64,
    y0: f64,
    targets: &[f64],
    opts: OdeOptions,
) -> Result<Vec<f64>> {
    debug_assert!(targets.windows(2).all(|w| w[0] < w[1]));
    let t_end = *targets.last().expect("at least one target");
    let mut stepper = Dopri5::new(t0, y0, t_end, opts);
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        debug_assert!(t > t0);
        while stepper.t() < t {
            stepper.step(&mut f, t)?;
        }
        out.push(stepper.y());
    }
    Ok(out)
}
