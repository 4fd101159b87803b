//! Method-of-continuity driver for the Dirichlet problem.
//!
//! The full problem carries the gradient weight `sigma = 1`; solving it
//! directly from a cold start is fragile because the Newton basin
//! shrinks as the gradient term strengthens.  The driver instead marches
//! `sigma` from `0` — where the umbilic graph solves the equation on
//! balls in closed form and is an excellent guess on any uniformly
//! convex domain — up to `1`, warm-starting each solve from the
//! previous converged field.  When a scheduled step fails, the driver
//! first tries a burst of parabolic relaxation sweeps to re-enter the
//! Newton basin, then bisects the step; a step that cannot be bridged
//! even at the step-size floor aborts the march with
//! [`Error::ContinuationStalled`].
//!
//! Every accepted step records its Newton report and full monitor
//! block, so a finished run doubles as the numerical trace of the a
//! priori estimates along the homotopy.

use serde::{Deserialize, Serialize};

use super::domain::ConvexDomain;
use super::field::{BoundaryData, FieldSolution, Problem};
use super::grid::GridSpec;
use super::monitors::{estimate_monitors, SigmaMonitor};
use super::newton::{newton_solve, parabolic_relax, NewtonOptions, NewtonReport};
use crate::{Error, Result};

/// Bisection floor: a continuation step that still fails at this width
/// is declared stalled.
pub const MIN_SIGMA_STEP: f64 = 1e-3;

/// Relaxation sweeps attempted before retrying a failed Newton solve.
const RESCUE_SWEEPS: usize = 200;

/// The sigma homotopy and the solver budgets used along it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationSchedule {
    /// Strictly increasing weights in `[0, 1]`, starting at `0`.  The
    /// standard schedule ends at `1`; truncated schedules solve the
    /// partial problem up to their last entry.
    pub sigma_steps: Vec<f64>,
    /// Newton iteration budget per step.
    pub max_newton_iters: usize,
    /// Residual sup-norm target per step.
    pub newton_tol: f64,
    /// Initial pseudo-time step for rescue relaxation sweeps.
    pub relax_dt0: f64,
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        let mut sigma_steps: Vec<f64> = (0..=9).map(|k| k as f64 / 10.0).collect();
        sigma_steps.push(0.95);
        sigma_steps.push(1.0);
        Self { sigma_steps, max_newton_iters: 30, newton_tol: 1e-10, relax_dt0: 0.05 }
    }
}

impl ContinuationSchedule {
    /// The standard schedule truncated at `sigma_last` (appending it if
    /// it falls between grid points).
    pub fn up_to(sigma_last: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&sigma_last) {
            return Err(Error::OutOfRange(format!(
                "schedule endpoint {sigma_last} outside [0, 1]"
            )));
        }
        let mut s = Self::default();
        s.sigma_steps.retain(|&v| v < sigma_last - 1e-12);
        s.sigma_steps.push(sigma_last);
        Ok(s)
    }

    /// Validates monotonicity, range, and budget positivity.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        match self.sigma_steps.first() {
            None => problems.push("schedule has no sigma steps".to_string()),
            Some(&first) if first != 0.0 => {
                problems.push(format!("schedule must start at 0, starts at {first}"))
            }
            _ => {}
        }
        for w in self.sigma_steps.windows(2) {
            if w[1] <= w[0] {
                problems.push(format!("sigma steps not strictly increasing at {} -> {}", w[0], w[1]));
            }
        }
        if self.sigma_steps.iter().any(|&s| !(0.0..=1.0).contains(&s) || !s.is_finite()) {
            problems.push("sigma steps must lie in [0, 1]".to_string());
        }
        if self.max_newton_iters == 0 {
            problems.push("max_newton_iters must be positive".to_string());
        }
        if !(self.newton_tol > 0.0) {
            problems.push(format!("newton_tol must be positive, got {}", self.newton_tol));
        }
        if !(self.relax_dt0 > 0.0) {
            problems.push(format!("relax_dt0 must be positive, got {}", self.relax_dt0));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::SchemaError(problems))
        }
    }
}

/// One accepted continuation step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaStep {
    /// The weight this step converged at (scheduled or bisected).
    pub sigma: f64,
    /// Newton convergence report.
    pub newton: NewtonReport,
    /// Monitor block of the converged field.
    pub monitor: SigmaMonitor,
    /// Whether rescue relaxation sweeps were needed before Newton.
    pub preconditioned: bool,
}

/// A finished continuation run: the final field plus the per-step trace.
#[derive(Debug, Clone)]
pub struct ContinuityRun {
    /// Field at the last scheduled weight.
    pub solution: FieldSolution,
    /// Accepted steps in march order, including bisected intermediates.
    pub steps: Vec<SigmaStep>,
}

impl ContinuityRun {
    /// Monitor blocks in march order.
    pub fn monitors(&self) -> Vec<SigmaMonitor> {
        self.steps.iter().map(|s| s.monitor).collect()
    }
}

/// Solves the Dirichlet problem on `domain` by the method of continuity.
///
/// Covers the domain with a grid of spacing `h`, binds the boundary
/// data, starts from the umbilic-graph guess, and marches the schedule.
/// The returned run holds the field at the final scheduled weight
/// (`sigma = 1` for the standard schedule) and the per-step trace.
pub fn continuity_solve(
    domain: &ConvexDomain,
    h: f64,
    c: f64,
    boundary: BoundaryData,
    schedule: &ContinuationSchedule,
) -> Result<ContinuityRun> {
    schedule.validate()?;
    let grid = GridSpec::cover(domain, h)?;
    let problem = Problem::new(domain.clone(), grid, c, boundary)?;
    let u0 = problem.hyperboloid_guess();
    march_from(&problem, schedule, u0)
}

/// Marches the schedule on a prebuilt problem from an explicit start.
///
/// This is the engine behind [`continuity_solve`]; exhaustion solves
/// reuse it with custom grids and barrier-derived initial fields.
pub fn march_from(
    problem: &Problem,
    schedule: &ContinuationSchedule,
    mut u: Vec<f64>,
) -> Result<ContinuityRun> {
    schedule.validate()?;
    let opts = NewtonOptions {
        tol: schedule.newton_tol,
        max_iters: schedule.max_newton_iters,
        ..NewtonOptions::default()
    };

    let mut steps: Vec<SigmaStep> = Vec::new();
    let mut reached: Option<f64> = None;

    for &target in &schedule.sigma_steps {
        let mut next = target;
        loop {
            let mut trial = u.clone();
            match attempt(problem, next, &mut trial, &opts, schedule.relax_dt0) {
                Ok((newton, preconditioned)) => {
                    u = trial;
                    let monitor = estimate_monitors(&problem.solution(next, &u))?;
                    steps.push(SigmaStep { sigma: next, newton, monitor, preconditioned });
                    reached = Some(next);
                    if next == target {
                        break;
                    }
                    next = target;
                }
                Err(err) => {
                    let Some(from) = reached else {
                        // The very first scheduled weight failed; there
                        // is nothing to bisect towards.
                        return Err(err);
                    };
                    if next - from <= MIN_SIGMA_STEP {
                        return Err(Error::ContinuationStalled {
                            from,
                            to: next,
                            min_step: MIN_SIGMA_STEP,
                        });
                    }
                    next = from + (next - from) / 2.0;
                }
            }
        }
    }

    let last = steps
        .last()
        .ok_or_else(|| Error::InvariantViolated("empty continuation schedule".into()))?;
    let solution = problem.solution(last.sigma, &u);
    Ok(ContinuityRun { solution, steps })
}

/// One solve attempt at a fixed weight: Newton, then on failure a burst
/// of relaxation sweeps from the same start followed by a second Newton
/// try.  `u` holds the converged field on success and is unspecified on
/// failure (callers work on a scratch copy).
fn attempt(
    problem: &Problem,
    sigma: f64,
    u: &mut [f64],
    opts: &NewtonOptions,
    relax_dt0: f64,
) -> Result<(NewtonReport, bool)> {
    let backup = u.to_vec();
    let first = match newton_solve(problem, sigma, u, opts) {
        Ok(report) => return Ok((report, false)),
        Err(err) => err,
    };

    u.copy_from_slice(&backup);
    if parabolic_relax(problem, sigma, u, relax_dt0, RESCUE_SWEEPS).is_err() {
        return Err(first);
    }
    match newton_solve(problem, sigma, u, opts) {
        Ok(report) => Ok((report, true)),
        // Report the original failure: it describes the scheduled
        // attempt rather than the rescue.
        Err(_) => Err(first),
    }
}

#[cfg(test)]
mod tests {
    use super::super::field::interior_sup_diff;
    use super::*;
    use crate::radial::{sigma_solution, u_from_y, RadialParams};

    fn unit_ball() -> ConvexDomain {
        ConvexDomain::ball(vec![0.0; 3], 1.0).unwrap()
    }

    #[test]
    fn schedule_validation_catches_bad_input() {
        assert!(ContinuationSchedule::default().validate().is_ok());

        let mut s = ContinuationSchedule::default();
        s.sigma_steps[0] = 0.05;
        assert!(matches!(s.validate(), Err(Error::SchemaError(_))));

        let mut s = ContinuationSchedule::default();
        s.sigma_steps[3] = s.sigma_steps[2];
        assert!(matches!(s.validate(), Err(Error::SchemaError(_))));

        let mut s = ContinuationSchedule::default();
        s.newton_tol = -1.0;
        s.max_newton_iters = 0;
        match s.validate() {
            Err(Error::SchemaError(list)) => assert_eq!(list.len(), 2),
            other => panic!("expected SchemaError, got {other:?}"),
        }

        let t = ContinuationSchedule::up_to(0.5).unwrap();
        assert_eq!(t.sigma_steps.last(), Some(&0.5));
        assert!(t.validate().is_ok());
    }

    #[test]
    fn full_march_matches_shifted_radial_profile() {
        let h = 0.1;
        let run = continuity_solve(
            &unit_ball(),
            h,
            2.0,
            BoundaryData::Constant(0.0),
            &ContinuationSchedule::default(),
        )
        .unwrap();

        assert_eq!(run.solution.sigma, 1.0);
        let final_step = run.steps.last().unwrap();
        assert!(final_step.newton.residual_sup <= 1e-10);

        // Radial reference shifted so the boundary value vanishes.
        let params = RadialParams::new(3, 2.0, 1.0).unwrap();
        let mut profile = sigma_solution(&params, 2.0, 1e-7).unwrap();
        u_from_y(&mut profile, 0.0);
        let shift = profile.u_at(1.0);

        let grid = &run.solution.grid;
        let mut err: f64 = 0.0;
        for (lin, v) in run.solution.u.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            let x = grid.point(&grid.to_multi(lin));
            let r: f64 = x.iter().map(|xi| xi * xi).sum::<f64>().sqrt();
            if run.solution.domain.contains(&x) {
                err = err.max((v - (profile.u_at(r) - shift)).abs());
            }
        }
        assert!(err < 0.02, "sup deviation from radial reference {err}");

        // Monitors were recorded at every scheduled weight.
        assert!(run.steps.len() >= 12);
        for step in &run.steps {
            assert!(step.monitor.residual_sup <= 1e-10 * 1.01);
            assert!(step.monitor.min_h2 > 0.0);
        }
    }

    #[test]
    fn boundary_shift_moves_solution_exactly() {
        let h = 0.125;
        let schedule = ContinuationSchedule::default();
        let base = continuity_solve(
            &unit_ball(),
            h,
            2.0,
            BoundaryData::Constant(0.0),
            &schedule,
        )
        .unwrap();
        let lifted = continuity_solve(
            &unit_ball(),
            h,
            2.0,
            BoundaryData::Constant(5.0),
            &schedule,
        )
        .unwrap();

        let grid = GridSpec::cover(&unit_ball(), h).unwrap();
        let problem =
            Problem::new(unit_ball(), grid, 2.0, BoundaryData::Constant(0.0)).unwrap();
        let shifted: Vec<f64> = base.solution.u.iter().map(|v| v + 5.0).collect();
        let gap = interior_sup_diff(&problem.mask, &lifted.solution.u, &shifted);
        assert!(gap < 1e-8, "translation invariance violated by {gap}");
    }

    #[test]
    fn truncated_schedule_returns_hyperboloid() {
        let h = 0.125;
        let run = continuity_solve(
            &unit_ball(),
            h,
            2.0,
            BoundaryData::Constant(0.0),
            &ContinuationSchedule::up_to(0.0).unwrap(),
        )
        .unwrap();
        assert_eq!(run.solution.sigma, 0.0);
        assert_eq!(run.steps.len(), 1);

        // sigma = 0 solution: umbilic graph with curvature C, vanishing
        // on the boundary sphere.
        let c2inv = 0.25_f64;
        let grid = &run.solution.grid;
        let mut err: f64 = 0.0;
        for (lin, v) in run.solution.u.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            let x = grid.point(&grid.to_multi(lin));
            let r2: f64 = x.iter().map(|xi| xi * xi).sum();
            if run.solution.domain.contains(&x) {
                let exact = (c2inv + r2).sqrt() - (c2inv + 1.0).sqrt();
                err = err.max((v - exact).abs());
            }
        }
        assert!(err < 5e-3, "deviation from umbilic graph {err}");
    }

    #[test]
    fn failure_at_the_first_step_propagates_the_backend_error() {
        // A single Newton iteration cannot bring the cold-start residual
        // to tolerance, and with no converged base there is nothing to
        // bisect towards: the backend failure comes through as-is.
        let schedule = ContinuationSchedule {
            sigma_steps: vec![0.0, 1.0],
            max_newton_iters: 1,
            newton_tol: 1e-14,
            relax_dt0: 0.05,
        };
        let err = continuity_solve(
            &unit_ball(),
            0.125,
            2.0,
            BoundaryData::Constant(0.0),
            &schedule,
        )
        .unwrap_err();
        match err {
            Error::MaxItersExceeded { sigma, .. } => assert_eq!(sigma, 0.0),
            other => panic!("expected MaxItersExceeded at sigma 0, got {other:?}"),
        }
    }

    #[test]
    fn stall_bisects_down_to_the_floor() {
        // Start the march from an already converged sigma = 0 field so
        // the first step succeeds instantly, then strangle the budget:
        // one Newton iteration per step cannot cross even the smallest
        // bisected interval at this tolerance, so the driver descends to
        // the step floor and reports the bracket.
        let h = 0.15;
        let warm = continuity_solve(
            &unit_ball(),
            h,
            2.0,
            BoundaryData::Constant(0.0),
            &ContinuationSchedule::up_to(0.0).unwrap(),
        )
        .unwrap();

        let grid = GridSpec::cover(&unit_ball(), h).unwrap();
        let problem =
            Problem::new(unit_ball(), grid, 2.0, BoundaryData::Constant(0.0)).unwrap();
        let schedule = ContinuationSchedule {
            sigma_steps: vec![0.0, 1.0],
            max_newton_iters: 1,
            newton_tol: 1e-13,
            relax_dt0: 1e-6,
        };
        let err = march_from(&problem, &schedule, warm.solution.u.clone()).unwrap_err();
        match err {
            Error::ContinuationStalled { from, to, min_step } => {
                assert_eq!(from, 0.0);
                assert!(to - from <= min_step * (1.0 + 1e-9) && to > from);
                assert_eq!(min_step, MIN_SIGMA_STEP);
            }
            other => panic!("expected stall, got {other:?}"),
        }
    }
}
