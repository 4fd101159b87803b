//! Exhaustion of space by growing balls.
//!
//! An entire solution is approached through Dirichlet problems on balls
//! `B_{R_1} ⊂ B_{R_2} ⊂ …` with boundary data taken from the upper
//! envelope of the trapping pair.  Because the data is a supersolution
//! restriction, the solutions decrease with the radius (comparison at
//! the inner boundary) and stay wedged between the envelopes; their
//! values on a fixed compact lattice converge, and the gaps between
//! successive fields measure how settled the limit is.
//!
//! Each ball is solved directly at full gradient weight from the lower
//! envelope as initial guess.  On large balls that guess, though exact
//! at the continuum level, is *discretely* inadmissible near the
//! boundary ring: the cut-cell curvature error `O(h nu^3)` there
//! exceeds the shrinking admissibility margin, so the Newton start is
//! rejected.  The rescue is parabolic relaxation at full weight — the
//! sign-extended flow is defined on inadmissible jets and morphs the
//! guess into the discrete solution's basin — followed by Newton again;
//! a full homotopy march from the umbilic guess is kept as a final
//! fallback for small balls.  Rescued levels are recorded.

use super::barrier::BarrierPair;
use crate::elliptic::{
    estimate_monitors, march_from, newton_solve, parabolic_relax, BoundaryData,
    ContinuationSchedule, ConvexDomain, FieldSolution, GridSpec, NewtonOptions,
    NewtonReport, Problem, SigmaMonitor,
};
use crate::{Error, Result};
use serde::Serialize;
use std::sync::Arc;

/// Safety margin (grid cells) between the evaluation lattice and the
/// smallest ball, so that interpolation stencils stay interior.
const K_MARGIN_CELLS: f64 = 2.0;

/// Slack constant for the comparison-based uniqueness probe: discrete
/// solutions reproduce continuum orderings up to `slack = 2 h^2`.
const UNIQUENESS_SLACK_PER_H2: f64 = 2.0;

/// Controls of an exhaustion run.
#[derive(Debug, Clone, Copy)]
pub struct ExhaustOptions {
    /// Inner Newton controls per ball.
    pub newton: NewtonOptions,
    /// Tolerance for the nodewise envelope check: a node violates the
    /// sandwich when it leaves the trapped band by more than this (the
    /// band is a continuum statement; discrete fields carry their
    /// truncation error into it).
    pub sandwich_tol: f64,
    /// Initial time step of the relaxation preconditioner (halved
    /// internally whenever a sweep would increase the defect).
    pub relax_dt: f64,
    /// Sweeps of the relaxation preconditioner.
    pub relax_sweeps: usize,
}

impl Default for ExhaustOptions {
    fn default() -> Self {
        ExhaustOptions {
            newton: NewtonOptions::default(),
            sandwich_tol: 0.05,
            relax_dt: 0.05,
            relax_sweeps: 400,
        }
    }
}

/// Outcome of an exhaustion run.
#[derive(Debug)]
pub struct ExhaustionResult {
    /// Ball radii, increasing.
    pub radii: Vec<f64>,
    /// Converged field per radius.
    pub fields: Vec<FieldSolution>,
    /// The fixed evaluation lattice.
    pub k_points: Vec<Vec<f64>>,
    /// Field values on the lattice, one row per radius.
    pub k_values: Vec<Vec<f64>>,
    /// Values of the last (largest-ball) field on the lattice.
    pub limit_on_k: Vec<f64>,
    /// Sup over the lattice of `|u_{m+1} - u_m|`, one per consecutive
    /// pair.
    pub cauchy_gaps: Vec<f64>,
    /// Interior monitors per field.
    pub monitors: Vec<SigmaMonitor>,
    /// Whether the homotopy rescue was needed per field.
    pub rescued: Vec<bool>,
    /// Newton convergence report per field (the final step's report when
    /// rescued).
    pub newton: Vec<NewtonReport>,
    /// Most negative sandwich margin `min(u - lower, upper - u)` seen
    /// over all interior nodes of all fields (nonnegative margins mean
    /// the field sits strictly inside the band).
    pub sandwich_margin: f64,
    /// Largest increase `u_{m+1} - u_m` over the lattice (the sequence
    /// should be nonincreasing up to discretization error).
    pub monotone_excess: f64,
}

/// The lattice of cube-grid points with the given spacing inside the
/// ball of the given radius (the compact set exhaustion values are
/// compared on).
pub fn ball_lattice(radius: f64, spacing: f64) -> Result<Vec<Vec<f64>>> {
    if !(radius > 0.0) || !(spacing > 0.0) {
        return Err(Error::OutOfRange(format!(
            "lattice needs positive radius and spacing, got ({radius}, {spacing})"
        )));
    }
    let n = (radius / spacing).floor() as i64;
    let mut pts = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            for k in -n..=n {
                let p = [i as f64 * spacing, j as f64 * spacing, k as f64 * spacing];
                if p.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius {
                    pts.push(p.to_vec());
                }
            }
        }
    }
    Ok(pts)
}

/// Solves the Dirichlet problems on the growing balls and gathers the
/// convergence evidence.
///
/// `k_points` is the fixed lattice the fields are compared on; it must
/// sit inside the smallest ball with two grid cells to spare.  The
/// envelope used for boundary data and the nodewise checks is the
/// sampled (unrefined) one — a finite family of exact solutions, hence
/// an exact trapping pair in its own right.
pub fn exhaustion_solve(
    pair: &Arc<BarrierPair>,
    radii: &[f64],
    k_points: &[Vec<f64>],
    h: f64,
    opts: &ExhaustOptions,
) -> Result<ExhaustionResult> {
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::OutOfRange(format!(
            "ball radii {radii:?} must be positive and increasing"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::OutOfRange(format!("grid spacing {h} must be positive")));
    }
    if k_points.is_empty() {
        return Err(Error::OutOfRange("empty evaluation lattice".into()));
    }
    let k_reach = k_points
        .iter()
        .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0_f64, f64::max);
    if k_reach + K_MARGIN_CELLS * h > radii[0] {
        return Err(Error::OutOfRange(format!(
            "evaluation lattice reaches {k_reach:.3}, too close to the smallest \
             ball radius {} at spacing {h}",
            radii[0]
        )));
    }
    let reach = radii[radii.len() - 1] + pair.max_shift() + 1.0;
    if reach > pair.psi.r_max() {
        return Err(Error::OutOfRange(format!(
            "largest ball needs the radial reference out to {reach:.1}, beyond \
             its sampled range {:.1}",
            pair.psi.r_max()
        )));
    }

    let mut result = ExhaustionResult {
        radii: radii.to_vec(),
        fields: Vec::new(),
        k_points: k_points.to_vec(),
        k_values: Vec::new(),
        limit_on_k: Vec::new(),
        cauchy_gaps: Vec::new(),
        monitors: Vec::new(),
        rescued: Vec::new(),
        newton: Vec::new(),
        sandwich_margin: f64::INFINITY,
        monotone_excess: f64::NEG_INFINITY,
    };

    for &radius in radii {
        let domain = ConvexDomain::ball(vec![0.0; 3], radius)?;
        let grid = GridSpec::cover(&domain, h)?;
        let data_pair = pair.clone();
        let boundary = BoundaryData::Func(Box::new(move |x| {
            data_pair
                .upper_sampled(x)
                .expect("envelope range validated to cover the exhaustion balls")
        }));
        let problem = Problem::new(domain, grid, pair.c, boundary)?;
        let init = problem.init_field(|x| {
            pair.lower_sampled(x)
                .expect("envelope range validated to cover the exhaustion balls")
        });
        let mut u = init.clone();

        let mut rescued = false;
        let report = match newton_solve(&problem, 1.0, &mut u, &opts.newton) {
            Ok(report) => report,
            Err(_direct) => {
                rescued = true;
                u.copy_from_slice(&init);
                let preconditioned =
                    parabolic_relax(&problem, 1.0, &mut u, opts.relax_dt, opts.relax_sweeps)
                        .and_then(|_| newton_solve(&problem, 1.0, &mut u, &opts.newton));
                match preconditioned {
                    Ok(report) => report,
                    // The post-preconditioning error is the informative
                    // one if the final fallback also fails.
                    Err(second) => {
                        let schedule = ContinuationSchedule::default();
                        match march_from(&problem, &schedule, problem.hyperboloid_guess()) {
                            Ok(run) => {
                                u = run.solution.u.clone();
                                match run.steps.last() {
                                    Some(step) => step.newton,
                                    None => return Err(second),
                                }
                            }
                            Err(_) => return Err(second),
                        }
                    }
                }
            }
        };

        // Nodewise envelope check on the interior nodes.
        let mut violations = 0usize;
        let mut worst = f64::INFINITY;
        for &lin in &problem.mask.interior {
            let x = problem.grid.point(&problem.grid.to_multi(lin));
            let lo = pair.lower_sampled(&x)?;
            let hi = pair.upper_sampled(&x)?;
            let margin = (u[lin] - lo).min(hi - u[lin]);
            if margin < worst {
                worst = margin;
            }
            if margin < -opts.sandwich_tol {
                violations += 1;
            }
        }
        result.sandwich_margin = result.sandwich_margin.min(worst);
        if violations > 0 {
            return Err(Error::SandwichViolated { radius, count: violations, worst });
        }

        let field = problem.solution(1.0, &u);
        result.monitors.push(estimate_monitors(&field)?);
        let row: Vec<f64> = k_points
            .iter()
            .map(|p| field.value_at(p))
            .collect::<Result<Vec<_>>>()?;
        if let Some(prev) = result.k_values.last() {
            let mut gap = 0.0_f64;
            let mut excess = f64::NEG_INFINITY;
            for (a, b) in prev.iter().zip(&row) {
                gap = gap.max((b - a).abs());
                excess = excess.max(b - a);
            }
            result.cauchy_gaps.push(gap);
            result.monotone_excess = result.monotone_excess.max(excess);
        }
        result.k_values.push(row);
        result.fields.push(field);
        result.rescued.push(rescued);
        result.newton.push(report);
    }
    result.limit_on_k = result.k_values.last().cloned().unwrap_or_default();
    Ok(result)
}

/// Comparison evidence between two fields on the same ball.
#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    /// The probe offset.
    pub epsilon: f64,
    /// Max over boundary points of `g2 - g1` (boundary data recovered
    /// from the ghost rules of each field).
    pub boundary_excess: f64,
    /// Whether `u1 + epsilon <= u2` already fails at every boundary
    /// point (`epsilon > boundary_excess`).
    pub premise_holds: bool,
    /// Interior nodes with `u2 - u1 >= epsilon + slack` — the set the
    /// comparison principle forbids when the premise holds.
    pub interior_violations: usize,
    /// Sup of `|u1 - u2|` over interior nodes.
    pub sup_diff: f64,
    /// Discretization slack used by the count.
    pub slack: f64,
}

/// Checks the discrete trace of the comparison principle between two
/// converged fields on the same grid and domain.
///
/// If `u1 + epsilon` exceeds `u2` at every boundary point, the maximum
/// principle forbids interior points with `u1 + epsilon <= u2`; the
/// report counts how many nodes break that (beyond `2 h^2` slack)
/// without judging the result.
pub fn uniqueness_probe(
    u1: &FieldSolution,
    u2: &FieldSolution,
    epsilon: f64,
) -> Result<UniquenessReport> {
    if !(epsilon > 0.0) {
        return Err(Error::OutOfRange(format!("probe offset {epsilon} must be > 0")));
    }
    if u1.grid.origin != u2.grid.origin
        || u1.grid.dims != u2.grid.dims
        || u1.grid.h != u2.grid.h
        || u1.c != u2.c
        || u1.sigma != u2.sigma
    {
        return Err(Error::OutOfRange(
            "comparison requires identical grids and parameters".into(),
        ));
    }
    let mask = crate::elliptic::grid::classify(&u1.grid, &u1.domain)?;
    let rules = crate::elliptic::grid::ghost_rules(&u1.grid, &u1.domain, &mask)?;
    let recover = |field: &FieldSolution, rule: &crate::elliptic::grid::GhostRule| -> f64 {
        let interp: f64 = rule
            .nodes
            .iter()
            .map(|&(lin, w)| w * field.u[lin])
            .sum();
        (field.u[rule.ghost] - interp) / rule.boundary_weight
    };
    let mut boundary_excess = f64::NEG_INFINITY;
    for rule in &rules {
        boundary_excess = boundary_excess.max(recover(u2, rule) - recover(u1, rule));
    }
    let slack = UNIQUENESS_SLACK_PER_H2 * u1.grid.h * u1.grid.h;
    let mut interior_violations = 0usize;
    let mut sup_diff = 0.0_f64;
    for &lin in &mask.interior {
        let d = u2.u[lin] - u1.u[lin];
        sup_diff = sup_diff.max(d.abs());
        if d >= epsilon + slack {
            interior_violations += 1;
        }
    }
    Ok(UniquenessReport {
        epsilon,
        boundary_excess,
        premise_holds: epsilon > boundary_excess,
        interior_violations,
        sup_diff,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entire::boundary_f::BoundaryValueF;
    use crate::entire::barrier::BarrierPair;

    fn small_pair(value: f64) -> Arc<BarrierPair> {
        let f = BoundaryValueF::constant(value, 2.0).unwrap();
        Arc::new(BarrierPair::build(f, 2.0, 3, 60.0).unwrap())
    }

    #[test]
    fn lattice_is_symmetric_and_bounded() {
        let pts = ball_lattice(1.0, 0.5).unwrap();
        assert_eq!(pts.len(), 33);
        assert!(pts.iter().all(|p| p.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 1e-12));
        assert!(pts.contains(&vec![0.0, 0.0, 0.0]));
        assert!(ball_lattice(1.0, -0.5).is_err());
    }

    #[test]
    fn constant_data_reproduces_the_radial_reference() {
        let pair = small_pair(0.0);
        let k = ball_lattice(1.0, 0.5).unwrap();
        let res =
            exhaustion_solve(&pair, &[3.0, 5.0], &k, 0.25, &ExhaustOptions::default())
                .unwrap();
        assert_eq!(res.fields.len(), 2);
        assert_eq!(res.cauchy_gaps.len(), 1);
        assert!(res.rescued.iter().all(|&r| !r), "no rescue expected: {:?}", res.rescued);
        // The collapsed envelopes pin the boundary data to the radial
        // reference, so the discrete fields reproduce it on the lattice
        // up to truncation error.
        let mut worst = 0.0_f64;
        for (p, v) in k.iter().zip(&res.limit_on_k) {
            let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            worst = worst.max((v - pair.psi.eval(r).unwrap()).abs());
        }
        assert!(worst < 0.05, "lattice distance to the radial reference: {worst}");
        assert!(res.sandwich_margin > -0.05, "margin {}", res.sandwich_margin);
        assert!(res.monotone_excess < 0.05, "excess {}", res.monotone_excess);
        for m in &res.monitors {
            assert!(m.min_h2 > 0.0 && m.max_nu_interior < 2.0);
        }
    }

    #[test]
    fn shifting_the_data_shifts_the_solution() {
        let k = ball_lattice(1.0, 0.5).unwrap();
        let opts = ExhaustOptions::default();
        let base = exhaustion_solve(&small_pair(0.0), &[3.0], &k, 0.25, &opts).unwrap();
        let shifted =
            exhaustion_solve(&small_pair(3.0), &[3.0], &k, 0.25, &opts).unwrap();
        let worst = base
            .limit_on_k
            .iter()
            .zip(&shifted.limit_on_k)
            .map(|(a, b)| (b - a - 3.0).abs())
            .fold(0.0_f64, f64::max);
        assert!(worst < 1e-7, "translation broken by {worst}");
    }

    #[test]
    fn rejects_bad_radii_and_oversized_lattices() {
        let pair = small_pair(0.0);
        let k = ball_lattice(1.0, 0.5).unwrap();
        let opts = ExhaustOptions::default();
        assert!(matches!(
            exhaustion_solve(&pair, &[5.0, 3.0], &k, 1.0 / 3.0, &opts),
            Err(Error::OutOfRange(_))
        ));
        let wide = ball_lattice(2.9, 0.5).unwrap();
        assert!(matches!(
            exhaustion_solve(&pair, &[3.0], &wide, 1.0 / 3.0, &opts),
            Err(Error::OutOfRange(_))
        ));
        // Largest ball beyond the sampled reference range.
        assert!(matches!(
            exhaustion_solve(&pair, &[3.0, 70.0], &k, 1.0 / 3.0, &opts),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn uniqueness_probe_flags_only_true_orderings() {
        let pair = small_pair(0.0);
        let k = ball_lattice(0.5, 0.5).unwrap();
        let res =
            exhaustion_solve(&pair, &[2.0], &k, 0.25, &ExhaustOptions::default()).unwrap();
        let u1 = &res.fields[0];
        let mut u2 = u1.clone();
        for v in &mut u2.u {
            *v += 0.5;
        }
        // Shift by 0.5: the ordering premise holds for epsilon beyond
        // the shift and the forbidden interior set is empty.
        let strict = uniqueness_probe(u1, &u2, 0.75).unwrap();
        assert!((strict.boundary_excess - 0.5).abs() < 1e-9);
        assert!(strict.premise_holds);
        assert_eq!(strict.interior_violations, 0);
        assert!((strict.sup_diff - 0.5).abs() < 1e-12);
        // For epsilon below the shift the premise fails and the interior
        // set is genuinely nonempty.
        let loose = uniqueness_probe(u1, &u2, 0.25).unwrap();
        assert!(!loose.premise_holds);
        assert!(loose.interior_violations > 0);
        // Parameter mismatches are structural errors.
        let mut other = u1.clone();
        other.sigma = 0.5;
        assert!(uniqueness_probe(u1, &other, 0.1).is_err());
        assert!(uniqueness_probe(u1, &u2, -1.0).is_err());
    }
}
