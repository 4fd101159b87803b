//! Damped Newton iteration for the discretized Dirichlet problem.
//!
//! Each iteration assembles the analytic Jacobian in sparse form — the
//! chain rule folds ghost nodes back onto the interior unknowns through
//! their linear extrapolation rules — solves the correction system with
//! ILUT-preconditioned BiCGStab, and backtracks the step until the new
//! iterate is spacelike, admissible at every interior node, and strictly
//! decreases the sup-norm residual.
//!
//! A parabolic relaxation step is provided as a fallback smoother: the
//! explicit flow `du/dt = sqrt(1 - |Du|^2) (sqrt(H2) - C + sigma nu)`,
//! with a sign-extended square root so the flow is defined (and pushes
//! toward admissibility) even where `H2 <= 0`.

use super::field::Problem;
use super::linsolve::{bicgstab_ilut, CsrMatrix};
use super::operator::{NodeDefect, SolitonParams, Workspace};
use crate::{Error, Result};

/// Newton iteration controls.
#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Target sup-norm of the pointwise residual.
    pub tol: f64,
    /// Maximum Newton iterations.
    pub max_iters: usize,
    /// Maximum step halvings per iteration.
    pub max_halvings: usize,
    /// Relative tolerance for the linear solves.
    pub lin_rel_tol: f64,
    /// Iteration cap for the linear solves.
    pub lin_max_iters: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iters: 30,
            max_halvings: 40,
            lin_rel_tol: 1e-10,
            lin_max_iters: 4000,
        }
    }
}

/// Outcome of a converged Newton run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NewtonReport {
    /// Iterations performed.
    pub iters: usize,
    /// Final sup-norm residual.
    pub residual_sup: f64,
    /// Linear iterations accumulated over all Newton steps.
    pub lin_iters_total: usize,
}

/// Evaluates the interior residual vector; `Err` carries the first
/// defective node. `out` is aligned with `problem.mask.interior`.
fn residual_vector(
    problem: &Problem,
    params: &SolitonParams,
    ws: &mut Workspace,
    u: &[f64],
    out: &mut [f64],
) -> std::result::Result<f64, (usize, NodeDefect)> {
    let mut sup: f64 = 0.0;
    for (row, &lin) in problem.mask.interior.iter().enumerate() {
        ws.extract_jet(u, lin, &problem.strides);
        let eval = ws.eval(params);
        if !eval.spacelike {
            let g2: f64 = ws.grad.iter().map(|g| g * g).sum();
            return Err((lin, NodeDefect::NotSpacelike { grad_norm: g2.sqrt() }));
        }
        if !eval.admissible {
            return Err((lin, NodeDefect::NotAdmissible { h1: eval.h1, h2: eval.h2 }));
        }
        out[row] = eval.residual;
        sup = sup.max(eval.residual.abs());
    }
    Ok(sup)
}

fn defect_error(problem: &Problem, lin: usize, defect: NodeDefect) -> Error {
    let node = problem.grid.to_multi(lin);
    match defect {
        NodeDefect::NotSpacelike { grad_norm } => Error::NotSpacelike { grad_norm },
        NodeDefect::NotAdmissible { h1, h2 } => Error::NotAdmissible { h1, h2 },
        NodeDefect::EllipticityLost { min_eig } => Error::EllipticityLost { node, min_eig },
    }
}

/// Assembles the sparse Jacobian of the interior residual map at `u`.
///
/// Row layout follows `problem.mask.interior`. Ghost-node dependencies
/// are eliminated through their linear rules, so the matrix couples
/// interior unknowns only.
pub fn assemble_jacobian(
    problem: &Problem,
    sigma: f64,
    u: &[f64],
) -> Result<CsrMatrix> {
    let params = SolitonParams::new(problem.c, sigma)?;
    let dim = problem.grid.dim();
    let h = problem.grid.h;
    let inv_h2 = 1.0 / (h * h);
    let inv_2h = 1.0 / (2.0 * h);
    let inv_4h2 = 1.0 / (4.0 * h * h);
    let n_rows = problem.interior_count();
    let mut ws = Workspace::new(dim, h);
    let mut a = CsrMatrix::with_capacity(n_rows, n_rows * (2 * dim * dim + 1));
    let mut row: Vec<(u32, f64)> = Vec::with_capacity(4 * dim * dim);

    // Scatters a coefficient on a stencil node, following ghost rules.
    let scatter = |row: &mut Vec<(u32, f64)>, lin: usize, coeff: f64| {
        let r = problem.row_of[lin];
        if r != u32::MAX {
            row.push((r, coeff));
            return;
        }
        let rule_idx = problem.rule_of[lin];
        debug_assert_ne!(rule_idx, u32::MAX, "stencil hit an exterior node");
        if rule_idx != u32::MAX {
            for &(node, w) in &problem.rules[rule_idx as usize].nodes {
                let rr = problem.row_of[node];
                debug_assert_ne!(rr, u32::MAX);
                row.push((rr, coeff * w));
            }
        }
    };

    for &lin in &problem.mask.interior {
        ws.extract_jet(u, lin, &problem.strides);
        if let Err(defect) = ws.eval_jacobian(&params) {
            return Err(defect_error(problem, lin, defect));
        }
        row.clear();
        // Center: pure second-derivative diagonal terms.
        let mut center = 0.0;
        for d in 0..dim {
            center -= 2.0 * ws.w[d * dim + d] * inv_h2;
        }
        row.push((problem.row_of[lin], center));
        // Axis neighbors.
        for d in 0..dim {
            let s = problem.strides[d];
            let wdd = ws.w[d * dim + d] * inv_h2;
            let qd = ws.q[d] * inv_2h;
            scatter(&mut row, (lin as isize + s) as usize, wdd + qd);
            scatter(&mut row, (lin as isize - s) as usize, wdd - qd);
        }
        // Mixed-derivative corners.
        for i in 0..dim {
            for j in (i + 1)..dim {
                let wij = (ws.w[i * dim + j] + ws.w[j * dim + i]) * inv_4h2;
                let (si, sj) = (problem.strides[i], problem.strides[j]);
                scatter(&mut row, (lin as isize + si + sj) as usize, wij);
                scatter(&mut row, (lin as isize - si - sj) as usize, wij);
                scatter(&mut row, (lin as isize + si - sj) as usize, -wij);
                scatter(&mut row, (lin as isize - si + sj) as usize, -wij);
            }
        }
        a.push_row(&mut row);
    }
    Ok(a)
}

/// Runs the damped Newton iteration in place on `u`.
///
/// `u` must be a full-grid field (ghosts consistent or not; they are
/// refreshed first). On success the field solves the discrete problem to
/// `opts.tol` in the sup norm.
pub fn newton_solve(
    problem: &Problem,
    sigma: f64,
    u: &mut [f64],
    opts: &NewtonOptions,
) -> Result<NewtonReport> {
    let params = SolitonParams::new(problem.c, sigma)?;
    let n = problem.interior_count();
    let mut ws = Workspace::new(problem.grid.dim(), problem.grid.h);
    let mut f = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut delta = vec![0.0; n];
    let mut trial = u.to_vec();
    let mut trial_f = vec![0.0; n];
    let mut lin_iters_total = 0usize;

    problem.apply_ghosts(u);
    let mut res_sup = residual_vector(problem, &params, &mut ws, u, &mut f)
        .map_err(|(lin, d)| defect_error(problem, lin, d))?;

    for iter in 1..=opts.max_iters {
        if res_sup <= opts.tol {
            return Ok(NewtonReport {
                iters: iter - 1,
                residual_sup: res_sup,
                lin_iters_total,
            });
        }
        let jac = assemble_jacobian(problem, sigma, u)?;
        for i in 0..n {
            rhs[i] = -f[i];
        }
        delta.fill(0.0);
        let stats =
            bicgstab_ilut(&jac, &rhs, &mut delta, opts.lin_rel_tol, opts.lin_max_iters)?;
        lin_iters_total += stats.iters;

        // Backtracking line search on the sup norm with admissibility
        // and spacelike guards.
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            trial.copy_from_slice(u);
            for (row, &lin) in problem.mask.interior.iter().enumerate() {
                trial[lin] += alpha * delta[row];
            }
            problem.apply_ghosts(&mut trial);
            match residual_vector(problem, &params, &mut ws, &trial, &mut trial_f) {
                Ok(trial_sup)
                    if trial_sup < (1.0 - 1e-4 * alpha) * res_sup
                        || trial_sup <= opts.tol =>
                {
                    u.copy_from_slice(&trial);
                    f.copy_from_slice(&trial_f);
                    res_sup = trial_sup;
                    accepted = true;
                    break;
                }
                _ => {
                    alpha *= 0.5;
                    if alpha < 1e-8 {
                        break;
                    }
                }
            }
        }
        if !accepted {
            return Err(Error::LineSearchStalled { sigma, iter, step: alpha });
        }
    }
    if res_sup <= opts.tol {
        return Ok(NewtonReport {
            iters: opts.max_iters,
            residual_sup: res_sup,
            lin_iters_total,
        });
    }
    Err(Error::MaxItersExceeded {
        sigma,
        residual: res_sup,
        iters: opts.max_iters,
        tol: opts.tol,
    })
}

/// One explicit parabolic relaxation sweep: `u += dt * res / nu` with a
/// sign-extended `sqrt(H2)`, retrying with a halved `dt` if the sweep
/// breaks the spacelike bound or grows the defect. Returns the `dt`
/// actually used and the post-sweep sup defect.
pub fn parabolic_relax(
    problem: &Problem,
    sigma: f64,
    u: &mut [f64],
    dt: f64,
    sweeps: usize,
) -> Result<(f64, f64)> {
    let params = SolitonParams::new(problem.c, sigma)?;
    let mut ws = Workspace::new(problem.grid.dim(), problem.grid.h);
    let n = problem.interior_count();
    let mut defect = vec![0.0; n];
    let mut speed = vec![0.0; n];
    let mut dt_cur = dt;
    problem.apply_ghosts(u);

    // Signed defect with sign-extended square root; defined everywhere
    // spacelike.
    let eval_defect = |ws: &mut Workspace, u: &[f64], defect: &mut [f64], speed: &mut [f64]| -> std::result::Result<f64, usize> {
        let mut sup: f64 = 0.0;
        for (row, &lin) in problem.mask.interior.iter().enumerate() {
            ws.extract_jet(u, lin, &problem.strides);
            let g2: f64 = ws.grad.iter().map(|g| g * g).sum();
            if g2 >= 1.0 {
                return Err(lin);
            }
            let out = ws.eval(&params);
            let root = if out.h2 >= 0.0 { out.h2.sqrt() } else { -(-out.h2).sqrt() };
            let d = root - params.c + params.sigma * out.nu;
            defect[row] = d;
            speed[row] = 1.0 / out.nu;
            sup = sup.max(d.abs());
        }
        Ok(sup)
    };

    let mut sup = eval_defect(&mut ws, u, &mut defect, &mut speed).map_err(|lin| {
        Error::NotSpacelike {
            grad_norm: {
                ws.extract_jet(u, lin, &problem.strides);
                ws.grad.iter().map(|g| g * g).sum::<f64>().sqrt()
            },
        }
    })?;

    let mut trial = u.to_vec();
    for _ in 0..sweeps {
        let mut stepped = false;
        for _ in 0..30 {
            trial.copy_from_slice(u);
            for (row, &lin) in problem.mask.interior.iter().enumerate() {
                trial[lin] += dt_cur * speed[row] * defect[row];
            }
            problem.apply_ghosts(&mut trial);
            let mut t_defect = vec![0.0; n];
            let mut t_speed = vec![0.0; n];
            match eval_defect(&mut ws, &trial, &mut t_defect, &mut t_speed) {
                Ok(t_sup) if t_sup <= sup * (1.0 + 1e-9) || t_sup <= 1e-12 => {
                    u.copy_from_slice(&trial);
                    defect = t_defect;
                    speed = t_speed;
                    sup = t_sup;
                    stepped = true;
                    break;
                }
                _ => dt_cur *= 0.5,
            }
        }
        if !stepped {
            return Err(Error::NoConvergence {
                what: "parabolic relaxation",
                detail: format!("time step collapsed below {dt_cur:.3e}"),
            });
        }
    }
    Ok((dt_cur, sup))
}
