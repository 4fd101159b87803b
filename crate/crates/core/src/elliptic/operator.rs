//! Pointwise graph-soliton operator on grid jets.
//!
//! At an interior node the field's gradient and Hessian are read off by
//! central differences (including the four-point cross stencil for mixed
//! second derivatives). The nonlinear residual at parameters `(C, sigma)`
//! is
//!
//! ```text
//! res = sqrt(H2) - C + sigma * nu
//! ```
//!
//! with `nu = 1/sqrt(1 - |Du|^2)` and `H2` the normalized second mean
//! curvature of the graph. The linearization is analytic: writing
//! `S = nu * A * D2u`, `A = I + nu^2 Du Du^T`, the derivative of
//! `sqrt(H2)` with respect to `S` is
//!
//! ```text
//! G = (tr(S) I - S^T) / (n (n-1) sqrt(H2)),
//! ```
//!
//! and the chain rule through `S(Du, D2u)` gives the coefficient matrix
//! `W = nu A G` for the Hessian slot plus a gradient coefficient vector.
//! The quadratic form of `W` must stay positive definite at admissible
//! nodes; losing it is reported as an ellipticity defect.
//!
//! All computations run on reusable scratch buffers: no allocation per
//! node, no eigenvalue solves on the hot path (trace identities supply
//! `H1` and `H2`).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::grid::GridSpec;
use crate::geometry::SpacelikeJet;
use crate::{Error, Result};

/// Equation parameters for the Dirichlet problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitonParams {
    /// Prescribed curvature scale `C > 1`.
    pub c: f64,
    /// Gradient-term weight `sigma` in `[0, 1]`; `sigma = 1` is the
    /// translator equation, `sigma = 0` the umbilic benchmark.
    pub sigma: f64,
}

impl SolitonParams {
    /// Validated constructor.
    pub fn new(c: f64, sigma: f64) -> Result<Self> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(Error::OutOfRange(format!("curvature scale C = {c} must be > 1")));
        }
        if !(0.0..=1.0).contains(&sigma) {
            return Err(Error::OutOfRange(format!("sigma = {sigma} must lie in [0, 1]")));
        }
        Ok(SolitonParams { c, sigma })
    }
}

/// Per-axis linear-index strides for a grid (row-major, last axis
/// fastest).
pub fn strides(grid: &GridSpec) -> Vec<isize> {
    let dim = grid.dim();
    let mut s = vec![1isize; dim];
    for d in (0..dim.saturating_sub(1)).rev() {
        s[d] = s[d + 1] * grid.dims[d + 1] as isize;
    }
    s
}

/// Scalar outputs of a node evaluation.
#[derive(Debug, Clone, Copy)]
pub struct NodeEval {
    /// `sqrt(H2) - C + sigma * nu`; `NaN` when `H2 <= 0` or not
    /// spacelike.
    pub residual: f64,
    /// Gradient factor `1/sqrt(1 - |Du|^2)`; `NaN` when not spacelike.
    pub nu: f64,
    /// Normalized mean curvature.
    pub h1: f64,
    /// Normalized second mean curvature.
    pub h2: f64,
    /// `|Du| < 1`.
    pub spacelike: bool,
    /// `H1 > 0` and `H2 > 0`.
    pub admissible: bool,
}

/// Defect reported by the linearization at a single node.
#[derive(Debug, Clone, Copy)]
pub enum NodeDefect {
    /// The gradient reached or exceeded unit norm.
    NotSpacelike {
        /// `|Du|`.
        grad_norm: f64,
    },
    /// The curvature pair left the admissible cone.
    NotAdmissible {
        /// Normalized mean curvature.
        h1: f64,
        /// Normalized second mean curvature.
        h2: f64,
    },
    /// The second-order coefficient block lost positive definiteness.
    EllipticityLost {
        /// Smallest eigenvalue of the symmetrized coefficient block.
        min_eig: f64,
    },
}

/// Reusable scratch buffers for node evaluations.
///
/// `grad` and `hess` (row-major `dim x dim`) are the inputs; callers fill
/// them directly or via [`Workspace::extract_jet`]. After
/// [`Workspace::eval_jacobian`], `w` holds the Hessian coefficients and
/// `q` the gradient coefficients of the linearized residual.
#[derive(Debug, Clone)]
pub struct Workspace {
    dim: usize,
    inv_2h: f64,
    inv_h2: f64,
    inv_4h2: f64,
    /// Gradient slot.
    pub grad: Vec<f64>,
    /// Hessian slot, row-major.
    pub hess: Vec<f64>,
    /// Coefficients of the Hessian entries in the linearized residual.
    pub w: Vec<f64>,
    /// Coefficients of the gradient entries in the linearized residual.
    pub q: Vec<f64>,
    a: Vec<f64>,
    smat: Vec<f64>,
    gmat: Vec<f64>,
    chol: Vec<f64>,
    bg: Vec<f64>,
    gtg: Vec<f64>,
}

impl Workspace {
    /// Buffers for a given dimension and grid spacing.
    pub fn new(dim: usize, h: f64) -> Self {
        Workspace {
            dim,
            inv_2h: 1.0 / (2.0 * h),
            inv_h2: 1.0 / (h * h),
            inv_4h2: 1.0 / (4.0 * h * h),
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
            w: vec![0.0; dim * dim],
            q: vec![0.0; dim],
            a: vec![0.0; dim * dim],
            smat: vec![0.0; dim * dim],
            gmat: vec![0.0; dim * dim],
            chol: vec![0.0; dim * dim],
            bg: vec![0.0; dim],
            gtg: vec![0.0; dim],
        }
    }

    /// Dimension the buffers were sized for.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Derivative of `sqrt(H2)` with respect to the shape operator, valid
    /// after [`Workspace::eval_jacobian`].
    pub fn curvature_derivative(&self) -> &[f64] {
        &self.gmat
    }

    /// Fills `grad` and `hess` by central differences at linear index
    /// `lin`. The caller guarantees the full stencil is in bounds (true
    /// for interior nodes of a covering grid).
    pub fn extract_jet(&mut self, u: &[f64], lin: usize, strides: &[isize]) {
        let n = self.dim;
        let u0 = u[lin];
        let at = |off: isize| u[(lin as isize + off) as usize];
        for d in 0..n {
            let s = strides[d];
            let (up, um) = (at(s), at(-s));
            self.grad[d] = (up - um) * self.inv_2h;
            self.hess[d * n + d] = (up - 2.0 * u0 + um) * self.inv_h2;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (si, sj) = (strides[i], strides[j]);
                let v =
                    (at(si + sj) - at(si - sj) - at(-si + sj) + at(-si - sj)) * self.inv_4h2;
                self.hess[i * n + j] = v;
                self.hess[j * n + i] = v;
            }
        }
    }

    /// Evaluates the residual and curvature invariants from the current
    /// `grad`/`hess` slots. Never fails; defects surface as flags and
    /// `NaN` fields.
    pub fn eval(&mut self, params: &SolitonParams) -> NodeEval {
        let n = self.dim;
        let nf = n as f64;
        let g2: f64 = self.grad.iter().map(|g| g * g).sum();
        if g2 >= 1.0 {
            return NodeEval {
                residual: f64::NAN,
                nu: f64::NAN,
                h1: f64::NAN,
                h2: f64::NAN,
                spacelike: false,
                admissible: false,
            };
        }
        let nu2 = 1.0 / (1.0 - g2);
        let nu = nu2.sqrt();
        // A = I + nu^2 Du Du^T.
        for i in 0..n {
            for k in 0..n {
                self.a[i * n + k] =
                    nu2 * self.grad[i] * self.grad[k] + if i == k { 1.0 } else { 0.0 };
            }
        }
        // S = nu A B.
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.a[i * n + k] * self.hess[k * n + j];
                }
                self.smat[i * n + j] = nu * acc;
            }
        }
        let mut tr = 0.0;
        let mut tr2 = 0.0;
        for i in 0..n {
            tr += self.smat[i * n + i];
            for j in 0..n {
                tr2 += self.smat[i * n + j] * self.smat[j * n + i];
            }
        }
        let h1 = tr / nf;
        let h2 = (tr * tr - tr2) / (nf * (nf - 1.0));
        let admissible = h1 > 0.0 && h2 > 0.0;
        let residual =
            if h2 > 0.0 { h2.sqrt() - params.c + params.sigma * nu } else { f64::NAN };
        NodeEval { residual, nu, h1, h2, spacelike: true, admissible }
    }

    /// Evaluates the residual and its analytic derivatives with respect
    /// to the jet, storing them in `w` (Hessian slot) and `q` (gradient
    /// slot). Requires a spacelike, admissible jet and verifies the
    /// second-order coefficient block stays positive definite.
    pub fn eval_jacobian(
        &mut self,
        params: &SolitonParams,
    ) -> std::result::Result<NodeEval, NodeDefect> {
        let out = self.eval(params);
        if !out.spacelike {
            let g2: f64 = self.grad.iter().map(|g| g * g).sum();
            return Err(NodeDefect::NotSpacelike { grad_norm: g2.sqrt() });
        }
        if !out.admissible {
            return Err(NodeDefect::NotAdmissible { h1: out.h1, h2: out.h2 });
        }
        let n = self.dim;
        let nf = n as f64;
        let nu = out.nu;
        let sqrt_h2 = out.h2.sqrt();
        let tr: f64 = (0..n).map(|i| self.smat[i * n + i]).sum();
        let denom = nf * (nf - 1.0) * sqrt_h2;
        // G = (tr(S) I - S^T) / (n (n-1) sqrt(H2)).
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { tr } else { 0.0 };
                self.gmat[i * n + j] = (delta - self.smat[j * n + i]) / denom;
            }
        }
        // W = nu A G.
        for k in 0..n {
            for l in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += self.a[k * n + i] * self.gmat[i * n + l];
                }
                self.w[k * n + l] = nu * acc;
            }
        }
        // Gradient coefficients. With B = hess, g = grad:
        //   q = nu^2 sqrt(H2) g                    (nu-variation of S)
        //     + nu^3 (G (B g) + B (G^T g))         (rank-one A-variation)
        //     + 2 nu^5 ((G^T g) . (B g)) g         (nu^2-variation of A)
        //     + sigma nu^3 g                       (gradient term).
        for m in 0..n {
            self.bg[m] = (0..n).map(|k| self.hess[m * n + k] * self.grad[k]).sum();
            self.gtg[m] = (0..n).map(|i| self.gmat[i * n + m] * self.grad[i]).sum();
        }
        let gbg: f64 = (0..n).map(|j| self.gtg[j] * self.bg[j]).sum();
        let nu3 = nu * nu * nu;
        let nu5 = nu3 * nu * nu;
        for m in 0..n {
            let gm_bg: f64 = (0..n).map(|j| self.gmat[m * n + j] * self.bg[j]).sum();
            let b_gtg: f64 = (0..n).map(|j| self.hess[m * n + j] * self.gtg[j]).sum();
            self.q[m] = nu * nu * sqrt_h2 * self.grad[m]
                + nu3 * (gm_bg + b_gtg)
                + 2.0 * nu5 * self.grad[m] * gbg
                + params.sigma * nu3 * self.grad[m];
        }
        // Ellipticity: the symmetrized W must be positive definite.
        for i in 0..n {
            for j in 0..n {
                self.chol[i * n + j] = 0.5 * (self.w[i * n + j] + self.w[j * n + i]);
            }
        }
        if !cholesky_in_place(&mut self.chol, n) {
            let sym = DMatrix::from_fn(n, n, |i, j| {
                0.5 * (self.w[i * n + j] + self.w[j * n + i])
            });
            let min_eig = sym
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            return Err(NodeDefect::EllipticityLost { min_eig });
        }
        Ok(out)
    }
}

/// Attempts an in-place lower Cholesky factorization; `false` means the
/// matrix is not positive definite.
fn cholesky_in_place(m: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = m[j * n + j];
        for k in 0..j {
            d -= m[j * n + k] * m[j * n + k];
        }
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        m[j * n + j] = d;
        for i in (j + 1)..n {
            let mut v = m[i * n + j];
            for k in 0..j {
                v -= m[i * n + k] * m[j * n + k];
            }
            m[i * n + j] = v / d;
        }
    }
    true
}

/// Reads the finite-difference jet of a field at a linear node index as
/// a dense jet, for interoperability with the exact geometry layer.
pub fn discretize_jet(grid: &GridSpec, u: &[f64], lin: usize) -> Result<SpacelikeJet> {
    let dim = grid.dim();
    let st = strides(grid);
    let mut ws = Workspace::new(dim, grid.h);
    ws.extract_jet(u, lin, &st);
    SpacelikeJet::new(
        DVector::from_column_slice(&ws.grad),
        DMatrix::from_fn(dim, dim, |i, j| ws.hess[i * dim + j]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::domain::ConvexDomain;
    use crate::elliptic::grid::{classify, GridSpec};
    use crate::geometry;
    use approx::assert_abs_diff_eq;

    fn fill(grid: &GridSpec, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..grid.len()).map(|lin| f(&grid.point(&grid.to_multi(lin)))).collect()
    }

    #[test]
    fn affine_fields_have_zero_hessian() {
        let g = GridSpec::new(vec![-1.0; 3], vec![9, 9, 9], 0.25).unwrap();
        let u = fill(&g, |x| 0.2 + 0.3 * x[0] - 0.4 * x[1] + 0.1 * x[2]);
        let st = strides(&g);
        let mut ws = Workspace::new(3, g.h);
        ws.extract_jet(&u, g.to_lin(&[4, 4, 4]), &st);
        assert_abs_diff_eq!(ws.grad[0], 0.3, epsilon = 1e-13);
        assert_abs_diff_eq!(ws.grad[1], -0.4, epsilon = 1e-13);
        assert_abs_diff_eq!(ws.grad[2], 0.1, epsilon = 1e-13);
        for v in &ws.hess {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
        // An affine graph has H2 = 0: flagged inadmissible, residual NaN.
        let out = ws.eval(&SolitonParams::new(2.0, 1.0).unwrap());
        assert!(out.spacelike && !out.admissible);
        assert!(out.residual.is_nan());
    }

    #[test]
    fn quadratic_fields_have_exact_jets() {
        let g = GridSpec::new(vec![-1.0; 3], vec![9, 9, 9], 0.25).unwrap();
        let u = fill(&g, |x| {
            0.1 * x[0] * x[0] - 0.05 * x[1] * x[1] + 0.2 * x[0] * x[1] + 0.15 * x[1] * x[2]
                + 0.3 * x[0]
        });
        let st = strides(&g);
        let mut ws = Workspace::new(3, g.h);
        let node = [4usize, 3, 5];
        ws.extract_jet(&u, g.to_lin(&node), &st);
        let x = g.point(&node);
        assert_abs_diff_eq!(ws.grad[0], 0.2 * x[0] + 0.2 * x[1] + 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(ws.hess[0], 0.2, epsilon = 1e-11);
        assert_abs_diff_eq!(ws.hess[4], -0.1, epsilon = 1e-11);
        assert_abs_diff_eq!(ws.hess[1], 0.2, epsilon = 1e-11);
        assert_abs_diff_eq!(ws.hess[5], 0.15, epsilon = 1e-11);
        assert_abs_diff_eq!(ws.hess[2], 0.0, epsilon = 1e-11);
    }

    #[test]
    fn residual_matches_dense_geometry_route() {
        // The scratch-buffer evaluation must agree with the dense
        // eigenvalue-based route to round-off.
        let g = GridSpec::new(vec![-1.0; 3], vec![9, 9, 9], 0.25).unwrap();
        let u = fill(&g, |x| {
            0.5 * (1.0 / 4.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
                + 0.03 * x[0] * x[1]
        });
        let st = strides(&g);
        let mut ws = Workspace::new(3, g.h);
        let params = SolitonParams::new(2.0, 0.7).unwrap();
        for node in [[4usize, 4, 4], [3, 5, 4], [5, 3, 3]] {
            let lin = g.to_lin(&node);
            ws.extract_jet(&u, lin, &st);
            let fast = ws.eval(&params);
            let jet = discretize_jet(&g, &u, lin).unwrap();
            let dense = geometry::soliton_residual(&jet, params.c, params.sigma).unwrap();
            assert_abs_diff_eq!(fast.residual, dense, epsilon = 1e-13);
            let curv = geometry::shape_operator(&jet).unwrap();
            assert_abs_diff_eq!(fast.h1, curv.h1, epsilon = 1e-13);
            assert_abs_diff_eq!(fast.h2, curv.h2, epsilon = 1e-13);
            assert_abs_diff_eq!(fast.nu, curv.nu, epsilon = 1e-13);
        }
    }

    #[test]
    fn hyperboloid_residual_is_second_order() {
        // Sampling the exact umbilic solution everywhere (including
        // ghosts) isolates the central-difference truncation error,
        // which must shrink by ~4x when h halves.
        let c = 2.0;
        let dom = ConvexDomain::ball(vec![0.0; 3], 1.0).unwrap();
        let params = SolitonParams::new(c, 0.0).unwrap();
        let sup_residual = |h: f64| -> f64 {
            let g = GridSpec::cover(&dom, h).unwrap();
            let mask = classify(&g, &dom).unwrap();
            let u = fill(&g, |x| {
                (1.0 / (c * c) + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
            });
            let st = strides(&g);
            let mut ws = Workspace::new(3, g.h);
            let mut sup: f64 = 0.0;
            for &lin in &mask.interior {
                ws.extract_jet(&u, lin, &st);
                let out = ws.eval(&params);
                assert!(out.spacelike && out.admissible);
                sup = sup.max(out.residual.abs());
            }
            sup
        };
        let coarse = sup_residual(0.05);
        let fine = sup_residual(0.025);
        let ratio = coarse / fine;
        assert!(
            (3.3..=4.7).contains(&ratio),
            "truncation ratio {ratio} outside second-order band ({coarse} vs {fine})"
        );
    }

    #[test]
    fn jacobian_matches_directional_difference()
    {
        let g = GridSpec::new(vec![-1.0; 3], vec![9, 9, 9], 0.25).unwrap();
        let u = fill(&g, |x| {
            (0.25 + x.iter().map(|v| v * v).sum::<f64>()).sqrt() + 0.05 * x[0] * x[1]
                - 0.02 * x[2]
        });
        let st = strides(&g);
        let params = SolitonParams::new(2.0, 0.8).unwrap();
        let lin = g.to_lin(&[4, 5, 3]);
        let mut ws = Workspace::new(3, g.h);
        ws.extract_jet(&u, lin, &st);
        let base = ws.eval_jacobian(&params).expect("admissible node");
        let w = ws.w.clone();
        let q = ws.q.clone();
        // Jet perturbation directions (symmetric Hessian part).
        let dgrad = [0.013, -0.021, 0.008];
        let dhess = [0.05, 0.01, -0.02, 0.01, -0.03, 0.015, -0.02, 0.015, 0.04];
        let predicted: f64 = (0..3).map(|m| q[m] * dgrad[m]).sum::<f64>()
            + (0..9).map(|k| w[k] * dhess[k]).sum::<f64>();
        let mut errs = Vec::new();
        for t in [1e-4, 5e-5] {
            let mut ws2 = Workspace::new(3, g.h);
            ws2.extract_jet(&u, lin, &st);
            for m in 0..3 {
                ws2.grad[m] += t * dgrad[m];
            }
            for k in 0..9 {
                ws2.hess[k] += t * dhess[k];
            }
            let pert = ws2.eval(&params);
            let fd = (pert.residual - base.residual) / t;
            errs.push((fd - predicted).abs());
        }
        // First-order remainder: error scales with t.
        assert!(errs[0] < 1e-4, "fd mismatch {}", errs[0]);
        assert!(errs[1] < 0.75 * errs[0] + 1e-12);
    }

    #[test]
    fn gradient_coefficient_carries_sigma_term() {
        // q(sigma) - q(0) = sigma * nu^3 * Du exactly.
        let c = 2.0;
        let jet = geometry::hyperboloid_jet(c, &[0.3, -0.2, 0.4]);
        let mut ws = Workspace::new(3, 1.0);
        for m in 0..3 {
            ws.grad[m] = jet.grad[m];
            for k in 0..3 {
                ws.hess[m * 3 + k] = jet.hess[(m, k)];
            }
        }
        let qs = {
            ws.eval_jacobian(&SolitonParams::new(c, 1.0).unwrap()).unwrap();
            ws.q.clone()
        };
        let q0 = {
            ws.eval_jacobian(&SolitonParams::new(c, 0.0).unwrap()).unwrap();
            ws.q.clone()
        };
        let nu = geometry::gradient_factor(&jet.grad).unwrap();
        for m in 0..3 {
            assert_abs_diff_eq!(qs[m] - q0[m], nu.powi(3) * jet.grad[m], epsilon = 1e-12);
        }
    }

    #[test]
    fn umbilic_curvature_derivative_is_isotropic() {
        // On the exact hyperboloid S = c I, so G = I / n everywhere.
        let c = 2.0;
        for x in [[0.0, 0.0, 0.0], [0.3, -0.2, 0.4]] {
            let jet = geometry::hyperboloid_jet(c, &x);
            let mut ws = Workspace::new(3, 1.0);
            for m in 0..3 {
                ws.grad[m] = jet.grad[m];
                for k in 0..3 {
                    ws.hess[m * 3 + k] = jet.hess[(m, k)];
                }
            }
            ws.eval_jacobian(&SolitonParams::new(c, 0.0).unwrap()).unwrap();
            let g = ws.curvature_derivative();
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { 1.0 / 3.0 } else { 0.0 };
                    assert_abs_diff_eq!(g[i * 3 + j], expect, epsilon = 1e-12);
                }
            }
            // At the apex Du = 0 and the full coefficient block is
            // isotropic as well.
            if x == [0.0, 0.0, 0.0] {
                let nu = 1.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let expect = if i == j { nu / 3.0 } else { 0.0 };
                        assert_abs_diff_eq!(ws.w[i * 3 + j], expect, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn ellipticity_defect_detected() {
        // A jet with strongly indefinite curvature in the admissible
        // cone's complement reports NotAdmissible; one engineered at the
        // cone edge cannot be produced without leaving admissibility, so
        // here we check the defect taxonomy instead.
        let mut ws = Workspace::new(3, 1.0);
        ws.grad.copy_from_slice(&[0.0, 0.0, 0.0]);
        ws.hess.copy_from_slice(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -3.0]);
        let params = SolitonParams::new(2.0, 0.0).unwrap();
        match ws.eval_jacobian(&params) {
            Err(NodeDefect::NotAdmissible { h1, h2 }) => {
                assert!(h1 < 0.0 || h2 < 0.0);
            }
            other => panic!("expected admissibility defect, got {other:?}"),
        }
        // Spacelike violation.
        ws.grad.copy_from_slice(&[0.8, 0.8, 0.0]);
        match ws.eval_jacobian(&params) {
            Err(NodeDefect::NotSpacelike { grad_norm }) => assert!(grad_norm > 1.0),
            other => panic!("expected spacelike defect, got {other:?}"),
        }
    }

    #[test]
    fn params_validation() {
        assert!(SolitonParams::new(1.0, 0.5).is_err());
        assert!(SolitonParams::new(2.0, -0.1).is_err());
        assert!(SolitonParams::new(2.0, 1.1).is_err());
        assert!(SolitonParams::new(1.5, 1.0).is_ok());
    }
}
