//! Serial sparse linear algebra for the Newton systems.
//!
//! Compressed sparse row storage with 32-bit column indices, a threshold
//! incomplete LU factorization as preconditioner, and stabilized
//! bi-conjugate gradients. Everything is deterministic and
//! single-threaded; results are bitwise reproducible across runs.

use crate::{Error, Result};

/// Relative drop tolerance of the incomplete factorization used by the
/// Newton solves. Entries below this fraction of the row norm are
/// discarded during elimination.
pub const ILUT_DROP_TOL: f64 = 1e-4;

/// Maximum kept off-diagonal entries per row and side (lower/upper) in
/// the incomplete factorization.
pub const ILUT_MAX_FILL: usize = 20;

/// Square sparse matrix in compressed sparse row form.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    /// Matrix dimension.
    pub n: usize,
    /// Row start offsets into `col_idx`/`vals`, length `n + 1`.
    pub row_ptr: Vec<usize>,
    /// Column indices, sorted within each row.
    pub col_idx: Vec<u32>,
    /// Entry values, aligned with `col_idx`.
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Starts an empty matrix for incremental row-by-row assembly.
    pub fn with_capacity(n: usize, nnz_estimate: usize) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        CsrMatrix {
            n,
            row_ptr,
            col_idx: Vec::with_capacity(nnz_estimate),
            vals: Vec::with_capacity(nnz_estimate),
        }
    }

    /// Appends the next row. Entries need not be sorted or unique;
    /// duplicates are summed.
    pub fn push_row(&mut self, entries: &mut Vec<(u32, f64)>) {
        entries.sort_unstable_by_key(|e| e.0);
        let mut i = 0;
        while i < entries.len() {
            let col = entries[i].0;
            let mut v = entries[i].1;
            let mut j = i + 1;
            while j < entries.len() && entries[j].0 == col {
                v += entries[j].1;
                j += 1;
            }
            self.col_idx.push(col);
            self.vals.push(v);
            i = j;
        }
        self.row_ptr.push(self.col_idx.len());
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k] as usize];
            }
            y[i] = acc;
        }
    }
}

/// Threshold incomplete LU factorization.
///
/// Rows are eliminated in order; updates smaller than `tau` times the
/// row norm are dropped, and at most `max_fill` entries per side of the
/// diagonal survive per row. `L` has unit diagonal. Vanishing pivots are
/// floored in magnitude so the triangular solves stay finite; an
/// effectively singular system then surfaces as a non-converging
/// iteration rather than a division blow-up.
#[derive(Debug, Clone)]
pub struct Ilut {
    n: usize,
    l_ptr: Vec<usize>,
    l_col: Vec<u32>,
    l_val: Vec<f64>,
    u_ptr: Vec<usize>,
    u_col: Vec<u32>,
    u_val: Vec<f64>,
    u_diag: Vec<usize>,
}

impl Ilut {
    /// Factorizes the matrix with drop tolerance `tau` and per-side fill
    /// cap `max_fill`.
    pub fn factor(a: &CsrMatrix, tau: f64, max_fill: usize) -> Ilut {
        let n = a.n;
        let mut l_ptr = vec![0usize; n + 1];
        let mut l_col: Vec<u32> = Vec::new();
        let mut l_val: Vec<f64> = Vec::new();
        let mut u_ptr = vec![0usize; n + 1];
        let mut u_col: Vec<u32> = Vec::new();
        let mut u_val: Vec<f64> = Vec::new();
        let mut u_diag = vec![0usize; n];

        // Dense scatter workspace plus the sorted list of touched
        // columns; cleared after each row so the cost stays proportional
        // to the actual fill.
        let mut w = vec![0.0f64; n];
        let mut in_w = vec![false; n];
        let mut touched: Vec<u32> = Vec::new();
        let mut keep_l: Vec<(u32, f64)> = Vec::new();
        let mut keep_u: Vec<(u32, f64)> = Vec::new();

        for i in 0..n {
            let mut row_norm = 0.0f64;
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[k] as usize;
                w[j] = a.vals[k];
                if !in_w[j] {
                    in_w[j] = true;
                    touched.push(j as u32);
                }
                row_norm += a.vals[k] * a.vals[k];
            }
            let row_norm = row_norm.sqrt();
            let drop_tol = tau * row_norm;

            touched.sort_unstable();
            let mut t = 0;
            while t < touched.len() {
                let k = touched[t] as usize;
                t += 1;
                if k >= i {
                    break;
                }
                let piv = w[k] / u_val[u_diag[k]];
                if piv.abs() < drop_tol {
                    w[k] = 0.0;
                    continue;
                }
                w[k] = piv;
                for q in (u_diag[k] + 1)..u_ptr[k + 1] {
                    let j = u_col[q] as usize;
                    let upd = piv * u_val[q];
                    if in_w[j] {
                        w[j] -= upd;
                    } else if upd.abs() >= drop_tol {
                        w[j] = -upd;
                        in_w[j] = true;
                        // Fill-in columns past the current position are
                        // spliced into the sorted tail so later pivots
                        // still run in ascending order.
                        let pos =
                            touched[t..].binary_search(&(j as u32)).unwrap_err() + t;
                        touched.insert(pos, j as u32);
                    }
                }
            }

            keep_l.clear();
            keep_u.clear();
            let mut diag = 0.0f64;
            for &jc in &touched {
                let j = jc as usize;
                let v = w[j];
                w[j] = 0.0;
                in_w[j] = false;
                if j == i {
                    diag = v;
                } else if v.abs() >= drop_tol {
                    if j < i {
                        keep_l.push((jc, v));
                    } else {
                        keep_u.push((jc, v));
                    }
                }
            }
            touched.clear();
            for keep in [&mut keep_l, &mut keep_u] {
                if keep.len() > max_fill {
                    keep.sort_unstable_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
                    keep.truncate(max_fill);
                    keep.sort_unstable_by_key(|e| e.0);
                }
            }
            let floor = 1e-12 * row_norm.max(f64::MIN_POSITIVE);
            if diag.abs() < floor {
                diag = if diag >= 0.0 { floor } else { -floor };
            }
            for &(c, v) in keep_l.iter() {
                l_col.push(c);
                l_val.push(v);
            }
            l_ptr[i + 1] = l_col.len();
            u_diag[i] = u_col.len();
            u_col.push(i as u32);
            u_val.push(diag);
            for &(c, v) in keep_u.iter() {
                u_col.push(c);
                u_val.push(v);
            }
            u_ptr[i + 1] = u_col.len();
        }
        Ilut { n, l_ptr, l_col, l_val, u_ptr, u_col, u_val, u_diag }
    }

    /// Applies `x = (L U)^{-1} r`.
    pub fn solve(&self, r: &[f64], x: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = r[i];
            for k in self.l_ptr[i]..self.l_ptr[i + 1] {
                acc -= self.l_val[k] * x[self.l_col[k] as usize];
            }
            x[i] = acc;
        }
        for i in (0..self.n).rev() {
            let mut acc = x[i];
            for k in (self.u_diag[i] + 1)..self.u_ptr[i + 1] {
                acc -= self.u_val[k] * x[self.u_col[k] as usize];
            }
            x[i] = acc / self.u_val[self.u_diag[i]];
        }
    }

    /// Stored entries across both factors.
    pub fn nnz(&self) -> usize {
        self.l_col.len() + self.u_col.len()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    /// Iterations consumed.
    pub iters: usize,
    /// Final true relative residual `|b - A x| / |b|`.
    pub rel_residual: f64,
}

/// Solves `A x = b` by ILUT-preconditioned BiCGStab to the given
/// relative residual, starting from `x` as the initial guess.
pub fn bicgstab_ilut(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iters: usize,
) -> Result<SolveStats> {
    let n = a.n;
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats { iters: 0, rel_residual: 0.0 });
    }
    let precond = Ilut::factor(a, ILUT_DROP_TOL, ILUT_MAX_FILL);
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r_hat = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];

    let fail = |iters: usize, achieved: f64| Error::LinearSolveFailed {
        achieved,
        iters,
        required: rel_tol,
    };

    for iter in 1..=max_iters {
        let rho_next = dot(&r_hat, &r);
        if rho_next.abs() < 1e-300 {
            return Err(fail(iter, norm(&r) / b_norm));
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond.solve(&p, &mut p_hat);
        a.matvec(&p_hat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.abs() < 1e-300 {
            return Err(fail(iter, norm(&r) / b_norm));
        }
        alpha = rho / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= rel_tol * b_norm {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            return finish(a, b, x, b_norm, rel_tol, iter, fail);
        }
        precond.solve(&s, &mut s_hat);
        a.matvec(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt.abs() < 1e-300 {
            return Err(fail(iter, norm(&s) / b_norm));
        }
        omega = dot(&t, &s) / tt;
        if omega.abs() < 1e-300 {
            return Err(fail(iter, norm(&s) / b_norm));
        }
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm(&r) <= rel_tol * b_norm {
            return finish(a, b, x, b_norm, rel_tol, iter, fail);
        }
    }
    let mut ax = vec![0.0; n];
    a.matvec(x, &mut ax);
    let achieved =
        (0..n).map(|i| (b[i] - ax[i]).powi(2)).sum::<f64>().sqrt() / b_norm;
    Err(fail(max_iters, achieved))
}

/// Confirms convergence with the true residual (the recursive residual
/// of BiCGStab can drift); accepts up to a small safety factor.
fn finish(
    a: &CsrMatrix,
    b: &[f64],
    x: &[f64],
    b_norm: f64,
    rel_tol: f64,
    iters: usize,
    fail: impl Fn(usize, f64) -> Error,
) -> Result<SolveStats> {
    let mut ax = vec![0.0; a.n];
    a.matvec(x, &mut ax);
    let true_rel =
        (0..a.n).map(|i| (b[i] - ax[i]).powi(2)).sum::<f64>().sqrt() / b_norm;
    if true_rel <= 10.0 * rel_tol {
        Ok(SolveStats { iters, rel_residual: true_rel })
    } else {
        Err(fail(iters, true_rel))
    }
}
