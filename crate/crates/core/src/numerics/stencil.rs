//! Finite-difference weights, interpolation, and quadrature on arbitrarily
//! spaced one-dimensional grids.
//!
//! The kernel is Fornberg's recursion, which produces in one sweep the
//! weights of the interpolating-polynomial derivative of every order
//! `0..=m` at a point, for any node set. Interpolation (order 0),
//! differentiation of sampled profiles, and piecewise-polynomial
//! quadrature are thin wrappers choosing local windows over a sorted grid.

/// Fornberg weights: for nodes `xs` and evaluation point `x0`, returns
/// `w[k][i]` such that `f^(k)(x0) ≈ Σ_i w[k][i] f(xs[i])` is exact for all
/// polynomials of degree `< xs.len()`, for every order `k <= m`.
pub fn fd_weights(xs: &[f64], x0: f64, m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    assert!(n > m, "need more than m+1 nodes for an order-m derivative");
    // c[i][k]: weight of node i for derivative order k.
    let mut c = vec![vec![0.0_f64; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    // Transpose to w[order][node].
    (0..=m).map(|k| (0..n).map(|i| c[i][k]).collect()).collect()
}

/// Index of the grid interval containing `x`: largest `i` with
/// `xs[i] <= x`, clamped to `[0, xs.len() - 2]`.
pub fn locate(xs: &[f64], x: f64) -> usize {
    debug_assert!(xs.len() >= 2);
    let i = xs.partition_point(|&v| v <= x);
    i.saturating_sub(1).min(xs.len() - 2)
}

/// Window of `width` consecutive node indices roughly centered on the
/// interval containing `x`, clipped to the grid.
fn window(xs: &[f64], x: f64, width: usize) -> std::ops::Range<usize> {
    let n = xs.len();
    let width = width.min(n);
    let i = locate(xs, x);
    let start = (i + 1).saturating_sub(width / 2).min(n - width);
    start..start + width
}

/// Value of the local degree-`(width-1)` interpolant of `(xs, ys)` at `x`.
pub fn interp(xs: &[f64], ys: &[f64], x: f64, width: usize) -> f64 {
    let r = window(xs, x, width);
    let w = fd_weights(&xs[r.clone()], x, 0);
    w[0].iter().zip(&ys[r]).map(|(wi, yi)| wi * yi).sum()
}

/// First derivative of the sampled profile at every node, via local
/// polynomial fits through `width` nodes (centered where possible).
pub fn derivative_at_nodes(xs: &[f64], ys: &[f64], width: usize) -> Vec<f64> {
    let n = xs.len();
    let width = width.min(n);
    (0..n)
        .map(|i| {
            let start = (i + 1).saturating_sub(width.div_ceil(2)).min(n - width);
            let r = start..start + width;
            let w = fd_weights(&xs[r.clone()], xs[i], 1);
            w[1].iter().zip(&ys[r]).map(|(wi, yi)| wi * yi).sum()
        })
        .collect()
}

// Three-point Gauss–Legendre rule on [-1, 1]; exact through degree 5, so
// per-interval integration of the local quartic interpolant is exact.
const GAUSS_X: [f64; 3] = [-0.774596669241483377, 0.0, 0.774596669241483377];
const GAUSS_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Cumulative integral of the sampled profile: `out[i] = ∫_{xs[0]}^{xs[i]}`,
/// integrating a local degree-4 interpolant over each grid interval.
pub fn cumulative_integral(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert!(n >= 2 && n == ys.len());
    let width = 5.min(n);
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let (a, b) = (xs[i], xs[i + 1]);
        let start = (i + 1).saturating_sub(width / 2 + 1).min(n - width);
        let r = start..start + width;
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut piece = 0.0;
        for (gx, gw) in GAUSS_X.iter().zip(&GAUSS_W) {
            let x = mid + half * gx;
            let w = fd_weights(&xs[r.clone()], x, 0);
            let val: f64 = w[0].iter().zip(&ys[r.clone()]).map(|(wi, yi)| wi * yi).sum();
            piece += gw * val;
        }
        acc += piece * half;
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn classic_central_weights_are_reproduced() {
        let w = fd_weights(&[-1.0, 0.0, 1.0], 0.0, 2);
        for (got, want) in w[0].iter().zip([0.0, 1.0, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
        for (got, want) in w[1].iter().zip([-0.5, 0.0, 0.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
        for (got, want) in w[2].iter().zip([1.0, -2.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn weights_differentiate_polynomials_exactly() {
        // Irregular nodes; f = 3x^4 - 2x^3 + x - 5 and its derivatives.
        let xs = [-2.0, -0.7, 0.1, 0.4, 1.3, 2.9];
        let f = |x: f64| 3.0 * x.powi(4) - 2.0 * x.powi(3) + x - 5.0;
        let f1 = |x: f64| 12.0 * x.powi(3) - 6.0 * x.powi(2) + 1.0;
        let f2 = |x: f64| 36.0 * x.powi(2) - 12.0 * x;
        let x0 = 0.37;
        let w = fd_weights(&xs, x0, 2);
        let eval = |wk: &[f64]| -> f64 { wk.iter().zip(&xs).map(|(wi, x)| wi * f(*x)).sum() };
        assert_abs_diff_eq!(eval(&w[0]), f(x0), epsilon = 1e-11);
        assert_abs_diff_eq!(eval(&w[1]), f1(x0), epsilon = 1e-10);
        assert_abs_diff_eq!(eval(&w[2]), f2(x0), epsilon = 1e-9);
    }

    #[test]
    fn interpolation_and_derivative_on_smooth_profile() {
        let xs: Vec<f64> = (0..200).map(|i| 0.02 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        assert_abs_diff_eq!(interp(&xs, &ys, 1.234, 6), 1.234_f64.sin(), epsilon = 1e-10);
        let d = derivative_at_nodes(&xs, &ys, 7);
        for (x, dx) in xs.iter().zip(&d) {
            assert_abs_diff_eq!(*dx, x.cos(), epsilon = 1e-9);
        }
    }

    #[test]
    fn cumulative_integral_is_high_order() {
        // Nonuniform grid: uniform near 0 then geometric, as the radial
        // solver uses.
        let mut xs = vec![0.0];
        while *xs.last().unwrap() < 1.0 {
            xs.push(xs.last().unwrap() + 0.01);
        }
        while *xs.last().unwrap() < 30.0 {
            xs.push(xs.last().unwrap() * 1.03);
        }
        let ys: Vec<f64> = xs.iter().map(|x: &f64| (-x / 3.0).exp()).collect();
        let cum = cumulative_integral(&xs, &ys);
        // Degree-4 local interpolation: per-interval error ~ h^6 f^(5),
        // dominated by the widest geometric cells (h ~ 0.9 at x = 30).
        // A trapezoid rule on the same grid errs at the 1e-3 level.
        for (x, c) in xs.iter().zip(&cum) {
            let exact = 3.0 * (1.0 - (-x / 3.0).exp());
            assert_abs_diff_eq!(*c, exact, epsilon = 1e-7);
        }
    }
}
