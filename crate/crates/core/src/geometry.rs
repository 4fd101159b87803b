//! Pointwise geometry of spacelike graphs in Minkowski space.
//!
//! For a function `u : R^n -> R` with `|Du| < 1`, the graph
//! `{(x, u(x))}` in `R^{n,1}` is spacelike. Its downward-pointing normal
//! has Lorentz factor `nu = 1/sqrt(1 - |Du|^2)`, and the shape operator in
//! graph coordinates is
//!
//! ```text
//!     S^i_j = nu * (delta_ik + u_i u_k nu^2) u_kj ,
//! ```
//!
//! i.e. `S = nu * (I + nu^2 Du Du^T) D2u`. `S` is not symmetric, but it is
//! conjugate to the symmetric matrix `nu * g^{-1/2} D2u g^{-1/2}` (with
//! `g = I - Du Du^T` the induced metric), so its eigenvalues — the
//! principal curvatures — are real whenever the jet is spacelike.
//!
//! Curvature means are normalized: `H_k = sigma_k(lambda) / binom(n, k)`.
//! The construction of solitons happens inside the admissible cone
//! `{H_1 > 0, H_2 > 0}`, where the Mac-Laurin inequality
//! `H_1 >= H_2^{1/2}` holds and the operator `H_2^{1/2}` is elliptic.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Second-order data of a candidate spacelike function at one point:
/// gradient and (symmetric) Hessian.
#[derive(Debug, Clone)]
pub struct SpacelikeJet {
    /// Gradient `Du`, length `n`.
    pub grad: DVector<f64>,
    /// Hessian `D2u`, `n x n` symmetric.
    pub hess: DMatrix<f64>,
}

impl SpacelikeJet {
    /// Bundle a gradient and Hessian, checking shapes and symmetry.
    ///
    /// Spacelikeness (`|Du| < 1`) is *not* required here — a jet may be
    /// built precisely to ask whether it is spacelike. Operations that
    /// need `nu` fail with [`Error::NotSpacelike`] instead.
    pub fn new(grad: DVector<f64>, hess: DMatrix<f64>) -> Result<Self> {
        let n = grad.len();
        if n < 2 {
            return Err(Error::OutOfRange(format!("jet dimension {n} < 2")));
        }
        if hess.nrows() != n || hess.ncols() != n {
            return Err(Error::OutOfRange(format!(
                "hessian is {}x{}, expected {n}x{n}",
                hess.nrows(),
                hess.ncols()
            )));
        }
        let asym = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| (hess[(i, j)] - hess[(j, i)]).abs())
            .fold(0.0_f64, f64::max);
        if asym > 1e-12 * (1.0 + hess.amax()) {
            return Err(Error::OutOfRange(format!("hessian asymmetry {asym} exceeds tolerance")));
        }
        Ok(SpacelikeJet { grad, hess })
    }

    /// Spatial dimension `n`.
    pub fn dim(&self) -> usize {
        self.grad.len()
    }
}

/// Lorentz factor `nu = 1/sqrt(1 - |Du|^2)` of the downward normal.
///
/// Fails with [`Error::NotSpacelike`] when `|Du| >= 1`.
pub fn gradient_factor(grad: &DVector<f64>) -> Result<f64> {
    let g2 = grad.norm_squared();
    if g2 >= 1.0 {
        return Err(Error::NotSpacelike { grad_norm: g2.sqrt() });
    }
    Ok(1.0 / (1.0 - g2).sqrt())
}

/// Shape operator, principal curvatures, and curvature means at one jet.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    /// The (generally non-symmetric) shape operator `S = nu A D2u`.
    pub shape: DMatrix<f64>,
    /// Principal curvatures, sorted descending.
    pub eigenvalues: DVector<f64>,
    /// Normalized mean curvature `H_1 = sigma_1 / n`.
    pub h1: f64,
    /// Normalized second mean `H_2 = sigma_2 / binom(n,2)`.
    pub h2: f64,
    /// Lorentz factor of the jet.
    pub nu: f64,
}

/// Shape operator of a spacelike jet, with eigenvalues extracted from the
/// symmetric conjugate `nu g^{-1/2} D2u g^{-1/2}` so they are exactly real.
pub fn shape_operator(jet: &SpacelikeJet) -> Result<CurvatureData> {
    let n = jet.dim();
    let nu = gradient_factor(&jet.grad)?;
    let nu2 = nu * nu;

    // S = nu (I + nu^2 Du Du^T) D2u.
    let a = DMatrix::identity(n, n) + (&jet.grad * jet.grad.transpose()) * nu2;
    let shape = (&a * &jet.hess) * nu;

    // g^{-1/2} = I + (nu - 1) e e^T with e = Du/|Du| (identity when Du = 0):
    // g = I - Du Du^T has eigenvalue 1 - |Du|^2 along Du and 1 across it.
    let gnorm = jet.grad.norm();
    let mut ghalf_inv = DMatrix::identity(n, n);
    if gnorm > 0.0 {
        let e = &jet.grad / gnorm;
        ghalf_inv += (&e * e.transpose()) * (nu - 1.0);
    }
    let sym = (&ghalf_inv * &jet.hess * &ghalf_inv) * nu;
    // Symmetrize away roundoff before the eigensolve.
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut eigs: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|x, y| y.partial_cmp(x).expect("real eigenvalues"));
    let eigenvalues = DVector::from_vec(eigs);

    let h1 = normalized_hk(&eigenvalues, 1)?;
    let h2 = normalized_hk(&eigenvalues, 2)?;
    Ok(CurvatureData { shape, eigenvalues, h1, h2, nu })
}

/// Normalized elementary symmetric mean
/// `H_k = sigma_k(lambda) / binom(n, k)`; `H_0 = 1`.
pub fn normalized_hk(eigenvalues: &DVector<f64>, k: usize) -> Result<f64> {
    let n = eigenvalues.len();
    if k > n {
        return Err(Error::OutOfRange(format!("H_{k} undefined for {n} principal curvatures")));
    }
    // Coefficients of prod_i (1 + t lambda_i) up to t^k.
    let mut coeff = vec![0.0_f64; k + 1];
    coeff[0] = 1.0;
    for lam in eigenvalues.iter() {
        for j in (1..=k).rev() {
            coeff[j] += lam * coeff[j - 1];
        }
    }
    let mut binom = 1.0_f64;
    for j in 0..k {
        binom *= (n - j) as f64 / (j + 1) as f64;
    }
    Ok(coeff[k] / binom)
}

/// Verdict of the admissibility test `{spacelike, H_1 > tau, H_2 > tau^2}`.
#[derive(Debug, Clone, Copy)]
pub struct Admissibility {
    /// Whether `|Du| < 1`.
    pub spacelike: bool,
    /// Whether the jet lies in the (tau-strengthened) admissible cone.
    pub admissible: bool,
    /// `H_1 - tau` (NaN when not spacelike).
    pub h1_margin: f64,
    /// `H_2 - tau^2` (NaN when not spacelike).
    pub h2_margin: f64,
}

/// Test membership in the admissible cone with safety margin `tau >= 0`:
/// spacelike, `H_1 > tau` and `H_2 > tau^2`.
pub fn admissibility(jet: &SpacelikeJet, tau: f64) -> Admissibility {
    match shape_operator(jet) {
        Ok(curv) => {
            let h1_margin = curv.h1 - tau;
            let h2_margin = curv.h2 - tau * tau;
            Admissibility {
                spacelike: true,
                admissible: h1_margin > 0.0 && h2_margin > 0.0,
                h1_margin,
                h2_margin,
            }
        }
        Err(_) => Admissibility {
            spacelike: false,
            admissible: false,
            h1_margin: f64::NAN,
            h2_margin: f64::NAN,
        },
    }
}

/// Mac-Laurin gap `H_1 - H_2^{1/2} >= 0` of an admissible jet.
///
/// Fails with [`Error::NotAdmissible`] outside the admissible cone, where
/// the gap loses its meaning (and its sign).
pub fn maclaurin_gap(jet: &SpacelikeJet) -> Result<f64> {
    let curv = shape_operator(jet)?;
    if curv.h1 <= 0.0 || curv.h2 <= 0.0 {
        return Err(Error::NotAdmissible { h1: curv.h1, h2: curv.h2 });
    }
    Ok(curv.h1 - curv.h2.sqrt())
}

/// Pointwise residual of the soliton equation `H_2^{1/2} = C - sigma nu`:
/// returns `H_2^{1/2} - C + sigma nu` for an admissible jet.
pub fn soliton_residual(jet: &SpacelikeJet, c: f64, sigma: f64) -> Result<f64> {
    let curv = shape_operator(jet)?;
    if curv.h1 <= 0.0 || curv.h2 <= 0.0 {
        return Err(Error::NotAdmissible { h1: curv.h1, h2: curv.h2 });
    }
    Ok(curv.h2.sqrt() - c + sigma * curv.nu)
}

/// Jet of the upper hyperboloid `u = sqrt(1/c^2 + |x|^2)`, the exact
/// solution of `H_2^{1/2} = C` (shape operator `c * I` everywhere).
pub fn hyperboloid_jet(c: f64, x: &[f64]) -> SpacelikeJet {
    let n = x.len();
    let rho2 = 1.0 / (c * c);
    let w = (rho2 + x.iter().map(|xi| xi * xi).sum::<f64>()).sqrt();
    let grad = DVector::from_iterator(n, x.iter().map(|xi| xi / w));
    let mut hess = DMatrix::identity(n, n) / w;
    for i in 0..n {
        for j in 0..n {
            hess[(i, j)] -= x[i] * x[j] / (w * w * w);
        }
    }
    SpacelikeJet { grad, hess }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vecn(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    #[test]
    fn lorentz_factor_at_rest_and_near_the_cone() {
        assert_abs_diff_eq!(gradient_factor(&vecn(&[0.0, 0.0, 0.0])).unwrap(), 1.0);
        let nu = gradient_factor(&vecn(&[0.99, 0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(nu, 7.0888121, epsilon = 1e-6);
        assert!(matches!(
            gradient_factor(&vecn(&[1.0, 0.0, 0.0])),
            Err(Error::NotSpacelike { .. })
        ));
    }

    #[test]
    fn lorentz_factor_squares_to_one_plus_graph_gradient_norm() {
        // nu^2 = 1 + |grad u|_g^2 with |grad u|_g^2 = |Du|^2/(1 - |Du|^2).
        let g = vecn(&[0.3, -0.5, 0.1]);
        let nu = gradient_factor(&g).unwrap();
        let g2 = g.norm_squared();
        assert_abs_diff_eq!(nu * nu, 1.0 + g2 / (1.0 - g2), epsilon = 1e-14);
    }

    #[test]
    fn shape_operator_of_radial_jet_matches_closed_form() {
        // At x = (r, 0, 0) a radial function has Du = (y, 0, 0) and
        // D2u = diag(y', y/r, y/r); then
        // S = diag(y'/(1-y^2), y/r, y/r) / sqrt(1-y^2).
        let (r, y, yp) = (1.0, 0.5, 0.3);
        let jet = SpacelikeJet::new(
            vecn(&[y, 0.0, 0.0]),
            DMatrix::from_diagonal(&vecn(&[yp, y / r, y / r])),
        )
        .unwrap();
        let curv = shape_operator(&jet).unwrap();
        let root = (1.0 - y * y).sqrt();
        assert_abs_diff_eq!(curv.shape[(0, 0)], yp / (1.0 - y * y) / root, epsilon = 1e-14);
        assert_abs_diff_eq!(curv.shape[(1, 1)], y / r / root, epsilon = 1e-14);
        assert_abs_diff_eq!(curv.shape[(2, 2)], y / r / root, epsilon = 1e-14);
        assert_abs_diff_eq!(curv.shape[(0, 1)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn hyperboloid_has_constant_principal_curvatures() {
        let c = 2.0;
        for x in [[0.0, 0.0, 0.0], [0.4, -0.2, 0.1], [1.0, 2.0, -0.5]] {
            let curv = shape_operator(&hyperboloid_jet(c, &x)).unwrap();
            for lam in curv.eigenvalues.iter() {
                assert_abs_diff_eq!(*lam, c, epsilon = 1e-10);
            }
            assert_abs_diff_eq!(curv.h2.sqrt(), c, epsilon = 1e-10);
            // sigma = 0: the hyperboloid solves H_2^{1/2} = C exactly.
            let jet = hyperboloid_jet(c, &x);
            assert_abs_diff_eq!(soliton_residual(&jet, c, 0.0).unwrap(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn normalized_means_match_hand_counts() {
        // n=3, lambda = (1,2,3): sigma_2 = 11, H_2 = 11/3; H_3 = 6.
        let eigs = vecn(&[1.0, 2.0, 3.0]);
        assert_abs_diff_eq!(normalized_hk(&eigs, 0).unwrap(), 1.0);
        assert_abs_diff_eq!(normalized_hk(&eigs, 1).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(normalized_hk(&eigs, 2).unwrap(), 11.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(normalized_hk(&eigs, 3).unwrap(), 6.0, epsilon = 1e-15);
        // n=4, lambda = (1,1,1,0): sigma_2 = 3, binom(4,2) = 6.
        let eigs4 = vecn(&[1.0, 1.0, 1.0, 0.0]);
        assert_abs_diff_eq!(normalized_hk(&eigs4, 2).unwrap(), 0.5, epsilon = 1e-15);
        assert!(normalized_hk(&eigs, 4).is_err());
    }

    #[test]
    fn maclaurin_gap_frozen_values() {
        // Diagonal jets with zero gradient realize prescribed curvatures.
        let gap = |eigs: &[f64]| {
            let n = eigs.len();
            let jet = SpacelikeJet::new(
                DVector::zeros(n),
                DMatrix::from_diagonal(&vecn(eigs)),
            )
            .unwrap();
            maclaurin_gap(&jet).unwrap()
        };
        assert_abs_diff_eq!(gap(&[3.0, 2.0, 1.0]), 2.0 - (11.0_f64 / 3.0).sqrt(), epsilon = 1e-12);
        // (1,1,4): H_1 = 2, H_2 = 3, gap = 2 - sqrt(3).
        assert_abs_diff_eq!(gap(&[1.0, 1.0, 4.0]), 2.0 - 3.0_f64.sqrt(), epsilon = 1e-12);
        // Equal curvatures: the inequality is tight.
        assert_abs_diff_eq!(gap(&[1.5, 1.5, 1.5]), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn inadmissible_jets_are_rejected() {
        let jet = SpacelikeJet::new(
            vecn(&[0.0, 0.0, 0.0]),
            DMatrix::from_diagonal(&vecn(&[1.0, -1.0, 0.2])),
        )
        .unwrap();
        assert!(matches!(maclaurin_gap(&jet), Err(Error::NotAdmissible { .. })));
        let adm = admissibility(&jet, 0.0);
        assert!(adm.spacelike && !adm.admissible);
        // Not spacelike: margins are NaN, verdict is inadmissible.
        let fast = SpacelikeJet::new(vecn(&[2.0, 0.0, 0.0]), DMatrix::identity(3, 3)).unwrap();
        let adm = admissibility(&fast, 0.0);
        assert!(!adm.spacelike && !adm.admissible && adm.h1_margin.is_nan());
    }

    #[test]
    fn eigenvalues_agree_with_shape_traces() {
        let jet = SpacelikeJet::new(
            vecn(&[0.41, -0.33, 0.12]),
            DMatrix::from_row_slice(3, 3, &[1.3, 0.2, -0.1, 0.2, 0.9, 0.3, -0.1, 0.3, 1.7]),
        )
        .unwrap();
        let curv = shape_operator(&jet).unwrap();
        let tr: f64 = curv.shape.trace();
        let tr2: f64 = (&curv.shape * &curv.shape).trace();
        let s1: f64 = curv.eigenvalues.iter().sum();
        let s2: f64 = curv.eigenvalues.iter().map(|l| l * l).sum();
        assert_abs_diff_eq!(tr, s1, epsilon = 1e-12);
        assert_abs_diff_eq!(tr2, s2, epsilon = 1e-12);
    }
}
