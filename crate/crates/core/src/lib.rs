//! Downward translating solitons of the scalar curvature flow on spacelike
//! graphs in Minkowski space `R^{n,1}`.
//!
//! A spacelike graph `u : R^n -> R` (`|Du| < 1`) translating downward with
//! unit speed under the flow by the square root of the normalized second
//! elementary symmetric function of its principal curvatures satisfies
//!
//! ```text
//!     H_2^{1/2}(lambda)  =  H  -  nu ,        nu = 1 / sqrt(1 - |Du|^2),
//! ```
//!
//! where `lambda` are the eigenvalues of the shape operator of the graph and
//! `H` is a prescribed radial function with `H(r) -> C > 1`. This crate
//! builds such solitons numerically and verifies the structure that makes
//! the construction work:
//!
//! * [`geometry`] — jets of spacelike functions, the shape operator, the
//!   normalized curvature means `H_1`, `H_2`, admissibility of the cone
//!   `{H_1 > 0, H_2 > 0}`, and the Mac-Laurin gap `H_1 - H_2^{1/2} >= 0`.
//! * [`radial`] — the rotationally symmetric reduction: a singular ODE for
//!   `v = y^2` (`y = u'`), integrated through a vanishing-regularization
//!   limit, with the asymptotic expansion `u ~ C~ r - L log r + c_0` and its
//!   fitted coefficients.
//! * [`oracles`] — closed-form Riccati solutions, limits, and first-order
//!   linear comparison bounds used to cross-check the asymptotic machinery
//!   by an independent route.
//! * [`elliptic`] — the Dirichlet problem `H_2^{1/2} = C - sigma nu` on
//!   uniformly convex domains, discretized on a Cartesian grid with
//!   cut-cell boundary interpolation and solved by damped Newton inside a
//!   continuity method marching `sigma: 0 -> 1`.
//! * [`entire`] — entire solitons with prescribed asymptotic boundary data
//!   at spatial infinity, obtained as decreasing limits of Dirichlet
//!   solutions on exhausting balls between explicit sub/supersolution
//!   barriers built from shifted radial profiles.
//! * [`cli`] — configuration parsing and the deterministic command-line
//!   front end (`radial`, `dirichlet`, `entire`, `oracle`, `verify`).
//!
//! Numerical conventions used throughout: curvature means are normalized,
//! `H_k = sigma_k(lambda) / binom(n, k)`; the ambient dimension is `n + 1`
//! with `n >= 3`; and `C~ = sqrt(1 - 1/C^2)` denotes the lightlike-cone
//! slope associated with the curvature constant `C` of the soliton at
//! infinity.

#![warn(missing_docs)]
#![warn(clippy::all)]

pub mod cli;
pub mod elliptic;
pub mod entire;
mod error;
pub mod geometry;
pub mod numerics;
pub mod oracles;
pub mod radial;

pub use error::Error;

/// Convenient result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
