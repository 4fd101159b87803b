//! Dirichlet solver for the graph-soliton equation on uniformly convex
//! domains.
//!
//! The solver discretizes the equation on a uniform Cartesian grid
//! ([`grid`]) over a convex domain ([`domain`]), evaluates the nonlinear
//! residual and its analytic linearization pointwise ([`operator`]), and
//! drives a damped Newton iteration with a sparse linear solver.  The
//! full-weight problem is reached by a continuation march in the
//! gradient weight ([`continuity`]), with every converged field audited
//! by the estimate monitors ([`monitors`]).

pub mod continuity;
pub mod domain;
pub mod field;
pub mod grid;
pub mod linsolve;
pub mod monitors;
pub mod newton;
pub mod operator;

pub use continuity::{
    continuity_solve, march_from, ContinuationSchedule, ContinuityRun, SigmaStep, MIN_SIGMA_STEP,
};
pub use domain::ConvexDomain;
pub use field::{BoundaryData, FieldSolution, Problem};
pub use grid::{GridSpec, NodeClass};
pub use monitors::{
    admissibility_audit, boundary_barrier_check, estimate_monitors, nu_gradient_sup,
    AdmissibilityAudit, BarrierReport, SigmaMonitor,
};
pub use newton::{newton_solve, parabolic_relax, NewtonOptions, NewtonReport};
pub use operator::{discretize_jet, SolitonParams};
