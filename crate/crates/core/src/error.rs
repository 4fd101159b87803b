use thiserror::Error;

/// Unified error type for the soliton construction pipeline.
///
/// Variants are grouped by the stage that raises them; every message carries
/// enough numeric context to diagnose a failed run from the error alone.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    // ─── pointwise geometry ────────────────────────────────────────────────
    /// The gradient has `|Du| >= 1`: the graph is not spacelike there.
    #[error("not spacelike: |Du| = {grad_norm} >= 1")]
    NotSpacelike {
        /// Euclidean norm of the offending gradient.
        grad_norm: f64,
    },

    /// The jet leaves the admissible cone `{H_1 > 0, H_2 > 0}`.
    #[error("not admissible: H_1 = {h1}, H_2 = {h2} (both must be > 0)")]
    NotAdmissible {
        /// Normalized mean curvature at the point.
        h1: f64,
        /// Normalized scalar-curvature mean at the point.
        h2: f64,
    },

    /// A scalar argument violates a documented domain restriction.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    // ─── one-dimensional solvers ───────────────────────────────────────────
    /// An iteration (ODE regularization ladder, fit, ...) failed to settle
    /// within its tolerance.
    #[error("no convergence in {what}: {detail}")]
    NoConvergence {
        /// Short name of the iteration that failed.
        what: &'static str,
        /// Numeric details (achieved vs required tolerance, etc).
        detail: String,
    },

    /// A quantity left the region in which the construction is valid
    /// (profile bounds, positivity of a Riccati trajectory, ...).
    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    /// A Riccati trajectory that must stay positive crossed zero.
    #[error("positivity lost at r = {r}: z = {z}")]
    PositivityLost {
        /// Radius at which the sign change was detected.
        r: f64,
        /// Offending value.
        z: f64,
    },

    /// An asymptotic fit window contains too few samples to be meaningful.
    #[error("fit window [{lo}, {hi}] holds {count} samples; at least {needed} required")]
    WindowTooSmall {
        /// Lower end of the requested window.
        lo: f64,
        /// Upper end of the requested window.
        hi: f64,
        /// Samples available inside the window.
        count: usize,
        /// Minimum sample count for the fit.
        needed: usize,
    },

    // ─── grid discretization and nonlinear solves ──────────────────────────
    /// A ghost node near the boundary could not be given an interpolation
    /// rule along any grid line (grid too coarse for the domain shape).
    #[error("incomplete boundary stencil at grid node {node:?}")]
    StencilIncomplete {
        /// Multi-index of the node without a usable rule.
        node: Vec<usize>,
    },

    /// The linearized operator stopped being elliptic at some node.
    #[error("ellipticity lost at node {node:?}: min eigenvalue {min_eig} of the symmetrized coefficient matrix")]
    EllipticityLost {
        /// Multi-index of the node.
        node: Vec<usize>,
        /// Smallest eigenvalue of the symmetrized second-order coefficients.
        min_eig: f64,
    },

    /// Backtracking could not find an admissible damped Newton step.
    #[error("line search stalled at sigma = {sigma}, Newton iteration {iter} (step factor {step})")]
    LineSearchStalled {
        /// Continuation parameter of the failing solve.
        sigma: f64,
        /// Newton iteration at which backtracking gave up.
        iter: usize,
        /// Final rejected step factor.
        step: f64,
    },

    /// Newton used up its iteration budget without meeting the tolerance.
    #[error("Newton did not converge at sigma = {sigma}: residual {residual} after {iters} iterations (tol {tol})")]
    MaxItersExceeded {
        /// Continuation parameter of the failing solve.
        sigma: f64,
        /// Final residual sup-norm.
        residual: f64,
        /// Iterations spent.
        iters: usize,
        /// Required tolerance.
        tol: f64,
    },

    /// The continuity method could not bridge a sigma interval even after
    /// repeated step bisection.
    #[error("continuation stalled between sigma = {from} and sigma = {to} (minimum step {min_step})")]
    ContinuationStalled {
        /// Last parameter value that converged.
        from: f64,
        /// Target that kept failing.
        to: f64,
        /// Step-size floor that was reached.
        min_step: f64,
    },

    /// The inner Krylov solver failed to reduce the residual as required.
    #[error("linear solve failed: relative residual {achieved} after {iters} iterations (required {required})")]
    LinearSolveFailed {
        /// Relative residual reached before giving up.
        achieved: f64,
        /// Iterations spent.
        iters: usize,
        /// Required relative residual.
        required: f64,
    },

    // ─── barriers and exhaustion ───────────────────────────────────────────
    /// The inward normal slope at the boundary left its barrier corridor
    /// `[-y_sigma(R), 0]` by more than the discretization tolerance.
    #[error(
        "boundary barrier violated: inward normal slope range [{min_slope}, {max_slope}] \
         vs corridor [-{bound}, 0] (tolerance {tol})"
    )]
    BarrierViolated {
        /// Most negative observed inward normal slope.
        min_slope: f64,
        /// Largest observed inward normal slope.
        max_slope: f64,
        /// Radial barrier slope `y_sigma(R)`.
        bound: f64,
        /// Tolerance that was exceeded.
        tol: f64,
    },


    /// Lower barrier exceeded the upper barrier: the quadratic constant of
    /// the boundary data was too small even after retries.
    #[error("barrier crossing: lower exceeds upper by {gap} at {point:?} (M = {m})")]
    BarrierCrossing {
        /// Worst crossing magnitude.
        gap: f64,
        /// Location of the worst crossing.
        point: Vec<f64>,
        /// Quadratic remainder constant in use when the crossing occurred.
        m: f64,
    },

    /// The spherical sample set collapsed (duplicate or near-duplicate
    /// directions), so pair quotients are meaningless.
    #[error("degenerate spherical samples: {0}")]
    DegenerateSamples(String),

    /// An exhaustion field escaped its sub/supersolution envelope.
    #[error("sandwich violated at radius {radius}: {count} nodes out of envelope by up to {worst}")]
    SandwichViolated {
        /// Exhaustion ball radius of the offending field.
        radius: f64,
        /// Number of violating nodes.
        count: usize,
        /// Largest violation.
        worst: f64,
    },

    // ─── configuration and I/O ─────────────────────────────────────────────
    /// The run configuration is invalid; all violations are listed.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    SchemaError(Vec<String>),

    /// Underlying file-system failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed JSON input.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A saved field file does not follow the documented format.
    #[error("malformed field file: {0}")]
    BadFieldFile(String),
}
