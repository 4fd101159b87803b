//! Entire solutions with prescribed values at infinity.
//!
//! The construction runs in three stages.  Boundary data is a function
//! on the sphere of lightlike directions, sampled with its tangential
//! derivatives ([`boundary_f`]).  From the data and its
//! quadratic-remainder constant, translates of the normalized radial
//! solution are enveloped into a strictly convex subsolution and a
//! supersolution with the prescribed far field ([`barrier`]).  Dirichlet
//! problems on growing balls, with boundary values from the upper
//! envelope, then converge from above to the entire solution wedged
//! between the envelopes ([`exhaust`]).

pub mod barrier;
pub mod boundary_f;
pub mod exhaust;
pub mod sphere;

pub use barrier::{
    barrier_functions, ray_asymptotics, reference_log_coefficient, BarrierPair, PsiRef,
    RayCheck, ShiftEntry,
};
pub use boundary_f::{lipschitz_quadratic_m, quadratic_quotient_max, BoundaryValueF, SphereSample};
pub use exhaust::{
    ball_lattice, exhaustion_solve, uniqueness_probe, ExhaustOptions, ExhaustionResult,
    UniquenessReport,
};
pub use sphere::{fibonacci_sphere, ring_directions, tangent_basis};
