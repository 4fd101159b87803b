//! Shared one-dimensional numerical kernels.
//!
//! Everything here is deliberately plain: an embedded Dormand–Prince 5(4)
//! stepper for scalar initial value problems, Fornberg finite-difference
//! weights on arbitrarily spaced nodes, and local polynomial
//! interpolation / quadrature over sorted sample grids. The higher modules
//! compose these into the radial soliton engine and its cross-checks.

pub mod ivp;
pub mod stencil;
