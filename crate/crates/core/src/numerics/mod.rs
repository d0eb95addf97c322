//! Numerical building blocks: fixed-order quadrature, bounded 1-D maximization
//! and finite-difference derivatives.

pub mod finite_diff;
pub mod optimize;
pub mod quadrature;

pub use optimize::{golden_section_max, grid_then_golden_max, Maximum};
pub use quadrature::{graded_breakpoints, log_sum_exp, GaussLegendre};
