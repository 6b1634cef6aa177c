//! Self-contained numerical building blocks used by the rest of the crate.
//!
//! Everything here is pure and stateless.

mod bessel;
mod optimize;
mod poly;
mod quadrature;
mod summation;

pub use bessel::bessel_j1;
pub(crate) use bessel::jinc;
pub use optimize::{bisect_root, golden_section_max, scalar_maximize, Maximum};
pub use poly::{cubic_discriminant, solve_cubic, solve_quadratic, CubicRoots};
pub use quadrature::{integrate, QuadratureSpec};
pub use summation::{compensated_sum, NeumaierSum};
