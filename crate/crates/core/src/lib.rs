//! Link budget and optimal horizontal placement of a reconfigurable intelligent
//! surface (RIS) that bridges a blocked, highly directional mmWave link.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: Bessel J1, adaptive quadrature, cubic/quadratic roots,
//!   a grid + golden-section maximizer and compensated summation.
//! - [`antenna`]: parabolic dish patterns, beamwidths, main-lobe energy
//!   fractions, the RU element gain and thermal noise.
//! - [`geometry`]: link distances and angles, the elliptic beam footprint on
//!   the RIS plane and enumeration of the illuminated reflection units.
//! - [`linkbudget`]: received power (exact co-phased sum and the two
//!   closed forms) and SNR.
//! - [`placement`]: analytic and numeric SNR-maximizing RIS placement.
//! - [`cli`]: scenario configuration, sweeps, optimization reports and the
//!   built-in anchor validation used by the `risplace` binary.

// `!(a < b)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod linkbudget;
pub mod numerics;
pub mod placement;
pub mod units;

pub use error::{Error, Result};
