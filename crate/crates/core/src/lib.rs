//! Pseudospectral laboratory for two-dimensional compressible gas dynamics on
//! the torus `T^2 = (R / 2piZ)^2`.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral`]: grids, fields, Fourier derivatives, `Lambda^sigma`, `H^sigma` norms, dealiasing.
//! - [`euler`]: coefficient matrices of the gas system in `(rho, u, v, h)` variables,
//!   the pseudospectral right-hand side, divergence and wave speeds.
//! - [`families`]: closed-form exact and approximate solution families and their residue.
//! - [`solver`]: RK4 method-of-lines integration.
//! - [`inequalities`]: empirical checks of the commutator, reciprocal, algebra and
//!   interpolation estimates.
//! - [`lab`]: experiment drivers, log-log fits and CSV/JSON reports.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod euler;
pub mod families;
pub mod inequalities;
pub mod lab;
pub mod solver;
pub mod spectral;

pub use error::{LabError, Result};
