//! Nonlinear peak-interpolation in the disk algebra with values constrained
//! to star-shaped bodies of C^n.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod numeric;
pub mod star_body;
pub mod disk_algebra;
pub mod conformal;
pub mod schedule;
pub mod engine;
pub mod covering;
pub mod cli;

pub use error::{Error, Result};
