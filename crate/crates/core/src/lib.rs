//! Statistics of sequential measurements, their finite-dimensional quantum
//! realization, and von Neumann entropy checks built on top of them.
//!
//! - [`stat_model`]: the abstract model `(Pi, x, x~)`, the J-equation and the
//!   modified-Shannon entropy chain.
//! - [`quantum`]: density operators, projector families, Lüders measurements,
//!   the two-point work protocol and measurement dilations.
//! - [`entropy`]: von Neumann and relative entropy, Klein's inequality,
//!   minimal pairs and Lüders entropy increase.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod extended;
pub mod linalg;
pub mod quantum;
pub mod stat_model;

pub use error::{Error, Result};
pub use extended::ExtendedReal;
