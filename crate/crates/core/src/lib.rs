//! Fluctuation identities for random walks whose increments `B - A` come from
//! a dependent pair `(B, A)`: busy period, idle period, number of steps and
//! running maxima, computed by principal-value contour integrals along the
//! imaginary axis and, for kernels rational in the first argument, by exact
//! root products. Monte Carlo and series oracles cross-check both engines.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod contour;
pub mod error;
pub mod fluct;
pub mod model;
pub mod oracle;
pub mod poly;
pub mod roots;

pub use error::{FluctError, Result};
pub use num_complex::Complex64;
