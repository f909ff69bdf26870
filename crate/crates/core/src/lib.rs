//! Mutual information estimation by Gaussianizing a pair of random vectors
//! with a Cartesian product of trainable normalizing flows, then reading MI
//! off closed-form Gaussian expressions.
//!
//! The crate bundles:
//! - [`numerics`]: dense linear algebra and special functions,
//! - [`nn`]: a small MLP with explicit reverse-mode gradients plus Adam,
//! - [`flows`]: coupling-based invertible transforms with tractable
//!   log-det Jacobians,
//! - [`base`]: the restricted tridiagonal Gaussian latent family and the
//!   full Gaussian family with EMA moments,
//! - [`estimators`]: the flow-based MI estimators, the closed-form
//!   Gaussian/CCA estimator, a nearest-neighbor baseline and diagnostics,
//! - [`synthetic`]: exact-label benchmark generators and a Monte-Carlo
//!   pointwise-MI oracle,
//! - [`harness`]: configuration-driven sweeps with CI/RMSE aggregation.

// indexed loops over matrix entries and pair structures are the house style
// here; `!(x > 0.0)`-shaped guards are deliberate (they catch NaN)
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base;
pub mod error;
pub mod estimators;
pub mod flows;
pub mod harness;
pub mod nn;
pub mod numerics;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
