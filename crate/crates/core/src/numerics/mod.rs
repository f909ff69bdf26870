//! Dense linear algebra and special functions used by every other module.
//! Pure functions over owned data; nothing here holds shared mutable state.

mod cholesky;
mod eigen;
mod gauss;
mod matrix;
pub mod special;
pub mod stats;
mod svd;

pub use cholesky::{cholesky_logdet, cholesky_solve, ridge_regularized, solve_lower, solve_lower_transpose};
pub use eigen::{sym_eigen, SymmetricEigen};
pub use gauss::{std_normal_cdf, std_normal_pdf, std_normal_quantile};
pub use matrix::Matrix;
pub use special::{digamma, gamma_p, gamma_q, lambert_w0, log_gamma, EULER_GAMMA};
pub use svd::{svd, Svd};
