//! MI estimators: the two flow-based training loops (restricted and full
//! Gaussian base), the closed-form Gaussian/CCA estimator on raw moments,
//! the nearest-neighbor baseline, and diagnostics.

mod closed_form;
mod diagnostics;
mod ksg;
mod train;

pub use closed_form::{cca_tridiagonalize, estimate_gaussian_closed_form, AffineMap, CcaResult};
pub use diagnostics::kld_lower_bound;
pub use ksg::estimate_ksg;
pub use train::{
    fit_full_mienf, fit_tridiag_mienf, EstimationReport, TraceRow, TrainConfig,
};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Estimators the harness can dispatch by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    ClosedForm,
    Cca,
    TridiagMienf,
    FullMienf,
    Ksg,
}

impl EstimatorKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "closed_form" | "gaussian" => Ok(EstimatorKind::ClosedForm),
            "cca" => Ok(EstimatorKind::Cca),
            "tridiag_mienf" | "tridiag" => Ok(EstimatorKind::TridiagMienf),
            "full_mienf" | "full" => Ok(EstimatorKind::FullMienf),
            "ksg" => Ok(EstimatorKind::Ksg),
            other => Err(Error::UnsupportedFamily(format!("unknown estimator '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::ClosedForm => "closed_form",
            EstimatorKind::Cca => "cca",
            EstimatorKind::TridiagMienf => "tridiag_mienf",
            EstimatorKind::FullMienf => "full_mienf",
            EstimatorKind::Ksg => "ksg",
        }
    }

    /// Run the estimator. Training estimators take their seed/config from
    /// `cfg`; `ksg_k` only applies to the nearest-neighbor baseline.
    /// Returns the point estimate and, when available, a CI.
    pub fn estimate(
        &self,
        x: &Matrix,
        y: &Matrix,
        cfg: &TrainConfig,
        ksg_k: usize,
    ) -> Result<(f64, Option<(f64, f64)>)> {
        match self {
            EstimatorKind::ClosedForm => Ok((estimate_gaussian_closed_form(x, y)?, None)),
            EstimatorKind::Cca => Ok((cca_tridiagonalize(x, y)?.mi, None)),
            EstimatorKind::TridiagMienf => {
                let r = fit_tridiag_mienf(x, y, cfg)?;
                Ok((r.estimate, Some((r.ci_low, r.ci_high))))
            }
            EstimatorKind::FullMienf => {
                let r = fit_full_mienf(x, y, cfg)?;
                Ok((r.estimate, Some((r.ci_low, r.ci_high))))
            }
            EstimatorKind::Ksg => Ok((estimate_ksg(x, y, ksg_k)?, None)),
        }
    }
}
