use serde::{Deserialize, Serialize};

use crate::base::{FullGaussianBase, LatentDensity, TridiagGaussianBase, UpdateMode};
use crate::error::{Error, Result};
use crate::estimators::diagnostics::kld_lower_bound;
use crate::flows::{FlowArch, ProductFlow};
use crate::nn::AdamState;
use crate::numerics::stats::{mean, std_dev};
use crate::numerics::{cholesky_logdet, ridge_regularized, std_normal_quantile, Matrix};
use crate::rng::rng_from_seed;
use rand::seq::SliceRandom;

/// Confidence level of the report interval (two-sided).
const CI_LEVEL: f64 = 0.999;

/// Knobs of one estimator fit. Defaults follow the stock recipe: batches of
/// 512 for 300 epochs, flow learning rate on a cosine ramp from 5e-4 down to
/// 1e-5, and the point estimate averaged over the last 50 epochs.
///
/// The base w-parameters get their own (larger) cosine schedule: each w is
/// the log of a per-component MI, so reaching a high-MI optimum needs far
/// longer steps than conditioner weights; Adam's per-step movement is capped
/// near the learning rate, and the flow schedule would not cover the
/// distance within the epoch budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_init: f64,
    pub lr_final: f64,
    pub base_lr_init: f64,
    pub base_lr_final: f64,
    pub ema_gamma: f64,
    pub seed: u64,
    /// Point estimate = mean of the per-epoch estimates over this many
    /// final epochs.
    pub avg_epochs: usize,
    /// Keep every k-th epoch in the trace.
    pub trace_stride: usize,
    /// Fraction of samples held out of training; the final log-likelihood
    /// and KLD diagnostics are then computed on the held-out part as an
    /// overfitting check. Zero (the default) trains and evaluates in-sample.
    pub holdout_fraction: f64,
    pub flow: FlowArch,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            batch_size: 512,
            lr_init: 5e-4,
            lr_final: 1e-5,
            base_lr_init: 5e-2,
            base_lr_final: 1e-3,
            ema_gamma: 0.1,
            seed: 0,
            avg_epochs: 50,
            trace_stride: 1,
            holdout_fraction: 0.0,
            flow: FlowArch::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::domain("epochs and batch size must be positive"));
        }
        if !(self.lr_final > 0.0 && self.lr_final <= self.lr_init) {
            return Err(Error::domain("need 0 < lr_final <= lr_init"));
        }
        if !(self.base_lr_final > 0.0 && self.base_lr_final <= self.base_lr_init) {
            return Err(Error::domain("need 0 < base_lr_final <= base_lr_init"));
        }
        if !(self.ema_gamma > 0.0 && self.ema_gamma <= 1.0) {
            return Err(Error::domain("EMA gamma must be in (0, 1]"));
        }
        if self.avg_epochs == 0 || self.trace_stride == 0 {
            return Err(Error::domain("avg_epochs and trace_stride must be positive"));
        }
        if !(0.0..0.9).contains(&self.holdout_fraction) {
            return Err(Error::domain("holdout fraction must be in [0, 0.9)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub loglik: f64,
    pub estimate: f64,
}

/// Outcome of one fit: the point estimate with its epochwise-averaging CI,
/// the per-epoch trace, and the final diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    /// Point estimate in nats (≥ 0).
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Number of final epochs averaged into the point estimate.
    pub avg_epochs: usize,
    pub trace: Vec<TraceRow>,
    /// Mean joint log-likelihood (base + log-det) over the data at the
    /// final parameters.
    pub final_loglik: f64,
    /// Entropy–cross-entropy lower bound on the latent KLD (≥ 0; zero for a
    /// moment-matched Gaussian base).
    pub kld_lower_bound: f64,
}

impl EstimationReport {
    /// Trace as CSV rows `epoch,loglik,estimate`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("epoch,loglik,estimate\n");
        for row in &self.trace {
            out.push_str(&format!(
                "{},{:.16e},{:.16e}\n",
                row.epoch, row.loglik, row.estimate
            ));
        }
        out
    }
}

enum BaseKind {
    Tridiag { base: TridiagGaussianBase, adam: AdamState },
    Full { base: FullGaussianBase },
}

/// Train flows against the restricted tridiagonal Gaussian base; the point
/// estimate is the epochwise-averaged `Σ_j e^{ŵ_j}`.
pub fn fit_tridiag_mienf(x: &Matrix, y: &Matrix, cfg: &TrainConfig) -> Result<EstimationReport> {
    let pairs = x.cols().min(y.cols());
    let kind = BaseKind::Tridiag {
        base: TridiagGaussianBase::new(x.cols(), y.cols()),
        adam: AdamState::new(pairs),
    };
    fit_mienf(x, y, cfg, kind)
}

/// Train flows against the unrestricted Gaussian base with EMA moments; the
/// per-epoch estimate evaluates the closed-form expression on that epoch's
/// latent moments.
pub fn fit_full_mienf(x: &Matrix, y: &Matrix, cfg: &TrainConfig) -> Result<EstimationReport> {
    let kind = BaseKind::Full { base: FullGaussianBase::new(x.cols() + y.cols(), cfg.ema_gamma) };
    fit_mienf(x, y, cfg, kind)
}

fn cosine_lr(init: f64, fin: f64, step: usize, total: usize) -> f64 {
    let t = if total <= 1 { 0.0 } else { step as f64 / (total - 1) as f64 };
    fin + 0.5 * (init - fin) * (1.0 + (std::f64::consts::PI * t).cos())
}

fn fit_mienf(
    x: &Matrix,
    y: &Matrix,
    cfg: &TrainConfig,
    mut kind: BaseKind,
) -> Result<EstimationReport> {
    cfg.validate()?;
    if x.rows() != y.rows() {
        return Err(Error::shape("paired samples must have equal counts".to_string()));
    }
    let n = x.rows();
    let (dx, dy) = (x.cols(), y.cols());
    let need = 10 * (dx + dy);
    if n < need {
        return Err(Error::InsufficientSamples { got: n, need });
    }

    let mut rng = rng_from_seed(cfg.seed);

    // optional held-out split for the overfitting diagnostics; training and
    // the point estimate stay on the training part
    let mut all_idx: Vec<usize> = (0..n).collect();
    let holdout = (n as f64 * cfg.holdout_fraction) as usize;
    if holdout > 0 {
        all_idx.shuffle(&mut rng);
    }
    let (eval_idx, train_idx) = all_idx.split_at(holdout);
    let eval_idx: Vec<usize> = if holdout > 0 { eval_idx.to_vec() } else { all_idx.clone() };
    let mut idx: Vec<usize> = train_idx.to_vec();
    let n_train = idx.len();
    if n_train < need {
        return Err(Error::InsufficientSamples { got: n_train, need });
    }
    let train_x = x.take_rows(&idx);
    let train_y = y.take_rows(&idx);

    let mut flow = ProductFlow::gaussianizer(&train_x, &train_y, &cfg.flow, &mut rng);
    let mut flow_params = flow.params_flat();
    let mut adam_flow = AdamState::new(flow_params.len());

    let batch = cfg.batch_size.min(n_train);
    let steps_per_epoch = n_train.div_ceil(batch);
    let total_steps = cfg.epochs * steps_per_epoch;
    idx = (0..n_train).collect();
    let mut step = 0usize;

    let mut epoch_estimates = Vec::with_capacity(cfg.epochs);
    let mut trace = Vec::new();

    for epoch in 0..cfg.epochs {
        idx.shuffle(&mut rng);
        let mut epoch_ll = 0.0;
        let mut moments = MomentAccumulator::new(dx + dy);
        for chunk in idx.chunks(batch) {
            let bx = train_x.take_rows(chunk);
            let by = train_y.take_rows(chunk);
            let (z, logdet, tape) = flow.forward(&bx, &by)?;
            let b = chunk.len() as f64;
            let upstream = vec![1.0 / b; chunk.len()];

            let (ll_total, dz) = match &mut kind {
                BaseKind::Tridiag { base, adam } => {
                    let (ll_total, _) = base.loglik(&z)?;
                    let (grad_w, dz) = base.loglik_grad(&z, &upstream)?;
                    let w_lr =
                        cosine_lr(cfg.base_lr_init, cfg.base_lr_final, step, total_steps);
                    let neg: Vec<f64> = grad_w.iter().map(|g| -g).collect();
                    adam.step(base.w_mut(), &neg, w_lr)?;
                    base.clamp_w();
                    (ll_total, dz)
                }
                BaseKind::Full { base } => {
                    base.update(&z, UpdateMode::Ema);
                    let (ll_total, _) = base.loglik(&z)?;
                    let dz = base.loglik_grad(&z, &upstream)?;
                    (ll_total, dz)
                }
            };

            let ld_sum: f64 = logdet.iter().sum();
            let objective = (ll_total + ld_sum) / b;
            if !objective.is_finite() {
                return Err(Error::NonFinite("training objective".into()));
            }
            epoch_ll += ll_total + ld_sum;

            let d_logdet = vec![1.0 / b; chunk.len()];
            let flow_grads = flow.backward(&tape, &dz, &d_logdet)?;
            let neg: Vec<f64> = flow_grads.iter().map(|g| -g).collect();
            let lr = cosine_lr(cfg.lr_init, cfg.lr_final, step, total_steps);
            adam_flow.step(&mut flow_params, &neg, lr)?;
            flow.set_params_flat(&flow_params);

            if matches!(kind, BaseKind::Full { .. }) {
                moments.push(&z);
            }
            step += 1;
        }

        let estimate = match &kind {
            BaseKind::Tridiag { base, .. } => base.mi(),
            BaseKind::Full { .. } => moments.gaussian_mi(dx)?,
        };
        epoch_estimates.push(estimate);
        if epoch % cfg.trace_stride == 0 || epoch + 1 == cfg.epochs {
            trace.push(TraceRow { epoch, loglik: epoch_ll / n_train as f64, estimate });
        }
    }

    // point estimate and CI from the last-K epoch trace
    let k = cfg.avg_epochs.min(epoch_estimates.len());
    let window = &epoch_estimates[epoch_estimates.len() - k..];
    let mean_est = mean(window);
    let half = if k > 1 {
        std_normal_quantile(0.5 + CI_LEVEL / 2.0)? * std_dev(window) / (k as f64).sqrt()
    } else {
        0.0
    };

    // final diagnostics pass: in-sample by default, held-out when configured
    let mut z_all = Matrix::zeros(eval_idx.len(), dx + dy);
    let mut final_ll = 0.0;
    for (offset, chunk) in eval_idx.chunks(batch).enumerate() {
        let bx = x.take_rows(chunk);
        let by = y.take_rows(chunk);
        let (z, logdet, _) = flow.forward(&bx, &by)?;
        let base_ll = match &kind {
            BaseKind::Tridiag { base, .. } => base.loglik(&z)?.0,
            BaseKind::Full { base } => base.loglik(&z)?.0,
        };
        final_ll += base_ll + logdet.iter().sum::<f64>();
        for r in 0..z.rows() {
            z_all.row_mut(offset * batch + r).copy_from_slice(z.row(r));
        }
    }
    let kld = match &kind {
        BaseKind::Tridiag { base, .. } => kld_lower_bound(&z_all, base as &dyn LatentDensity)?,
        BaseKind::Full { base } => kld_lower_bound(&z_all, base as &dyn LatentDensity)?,
    };

    Ok(EstimationReport {
        estimate: mean_est.max(0.0),
        ci_low: (mean_est - half).max(0.0),
        ci_high: mean_est + half,
        avg_epochs: k,
        trace,
        final_loglik: final_ll / eval_idx.len() as f64,
        kld_lower_bound: kld,
    })
}

/// Streaming latent moments over one epoch, for the closed-form readout of
/// the full-Gaussian fit.
struct MomentAccumulator {
    dim: usize,
    count: usize,
    sum: Vec<f64>,
    sum_outer: Matrix,
}

impl MomentAccumulator {
    fn new(dim: usize) -> Self {
        MomentAccumulator { dim, count: 0, sum: vec![0.0; dim], sum_outer: Matrix::zeros(dim, dim) }
    }

    fn push(&mut self, z: &Matrix) {
        self.count += z.rows();
        for i in 0..z.rows() {
            let row = z.row(i);
            for (s, &v) in self.sum.iter_mut().zip(row.iter()) {
                *s += v;
            }
        }
        let outer = z.matmul_tn(z);
        for (acc, &v) in self.sum_outer.data_mut().iter_mut().zip(outer.data().iter()) {
            *acc += v;
        }
    }

    /// `½[logdet Σ̂_xx + logdet Σ̂_yy − logdet Σ̂]` of the accumulated moments.
    fn gaussian_mi(&self, dx: usize) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::domain("no latent moments accumulated"));
        }
        let n = self.count as f64;
        let mut cov = self.sum_outer.scaled(1.0 / n);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = cov.get(i, j) - self.sum[i] * self.sum[j] / (n * n);
                cov.set(i, j, v);
            }
        }
        let logdet = |s: &Matrix| -> Result<f64> {
            Ok(cholesky_logdet(&ridge_regularized(s))?.1)
        };
        let mut sxx = Matrix::zeros(dx, dx);
        let mut syy = Matrix::zeros(self.dim - dx, self.dim - dx);
        for i in 0..dx {
            for j in 0..dx {
                sxx.set(i, j, cov.get(i, j));
            }
        }
        for i in dx..self.dim {
            for j in dx..self.dim {
                syy.set(i - dx, j - dx, cov.get(i, j));
            }
        }
        let mi = 0.5 * (logdet(&sxx)? + logdet(&syy)? - logdet(&cov)?);
        Ok(mi.max(0.0))
    }
}
