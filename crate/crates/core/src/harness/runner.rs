use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::spec::ExperimentSpec;
use crate::numerics::stats::{mean, std_dev};
use crate::numerics::std_normal_quantile;
use crate::rng::derive_seed;
use crate::synthetic::{
    apply_mapping, gen_correlated_gaussian, gen_smoothed_uniform, gen_student, Allocation,
    LabeledDatasetPair,
};

/// One (grid point, repeat) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub true_mi: f64,
    pub repeat: usize,
    /// Point estimate; absent when the cell errored.
    pub estimate: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    /// Wall-clock seconds spent in the cell.
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-grid-point aggregates at the spec's confidence level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub true_mi: f64,
    pub count: usize,
    pub errors: usize,
    pub mean: f64,
    pub std: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub estimator: String,
    pub family: String,
    pub confidence: f64,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<PointSummary>,
    /// RMSE over every successful row of the sweep.
    pub overall_rmse: f64,
}

impl SweepResult {
    pub fn errored_cells(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Generate the dataset of one cell: family → samples → mapping.
pub fn generate_cell_dataset(
    spec: &ExperimentSpec,
    target_mi: f64,
    cell_seed: u64,
) -> Result<LabeledDatasetPair> {
    let d = &spec.dataset;
    let data_seed = derive_seed(cell_seed, 1);
    let map_seed = derive_seed(cell_seed, 2);
    let pair = match d.family.as_str() {
        "correlated_gaussian" => {
            gen_correlated_gaussian(d.dim_x, target_mi, &Allocation::Equal, d.samples, data_seed)?
        }
        "student" => gen_student(
            d.dim_x,
            d.dim_y.unwrap_or(d.dim_x),
            d.dof,
            target_mi,
            d.samples,
            data_seed,
        )?,
        "smoothed_uniform" => gen_smoothed_uniform(d.dim_x, target_mi, d.samples, data_seed)?,
        other => return Err(Error::UnsupportedFamily(other.to_string())),
    };
    apply_mapping(&pair, spec.mapping(), map_seed)
}

type CellOutcome = (f64, f64, Option<(f64, f64)>);

fn run_cell(spec: &ExperimentSpec, target_mi: f64, repeat: usize, cell_seed: u64) -> SweepRow {
    let started = Instant::now();
    let outcome = (|| -> Result<CellOutcome> {
        let pair = generate_cell_dataset(spec, target_mi, cell_seed)?;
        let cfg = spec.estimator.train_config(derive_seed(cell_seed, 3));
        let (estimate, ci) =
            spec.estimator_kind().estimate(&pair.x, &pair.y, &cfg, spec.estimator.ksg_k)?;
        Ok((pair.true_mi, estimate, ci))
    })();
    let seconds = started.elapsed().as_secs_f64();
    match outcome {
        Ok((true_mi, estimate, ci)) => SweepRow {
            true_mi,
            repeat,
            estimate: Some(estimate),
            ci_low: ci.map(|c| c.0),
            ci_high: ci.map(|c| c.1),
            seconds,
            error: None,
        },
        Err(e) => SweepRow {
            true_mi: target_mi,
            repeat,
            estimate: None,
            ci_low: None,
            ci_high: None,
            seconds,
            error: Some(e.to_string()),
        },
    }
}

/// Run the full sweep: for every grid point and repeat, generate → map →
/// estimate → record. Cells run on a worker pool of `jobs` threads and are
/// gathered by index, so the output ordering (and all content except the
/// seconds column) is deterministic given the base seed. A failing cell
/// records an error row; the sweep continues.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<SweepResult> {
    spec.validate()?;
    let grid = spec.grid();
    let repeats = spec.sweep.repeats;
    let cells: Vec<(usize, f64, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(gi, &mi)| (0..repeats).map(move |r| (gi, mi, r)))
        .collect();

    let rows: Vec<SweepRow> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::domain(format!("worker pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            cells
                .par_iter()
                .map(|&(gi, mi, r)| {
                    let cell_seed = spec.sweep.base_seed.wrapping_add((gi * repeats + r) as u64);
                    run_cell(spec, mi, r, cell_seed)
                })
                .collect()
        })
    } else {
        cells
            .iter()
            .map(|&(gi, mi, r)| {
                let cell_seed = spec.sweep.base_seed.wrapping_add((gi * repeats + r) as u64);
                run_cell(spec, mi, r, cell_seed)
            })
            .collect()
    };

    let summary = aggregate(&rows, spec.sweep.confidence)?;
    let ok_rows: Vec<&SweepRow> = rows.iter().filter(|r| r.estimate.is_some()).collect();
    let overall_rmse = if ok_rows.is_empty() {
        f64::NAN
    } else {
        (ok_rows
            .iter()
            .map(|r| (r.estimate.unwrap() - r.true_mi).powi(2))
            .sum::<f64>()
            / ok_rows.len() as f64)
            .sqrt()
    };
    Ok(SweepResult {
        estimator: spec.estimator.name.clone(),
        family: spec.dataset.family.clone(),
        confidence: spec.sweep.confidence,
        rows,
        summary,
        overall_rmse,
    })
}

/// Per-grid-point mean, unbiased std, normal CI (`z·std/√count`) and RMSE.
pub fn aggregate(rows: &[SweepRow], confidence: f64) -> Result<Vec<PointSummary>> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain("confidence level must be in (0,1)"));
    }
    let z = std_normal_quantile(0.5 + confidence / 2.0)?;
    let mut points: Vec<f64> = Vec::new();
    for r in rows {
        if !points.contains(&r.true_mi) {
            points.push(r.true_mi);
        }
    }
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let estimates: Vec<f64> = rows
            .iter()
            .filter(|r| r.true_mi == p)
            .filter_map(|r| r.estimate)
            .collect();
        let errors = rows.iter().filter(|r| r.true_mi == p && r.error.is_some()).count();
        let m = mean(&estimates);
        let s = std_dev(&estimates);
        let half = if estimates.is_empty() { 0.0 } else { z * s / (estimates.len() as f64).sqrt() };
        let rmse = if estimates.is_empty() {
            f64::NAN
        } else {
            (estimates.iter().map(|e| (e - p) * (e - p)).sum::<f64>() / estimates.len() as f64)
                .sqrt()
        };
        out.push(PointSummary {
            true_mi: p,
            count: estimates.len(),
            errors,
            mean: m,
            std: s,
            ci_low: m - half,
            ci_high: m + half,
            rmse,
        });
    }
    Ok(out)
}
