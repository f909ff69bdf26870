use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mienf::error::Result;
use mienf::estimators::EstimatorKind;
use mienf::harness::{
    emit, generate_cell_dataset, run_experiment, EmitFormat, ExperimentSpec, SweepResult,
};
use mienf::rng::derive_seed;
use mienf::synthetic::{mc_pmi_oracle, LabeledDatasetPair, OracleFamily};

/// Mutual information estimation experiments: dataset generation, single
/// estimates, MI-grid sweeps and ground-truth oracle checks.
#[derive(Parser)]
#[command(name = "mienf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArg {
    /// Experiment spec (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Override the spec's base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one labeled dataset per grid point (CSV + JSON sidecar).
    Generate {
        #[command(flatten)]
        spec: SpecArg,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the spec's estimator on a stored dataset.
    Estimate {
        #[command(flatten)]
        spec: SpecArg,
        /// Dataset CSV written by `generate`.
        #[arg(long)]
        data: PathBuf,
        /// Write the report JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stream the training trace to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the full sweep: every grid point and repeat.
    Sweep {
        #[command(flatten)]
        spec: SpecArg,
        /// Output directory (defaults to the spec's `output.path`, else `.`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for independent cells.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// csv | json
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Check grid-point labels against the Monte-Carlo pointwise-MI oracle.
    Oracle {
        #[command(flatten)]
        spec: SpecArg,
        /// Monte-Carlo sample count.
        #[arg(long, default_value_t = 1_000_000)]
        mc: usize,
    },
}

fn load_spec(arg: &SpecArg) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::load(&arg.spec)?;
    if let Some(seed) = arg.seed {
        spec.sweep.base_seed = seed;
    }
    Ok(spec)
}

fn cmd_generate(arg: &SpecArg, out: &Path) -> Result<ExitCode> {
    let spec = load_spec(arg)?;
    std::fs::create_dir_all(out)?;
    for (gi, mi) in spec.grid().into_iter().enumerate() {
        let cell_seed = spec.sweep.base_seed.wrapping_add((gi * spec.sweep.repeats) as u64);
        let pair = generate_cell_dataset(&spec, mi, cell_seed)?;
        let path = out.join(format!("mi_{mi:.4}.csv"));
        pair.write_csv(&path)?;
        println!(
            "wrote {} ({} samples, true MI {:.6} nats)",
            path.display(),
            pair.samples(),
            pair.true_mi
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_estimate(
    arg: &SpecArg,
    data: &Path,
    out: &Option<PathBuf>,
    trace: &Option<PathBuf>,
) -> Result<ExitCode> {
    let spec = load_spec(arg)?;
    let pair = LabeledDatasetPair::read_csv(data)?;
    let cfg = spec.estimator.train_config(derive_seed(spec.sweep.base_seed, 3));
    let kind = spec.estimator_kind();
    let report_json = match kind {
        EstimatorKind::TridiagMienf | EstimatorKind::FullMienf => {
            let report = if kind == EstimatorKind::TridiagMienf {
                mienf::estimators::fit_tridiag_mienf(&pair.x, &pair.y, &cfg)?
            } else {
                mienf::estimators::fit_full_mienf(&pair.x, &pair.y, &cfg)?
            };
            if let Some(tp) = trace {
                std::fs::write(tp, report.trace_csv())?;
            }
            println!(
                "{}: estimate {:.6} nats (true {:.6}), CI [{:.6}, {:.6}]",
                kind.name(),
                report.estimate,
                pair.true_mi,
                report.ci_low,
                report.ci_high
            );
            serde_json::to_string_pretty(&report)
                .map_err(|e| mienf::Error::Serialization(e.to_string()))?
        }
        _ => {
            let (estimate, _) = kind.estimate(&pair.x, &pair.y, &cfg, spec.estimator.ksg_k)?;
            println!(
                "{}: estimate {:.6} nats (true {:.6})",
                kind.name(),
                estimate,
                pair.true_mi
            );
            format!("{{\n  \"estimate\": {estimate:.16e},\n  \"true_mi\": {:.16e}\n}}", pair.true_mi)
        }
    };
    if let Some(path) = out {
        std::fs::write(path, report_json)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn print_summary(result: &SweepResult) {
    println!(
        "{:>10} {:>4} {:>12} {:>12} {:>12} {:>12} {:>12} {:>5}",
        "true_mi", "n", "mean", "std", "ci_low", "ci_high", "rmse", "err"
    );
    for s in &result.summary {
        println!(
            "{:>10.4} {:>4} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>5}",
            s.true_mi, s.count, s.mean, s.std, s.ci_low, s.ci_high, s.rmse, s.errors
        );
    }
    println!("overall RMSE: {:.4}", result.overall_rmse);
}

fn cmd_sweep(arg: &SpecArg, out: &Option<PathBuf>, jobs: usize, format: &str) -> Result<ExitCode> {
    let spec = load_spec(arg)?;
    let format = EmitFormat::parse(format)?;
    let result = run_experiment(&spec, jobs.max(1))?;
    let dir = out
        .clone()
        .or_else(|| spec.output.path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let path = emit(&result, &dir, format)?;
    print_summary(&result);
    println!("wrote {}", path.display());
    if result.errored_cells() > 0 {
        eprintln!("{} cell(s) errored", result.errored_cells());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(arg: &SpecArg, mc: usize) -> Result<ExitCode> {
    let spec = load_spec(arg)?;
    let mut worst: f64 = 0.0;
    for (gi, mi) in spec.grid().into_iter().enumerate() {
        let cell_seed = spec.sweep.base_seed.wrapping_add((gi * spec.sweep.repeats) as u64);
        // cheap generation just to resolve the per-component parameters
        let mut probe_spec = spec.clone();
        probe_spec.dataset.samples = 2;
        let pair = generate_cell_dataset(&probe_spec, mi, cell_seed)?;
        let family = OracleFamily::from_params(&pair.params, pair.dim_x(), pair.dim_y())?;
        let (est, se) = mc_pmi_oracle(&family, mc, derive_seed(cell_seed, 0xa11ce))?;
        let dev = (est - pair.true_mi).abs() / se.max(1e-300);
        worst = worst.max(dev);
        println!(
            "true {:.6}  oracle {:.6} ± {:.6}  ({:.2} s.e. off)",
            pair.true_mi, est, se, dev
        );
    }
    if worst > 4.0 {
        eprintln!("oracle disagrees with labels beyond 4 standard errors");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<ExitCode> {
        match &cli.command {
            Command::Generate { spec, out } => cmd_generate(spec, out),
            Command::Estimate { spec, data, out, trace } => cmd_estimate(spec, data, out, trace),
            Command::Sweep { spec, out, jobs, format } => cmd_sweep(spec, out, *jobs, format),
            Command::Oracle { spec, mc } => cmd_oracle(spec, *mc),
        }
    };
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
