//! Configuration-driven experiment runner: MI-grid sweeps with repeats,
//! CI/RMSE aggregation and CSV/JSON emission. Sweep cells share nothing and
//! may run on a worker pool; results are gathered by cell index so output
//! ordering is deterministic regardless of completion order.

mod emit;
mod runner;
mod spec;

pub use emit::{emit, read_json, rows_from_csv, rows_to_csv, EmitFormat, CSV_HEADER};
pub use runner::{aggregate, generate_cell_dataset, run_experiment, PointSummary, SweepResult, SweepRow};
pub use spec::{DatasetSpec, EstimatorSpec, ExperimentSpec, OutputSpec, SweepSpec};
