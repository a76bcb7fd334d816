//! Cross-validated training runs, gradient checks and report emission.

mod config;
pub mod gradcheck;
mod report;
mod run;
pub mod sweep;

pub use config::{Canonical, ExperimentConfig};
pub use gradcheck::{run_gradcheck, ComponentCheck, GradcheckOptions, GradcheckReport, Scale};
pub use report::{emit_csv, emit_markdown, parse_csv, CsvRow, ExperimentReport, FoldResult, ReportFormat};
pub use run::{evaluate, prepare_dataset, run_experiment, run_on_examples, train_epoch};
pub use sweep::{sweep_loss, write_sweep_csv, SweepRow};
