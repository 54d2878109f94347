//! Data ingestion, synthetic data, evaluation, run configuration and
//! reports.

pub mod config;
pub mod evaluate;
pub mod generate;
pub mod io;
pub mod report;

use crate::kb::Dataset;

pub use config::{Mode, RunConfig};
pub use evaluate::{evaluate, gold_labels, tool_accuracy, EvalError};
pub use generate::{generate, ClusterSize, GenError, GenSpec};
pub use io::{load_dataset, load_predictions, parse_dataset, write_dataset, IoError};
pub use report::RunReport;

/// Documents file of the bundled three-cluster, three-tool example.
pub const MOTIVATING_DOCS_CSV: &str = include_str!("../../fixtures/motivating_docs.csv");
/// Labels file of the bundled example.
pub const MOTIVATING_LABELS_CSV: &str = include_str!("../../fixtures/motivating_labels.csv");

/// The bundled example: nine documents in three clusters, labeled by
/// `tb`, `sw` and `v`, with gold labels.
pub fn motivating_example() -> Dataset {
    parse_dataset(MOTIVATING_DOCS_CSV, MOTIVATING_LABELS_CSV).expect("bundled fixture is valid")
}
