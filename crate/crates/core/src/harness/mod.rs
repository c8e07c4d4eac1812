//! Evaluation harness: drive external generation backends over a dataset,
//! apply the evaluation protocol (prefix, left-truncation, first-task
//! truncation), score with all four metrics, and render reports.

mod backend;
mod evaluate;
mod generate;
mod report;

pub use backend::{
    left_truncate, Backend, BackendConfig, BackendError, BackendKind, ConfigError,
};
pub use evaluate::{aggregate, evaluate, score_sample, EvalContext, EvalError, Evaluation};
pub use generate::{generate_predictions, read_predictions, PredictionRecord};
pub use report::{render_report, EvalReport, ReportFormat, ReportRow, RunMeta};
