//! Train/test backtests of the price models and MAPE reports.

mod covariates;
mod report;
mod run;
mod split;

pub use covariates::CovariateSet;
pub use report::{column_mean, mape, parse_report, render_report, Cell, EvaluationReport, MeanCell, ModelFamily, ReportFormat, ReportRow};
pub use run::{run_evaluation, ArimaSettings, CellSummary, Evaluation, EvalSettings, ForecastTrace, VarSettings};
pub use split::{split_panel, SplitSpec};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("invalid split: {0}")]
    BadSplit(String),
    #[error("{part} part of the split is empty for {company}")]
    EmptyPart { company: String, part: &'static str },
    #[error("sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("MAPE needs at least one observation")]
    Empty,
    #[error("actual value is zero at position {0}")]
    ZeroActual(usize),
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("report row {row} has {got} cells, expected {expected}")]
    Shape { row: usize, expected: usize, got: usize },
    #[error("invalid MAPE {0}")]
    BadMape(f64),
    #[error("cannot parse report: {0}")]
    Parse(String),
    #[error("unknown model family {0:?}")]
    UnknownFamily(String),
    #[error("invalid covariate set {0:?}")]
    BadCovariateSet(String),
    #[error("no panels to evaluate")]
    NoPanels,
}
