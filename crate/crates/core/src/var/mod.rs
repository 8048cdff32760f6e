//! Vector autoregressions `Y_t = c + A_1 Y_{t−1} + … + A_p Y_{t−p} + ε_t`
//! estimated equation by equation with least squares.

mod analysis;
mod fit;

pub use analysis::{granger_causality, impulse_response, GrangerResult, IrfResult};
pub use fit::{default_p_max, fit_var, fit_var_labeled, forecast_var, select_var_lag, VarFit};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VarError {
    #[error("need at least {need} observations for a VAR({p}) in {k} variables, got {n}")]
    TooShort { n: usize, need: usize, k: usize, p: usize },
    #[error("lag order must be at least 1")]
    ZeroLag,
    #[error("data has no columns")]
    NoVariables,
    #[error("column {0:?} has zero variance")]
    ConstantColumn(String),
    #[error("regressor matrix is rank deficient")]
    RankDeficient,
    #[error("data contains non-finite values")]
    NonFinite,
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("unknown variable {0:?}")]
    UnknownLabel(String),
    #[error("cause and effect are the same variable {0:?}")]
    SameVariable(String),
    #[error("F-test has non-positive denominator degrees of freedom ({0})")]
    DegenerateDf(i64),
    #[error("both restricted and unrestricted fits are exact; F statistic undefined")]
    PerfectFit,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("invalid fit: {0}")]
    Invalid(String),
}
