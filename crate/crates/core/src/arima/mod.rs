//! ARIMA(p, d, q) models with optional regression on covariates.
//!
//! Estimation minimises the conditional sum of squares with a Nelder–Mead
//! simplex over the ARMA coefficients. The reported log-likelihood, AIC and
//! BIC come from the exact Gaussian likelihood evaluated by a Kalman filter
//! at the CSS estimates.

mod css;
mod difference;
mod fit;
mod forecast;
mod kalman;
mod polynomial;
mod select;

pub use difference::{difference, integrate};
pub use fit::{fit_arima, fit_arima_with, FitOptions};
pub use forecast::{forecast_arima, ForecastResult};
pub use polynomial::{is_invertible, is_stationary};
pub use select::{auto_select, auto_select_with, ArimaGrid, Candidate, Criterion, Selection};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub const fn new(p: usize, d: usize, q: usize) -> Self {
        Self { p, d, q }
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

/// What a fitted model needs to forecast past the end of its sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastState {
    /// Predicted ARMA state for the first out-of-sample step.
    pub arma_state: Vec<f64>,
    /// Last `d` observed levels.
    pub last_values: Vec<f64>,
    /// Last `d` rows of each covariate, column by column.
    pub last_covariates: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub order: ArimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    /// Whether a mean of the differenced series was estimated.
    pub include_mean: bool,
    pub intercept: f64,
    pub beta: Vec<f64>,
    pub sigma2: f64,
    /// Exact Gaussian log-likelihood.
    pub loglik: f64,
    /// Concentrated conditional log-likelihood at the optimum.
    pub css_loglik: f64,
    pub aic: f64,
    pub bic: f64,
    /// Length of the input series.
    pub n_obs: usize,
    /// Observations contributing to `loglik`.
    pub n_used: usize,
    /// Free parameters counted by the information criteria, σ² included.
    pub n_params: usize,
    pub iterations: usize,
    pub state: ForecastState,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArimaError {
    #[error("series of length {len} is too short for ARIMA{order} (need at least {need})")]
    TooShort { len: usize, need: usize, order: ArimaOrder },
    #[error("cannot difference {len} values {d} times")]
    DifferenceTooLarge { len: usize, d: usize },
    #[error("expected {expected} initial values, got {got}")]
    InitialValues { expected: usize, got: usize },
    #[error("covariates have {rows} rows but the series has {len}")]
    CovariateRows { rows: usize, len: usize },
    #[error("regression design is singular")]
    SingularCovariates,
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("conditioning on {condition_on} observations is invalid for d = {d} and length {len}")]
    Conditioning { condition_on: usize, d: usize, len: usize },
    #[error("optimizer did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize, best: Box<ArimaFit> },
    #[error("likelihood evaluation failed for ARIMA{0}")]
    Likelihood(ArimaOrder),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("model has {expected} covariates; future covariates are {rows}×{cols}, need {horizon}×{expected}")]
    FutureCovariates { expected: usize, rows: usize, cols: usize, horizon: usize },
    #[error("grid is empty")]
    EmptyGrid,
    #[error("no grid point produced a converged fit")]
    NoCandidate,
    #[error("invalid grid {0:?} (expected p,d,q)")]
    BadGrid(String),
}
