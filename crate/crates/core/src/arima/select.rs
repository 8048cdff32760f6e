use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_arima_with, ArimaError, ArimaFit, ArimaOrder, FitOptions};

/// Scores within this distance are treated as tied.
const TIE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArimaGrid {
    pub max_p: usize,
    pub max_d: usize,
    pub max_q: usize,
}

impl Default for ArimaGrid {
    fn default() -> Self {
        Self { max_p: 5, max_d: 2, max_q: 5 }
    }
}

impl ArimaGrid {
    pub fn orders(&self) -> Vec<ArimaOrder> {
        let mut out = Vec::with_capacity((self.max_p + 1) * (self.max_d + 1) * (self.max_q + 1));
        for d in 0..=self.max_d {
            for p in 0..=self.max_p {
                for q in 0..=self.max_q {
                    out.push(ArimaOrder::new(p, d, q));
                }
            }
        }
        out
    }
}

impl std::str::FromStr for ArimaGrid {
    type Err = ArimaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| ArimaError::BadGrid(s.to_string()))?;
        match parts[..] {
            [max_p, max_d, max_q] => Ok(Self { max_p, max_d, max_q }),
            _ => Err(ArimaError::BadGrid(s.to_string())),
        }
    }
}

impl std::fmt::Display for ArimaGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.max_p, self.max_d, self.max_q)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Aic,
    Bic,
}

impl Criterion {
    pub fn score(self, fit: &ArimaFit) -> f64 {
        match self {
            Self::Aic => fit.aic,
            Self::Bic => fit.bic,
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Self::Aic),
            "bic" => Ok(Self::Bic),
            other => Err(format!("unknown criterion {other:?} (expected aic|bic)")),
        }
    }
}

/// Outcome of one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub order: ArimaOrder,
    pub result: Result<f64, ArimaError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub best: ArimaFit,
    pub candidates: Vec<Candidate>,
}

/// Exhaustive AIC search over `grid`.
pub fn auto_select(series: &[f64], covariates: Option<&DMatrix<f64>>, grid: &ArimaGrid) -> Result<ArimaFit, ArimaError> {
    auto_select_with(series, covariates, grid, Criterion::Aic, &FitOptions::default()).map(|s| s.best)
}

/// Fits every order in the grid and keeps the converged fit with the lowest
/// score. All candidates condition on the first `max_d` observations so
/// their likelihoods cover the same data. Ties go to fewer ARMA terms, then
/// less differencing, then fewer AR terms.
pub fn auto_select_with(
    series: &[f64],
    covariates: Option<&DMatrix<f64>>,
    grid: &ArimaGrid,
    criterion: Criterion,
    opts: &FitOptions,
) -> Result<Selection, ArimaError> {
    let orders = grid.orders();
    if orders.is_empty() {
        return Err(ArimaError::EmptyGrid);
    }
    let opts = FitOptions { condition_on: Some(opts.condition_on.unwrap_or(0).max(grid.max_d)), ..opts.clone() };
    let fits: Vec<(ArimaOrder, Result<ArimaFit, ArimaError>)> =
        orders.par_iter().map(|&o| (o, fit_arima_with(series, o, covariates, &opts))).collect();

    let best_score = fits
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok())
        .map(|f| criterion.score(f))
        .filter(|s| s.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !best_score.is_finite() {
        return Err(ArimaError::NoCandidate);
    }
    let rank = |o: &ArimaOrder| (o.p + o.q, o.d, o.p);
    let best = fits
        .iter()
        .filter_map(|(o, r)| r.as_ref().ok().map(|f| (o, f)))
        .filter(|(_, f)| criterion.score(f) <= best_score + TIE_TOL)
        .min_by_key(|(o, _)| rank(o))
        .map(|(_, f)| f.clone())
        .ok_or(ArimaError::NoCandidate)?;

    let candidates = fits
        .into_iter()
        .map(|(order, r)| Candidate { order, result: r.map(|f| criterion.score(&f)) })
        .collect();
    Ok(Selection { best, candidates })
}
