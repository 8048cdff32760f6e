use nalgebra::DMatrix;
use serde::Serialize;

use crate::ingest::MarketTime;

use super::difference::extend_integrated;
use super::{difference, kalman, ArimaError, ArimaFit};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForecastResult {
    pub horizon: usize,
    pub point: Vec<f64>,
    /// Last training instant, when the caller knows it.
    pub origin: Option<MarketTime>,
}

/// Multi-step point forecast from the end of the fitted sample.
/// `future_covariates` must have one row per step when the fit has
/// covariates.
pub fn forecast_arima(
    fit: &ArimaFit,
    horizon: usize,
    future_covariates: Option<&DMatrix<f64>>,
) -> Result<ForecastResult, ArimaError> {
    if horizon == 0 {
        return Err(ArimaError::ZeroHorizon);
    }
    let m = fit.beta.len();
    let d = fit.order.d;
    let future = future_covariates.filter(|x| x.ncols() > 0);
    let shape_error = |rows, cols| ArimaError::FutureCovariates { expected: m, rows, cols, horizon };
    let covariate_part = match future {
        None if m == 0 => vec![0.0; horizon],
        None => return Err(shape_error(0, 0)),
        Some(x) if x.nrows() != horizon || x.ncols() != m => return Err(shape_error(x.nrows(), x.ncols())),
        Some(x) => {
            if x.iter().any(|v| !v.is_finite()) {
                return Err(ArimaError::NonFinite);
            }
            let mut part = vec![0.0; horizon];
            for (j, b) in fit.beta.iter().enumerate() {
                let mut joined = fit.state.last_covariates[j].clone();
                joined.extend(x.column(j).iter());
                for (acc, v) in part.iter_mut().zip(difference(&joined, d)?) {
                    *acc += b * v;
                }
            }
            part
        }
    };

    let arma = kalman::forecast_states(&fit.ar, &fit.ma, &fit.state.arma_state, horizon);
    let mean = if fit.include_mean { fit.intercept } else { 0.0 };
    let increments: Vec<f64> = arma.iter().zip(&covariate_part).map(|(u, c)| mean + c + u).collect();

    let point = if d == 0 {
        increments
    } else {
        let mut history = fit.state.last_values.clone();
        extend_integrated(&mut history, &increments, d);
        history.split_off(d)
    };
    Ok(ForecastResult { horizon, point, origin: None })
}
