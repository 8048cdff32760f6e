use nalgebra::DMatrix;

use crate::linalg::{full_column_rank, least_squares};
use crate::optim::{nelder_mead, NelderMeadOptions};

use super::css::{CssProblem, Scratch};
use super::polynomial::{strictly_invertible, strictly_stationary};
use super::{difference, kalman, ArimaError, ArimaFit, ArimaOrder, ForecastState};

/// Extra observations required beyond `d + p + q`.
pub(crate) const MIN_EXTRA_OBS: usize = 10;

const INITIAL_STEP: f64 = 0.1;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitOptions {
    /// Estimate a mean for the differenced series. Defaults to `d == 0`.
    pub include_mean: Option<bool>,
    /// Leading observations the likelihood conditions on. Defaults to `d`;
    /// must be at least `d`. Equal values make likelihoods comparable
    /// across differencing orders.
    pub condition_on: Option<usize>,
    /// Differenced observations excluded from the CSS sum beyond the first
    /// `p`. Equal values make CSS objectives comparable across AR orders.
    pub css_burn_in: usize,
    pub optimizer: NelderMeadOptions,
}


pub fn fit_arima(series: &[f64], order: ArimaOrder, covariates: Option<&DMatrix<f64>>) -> Result<ArimaFit, ArimaError> {
    fit_arima_with(series, order, covariates, &FitOptions::default())
}

pub fn fit_arima_with(
    series: &[f64],
    order: ArimaOrder,
    covariates: Option<&DMatrix<f64>>,
    opts: &FitOptions,
) -> Result<ArimaFit, ArimaError> {
    let ArimaOrder { p, d, q } = order;
    let n = series.len();
    let need = d + p + q + MIN_EXTRA_OBS;
    if n < need {
        return Err(ArimaError::TooShort { len: n, need, order });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(ArimaError::NonFinite);
    }
    let covariates = covariates.filter(|x| x.ncols() > 0);
    if let Some(x) = covariates {
        if x.nrows() != n {
            return Err(ArimaError::CovariateRows { rows: x.nrows(), len: n });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ArimaError::NonFinite);
        }
    }
    let condition_on = opts.condition_on.unwrap_or(d);
    if condition_on < d || condition_on + p + q + 2 > n {
        return Err(ArimaError::Conditioning { condition_on, d, len: n });
    }
    let include_mean = opts.include_mean.unwrap_or(d == 0);

    let v = difference(series, d)?;
    let raw_cols: Vec<Vec<f64>> = covariates
        .map(|x| x.column_iter().map(|c| c.iter().copied().collect()).collect())
        .unwrap_or_default();
    let mut columns = Vec::with_capacity(raw_cols.len() + 1);
    if include_mean {
        columns.push(vec![1.0; v.len()]);
    }
    for c in &raw_cols {
        columns.push(difference(c, d)?);
    }
    if !columns.is_empty() {
        let design = DMatrix::from_fn(v.len(), columns.len(), |i, j| columns[j][i]);
        if !full_column_rank(&design) {
            return Err(ArimaError::SingularCovariates);
        }
    }

    let problem = CssProblem { y: &v, columns: &columns, p, burn_in: opts.css_burn_in };
    let start = hannan_rissanen(&v, &columns, p, q);
    let mut scratch = Scratch::default();
    let step = vec![INITIAL_STEP; p + q];
    let min = nelder_mead(|x| problem.objective(x, &mut scratch), &start, &step, &opts.optimizer);

    let css = problem.evaluate(&min.x, &mut scratch).ok_or(ArimaError::Likelihood(order))?;
    let (ar, ma) = min.x.split_at(p);

    let mut w = v.clone();
    for (col, b) in columns.iter().zip(&css.beta) {
        for (wi, ci) in w.iter_mut().zip(col) {
            *wi -= b * ci;
        }
    }
    let kf = kalman::filter(&w, ar, ma, condition_on - d).ok_or(ArimaError::Likelihood(order))?;
    let loglik = kf.loglik();
    let n_params = columns.len() + p + q + 1;
    let k = n_params as f64;

    let (intercept, beta) = if include_mean {
        (css.beta[0], css.beta[1..].to_vec())
    } else {
        (0.0, css.beta.clone())
    };
    let fit = ArimaFit {
        order,
        ar: ar.to_vec(),
        ma: ma.to_vec(),
        include_mean,
        intercept,
        beta,
        sigma2: kf.sigma2(),
        loglik,
        css_loglik: css.loglik(),
        aic: -2.0 * loglik + 2.0 * k,
        bic: -2.0 * loglik + k * (kf.n_terms as f64).ln(),
        n_obs: n,
        n_used: kf.n_terms,
        n_params,
        iterations: min.iterations,
        state: ForecastState {
            arma_state: kf.next_state,
            last_values: series[n - d..].to_vec(),
            last_covariates: raw_cols.iter().map(|c| c[n - d..].to_vec()).collect(),
        },
    };
    if !min.converged {
        return Err(ArimaError::NonConvergence { iterations: min.iterations, best: Box::new(fit) });
    }
    Ok(fit)
}

/// Starting values from two-stage regression: a long autoregression
/// supplies residual estimates, then the series is regressed on its own lags
/// and lagged residuals. Falls back towards zero when the estimate is
/// outside the admissible region.
fn hannan_rissanen(v: &[f64], columns: &[Vec<f64>], p: usize, q: usize) -> Vec<f64> {
    if p + q == 0 {
        return Vec::new();
    }
    let n = v.len();
    let u: Vec<f64> = if columns.is_empty() {
        v.to_vec()
    } else {
        let design = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
        match least_squares(&design, &DMatrix::from_column_slice(n, 1, v)) {
            Ok(ls) => ls.residuals.column(0).iter().copied().collect(),
            Err(_) => return vec![0.0; p + q],
        }
    };

    let long = ((10.0 * (n as f64).log10()) as usize).max(p + q + 1).min(n / 4);
    let estimate = if q == 0 {
        lag_regression(&u, &[], p, 0, p)
    } else {
        lag_regression(&u, &[], long, 0, long).and_then(|coef| {
            let mut e = vec![0.0; n];
            for t in long..n {
                e[t] = u[t] - (0..long).map(|i| coef[i] * u[t - i - 1]).sum::<f64>();
            }
            lag_regression(&u, &e, p, q, long + q.max(p))
        })
    };

    let mut params = match estimate {
        Some(c) if c.iter().all(|x| x.is_finite()) => c,
        _ => return vec![0.0; p + q],
    };
    for _ in 0..40 {
        if strictly_stationary(&params[..p]) && strictly_invertible(&params[p..]) {
            return params;
        }
        params.iter_mut().for_each(|x| *x *= 0.9);
    }
    vec![0.0; p + q]
}

/// OLS of `u_t` on `u_{t−1..p}` and `e_{t−1..q}` for `t ≥ first`.
fn lag_regression(u: &[f64], e: &[f64], p: usize, q: usize, first: usize) -> Option<Vec<f64>> {
    let n = u.len();
    if first >= n || n - first <= p + q + 1 {
        return None;
    }
    let rows = n - first;
    let x = DMatrix::from_fn(rows, p + q, |r, c| {
        let t = first + r;
        if c < p {
            u[t - c - 1]
        } else {
            e[t - (c - p) - 1]
        }
    });
    let y = DMatrix::from_fn(rows, 1, |r, _| u[first + r]);
    least_squares(&x, &y).ok().map(|ls| ls.coef.column(0).iter().copied().collect())
}
