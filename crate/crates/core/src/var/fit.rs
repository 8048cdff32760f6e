use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::least_squares;

use super::VarError;

/// A fitted VAR(p).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "VarFitJson", try_from = "VarFitJson")]
pub struct VarFit {
    pub k: usize,
    pub p: usize,
    pub labels: Vec<String>,
    pub c: DVector<f64>,
    /// `a[i]` multiplies `Y_{t−i−1}`.
    pub a: Vec<DMatrix<f64>>,
    /// Maximum-likelihood residual covariance `UᵀU / N`.
    pub sigma: DMatrix<f64>,
    pub loglik: f64,
    pub aic: f64,
    /// Equations' effective sample size N.
    pub n_obs: usize,
    /// Last `p` observations, oldest first, for forecasting.
    pub last_obs: DMatrix<f64>,
}

impl VarFit {
    /// Mean parameters counted by AIC: `k + p·k²`.
    pub fn n_params(&self) -> usize {
        self.k + self.p * self.k * self.k
    }

    /// Residuals of this fit on `data`, rows `p..n`.
    pub fn residuals(&self, data: &DMatrix<f64>) -> DMatrix<f64> {
        let n = data.nrows();
        DMatrix::from_fn(n.saturating_sub(self.p), self.k, |r, j| {
            let t = r + self.p;
            let mut pred = self.c[j];
            for (i, a) in self.a.iter().enumerate() {
                for s in 0..self.k {
                    pred += a[(j, s)] * data[(t - i - 1, s)];
                }
            }
            data[(t, j)] - pred
        })
    }

    /// Block companion matrix of the lag polynomial.
    pub fn companion(&self) -> DMatrix<f64> {
        let (k, p) = (self.k, self.p);
        let mut m = DMatrix::zeros(k * p, k * p);
        for (i, a) in self.a.iter().enumerate() {
            m.view_mut((0, i * k), (k, k)).copy_from(a);
        }
        for i in 1..p {
            m.view_mut((i * k, (i - 1) * k), (k, k)).fill_with_identity();
        }
        m
    }

    /// Spectral radius of the companion matrix; below one means stable.
    pub fn spectral_radius(&self) -> f64 {
        self.companion().complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `min(10, ⌊n/(3k)⌋)`, at least 1.
pub fn default_p_max(n: usize, k: usize) -> usize {
    (n / (3 * k.max(1))).clamp(1, 10)
}

pub fn fit_var(data: &DMatrix<f64>, p: usize) -> Result<VarFit, VarError> {
    let labels = (1..=data.ncols()).map(|i| format!("y{i}")).collect();
    fit_var_labeled(data, labels, p)
}

pub fn fit_var_labeled(data: &DMatrix<f64>, labels: Vec<String>, p: usize) -> Result<VarFit, VarError> {
    validate(data, &labels, p)?;
    fit_on_sample(data, labels, p, p)
}

/// Fits p = 1..=p_max on the common sample `p_max..n` and keeps the lowest
/// AIC, preferring the smaller order on ties.
pub fn select_var_lag(data: &DMatrix<f64>, labels: Vec<String>, p_max: usize) -> Result<(usize, VarFit), VarError> {
    validate(data, &labels, p_max)?;
    let mut best: Option<VarFit> = None;
    for p in 1..=p_max {
        let fit = fit_on_sample(data, labels.clone(), p, p_max)?;
        if best.as_ref().is_none_or(|b| fit.aic < b.aic) {
            best = Some(fit);
        }
    }
    let best = best.expect("p_max ≥ 1 checked by validate");
    Ok((best.p, best))
}

/// Recursive forecasts with zero shocks, one row per step.
pub fn forecast_var(fit: &VarFit, horizon: usize) -> Result<DMatrix<f64>, VarError> {
    if horizon == 0 {
        return Err(VarError::ZeroHorizon);
    }
    let (k, p) = (fit.k, fit.p);
    let mut history: Vec<DVector<f64>> = (0..p).map(|r| fit.last_obs.row(r).transpose()).collect();
    let mut out = DMatrix::zeros(horizon, k);
    for h in 0..horizon {
        let mut next = fit.c.clone();
        for (i, a) in fit.a.iter().enumerate() {
            next += a * &history[history.len() - 1 - i];
        }
        out.row_mut(h).copy_from(&next.transpose());
        history.push(next);
    }
    Ok(out)
}

pub(crate) fn validate(data: &DMatrix<f64>, labels: &[String], p: usize) -> Result<(), VarError> {
    let (n, k) = data.shape();
    if p == 0 {
        return Err(VarError::ZeroLag);
    }
    if k == 0 {
        return Err(VarError::NoVariables);
    }
    if labels.len() != k {
        return Err(VarError::LabelCount { expected: k, got: labels.len() });
    }
    let need = k * p + 10;
    if n < need {
        return Err(VarError::TooShort { n, need, k, p });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(VarError::NonFinite);
    }
    for (j, col) in data.column_iter().enumerate() {
        let first = col[0];
        if col.iter().all(|v| *v == first) {
            return Err(VarError::ConstantColumn(labels[j].clone()));
        }
    }
    Ok(())
}

/// Intercept column followed by lags 1..=p of every variable, for rows
/// `start..n`.
pub(crate) fn lagged_design(data: &DMatrix<f64>, p: usize, start: usize) -> DMatrix<f64> {
    let (n, k) = data.shape();
    DMatrix::from_fn(n - start, 1 + k * p, |r, c| {
        if c == 0 {
            1.0
        } else {
            let lag = (c - 1) / k + 1;
            let var = (c - 1) % k;
            data[(start + r - lag, var)]
        }
    })
}

fn fit_on_sample(data: &DMatrix<f64>, labels: Vec<String>, p: usize, start: usize) -> Result<VarFit, VarError> {
    let (n, k) = data.shape();
    let x = lagged_design(data, p, start);
    let y = data.rows(start, n - start).into_owned();
    let ls = least_squares(&x, &y).map_err(|_| VarError::RankDeficient)?;
    let big_n = n - start;

    let c = ls.coef.row(0).transpose();
    let a = (0..p)
        .map(|i| DMatrix::from_fn(k, k, |r, s| ls.coef[(1 + i * k + s, r)]))
        .collect::<Vec<_>>();
    let u = &ls.residuals;
    let sigma = (u.transpose() * u) / big_n as f64;
    let sigma = (&sigma + sigma.transpose()) * 0.5;

    let det = sigma.determinant();
    let nf = big_n as f64;
    let loglik = if det > 0.0 {
        -(nf * k as f64 / 2.0) * (1.0 + (2.0 * std::f64::consts::PI).ln()) - nf / 2.0 * det.ln()
    } else {
        f64::INFINITY
    };
    let n_params = k + p * k * k;
    Ok(VarFit {
        k,
        p,
        labels,
        c,
        a,
        sigma,
        loglik,
        aic: -2.0 * loglik + 2.0 * n_params as f64,
        n_obs: big_n,
        last_obs: data.rows(n - p, p).into_owned(),
    })
}

/// On-disk layout: matrices as row-major nested arrays.
#[derive(Serialize, Deserialize)]
struct VarFitJson {
    k: usize,
    p: usize,
    labels: Vec<String>,
    c: Vec<f64>,
    a: Vec<Vec<Vec<f64>>>,
    sigma: Vec<Vec<f64>>,
    loglik: f64,
    aic: f64,
    n_obs: usize,
    last_observations: Vec<Vec<f64>>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize, what: &str) -> Result<DMatrix<f64>, VarError> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(VarError::Invalid(format!("{what} must be {nrows}×{ncols}")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl From<VarFit> for VarFitJson {
    fn from(f: VarFit) -> Self {
        Self {
            k: f.k,
            p: f.p,
            labels: f.labels,
            c: f.c.iter().copied().collect(),
            a: f.a.iter().map(rows_of).collect(),
            sigma: rows_of(&f.sigma),
            loglik: f.loglik,
            aic: f.aic,
            n_obs: f.n_obs,
            last_observations: rows_of(&f.last_obs),
        }
    }
}

impl TryFrom<VarFitJson> for VarFit {
    type Error = VarError;
    fn try_from(j: VarFitJson) -> Result<Self, Self::Error> {
        let k = j.k;
        if j.labels.len() != k || j.c.len() != k || j.a.len() != j.p {
            return Err(VarError::Invalid("dimensions disagree with k and p".into()));
        }
        let a = j.a.iter().map(|m| from_rows(m, k, k, "A")).collect::<Result<Vec<_>, _>>()?;
        Ok(VarFit {
            k,
            p: j.p,
            labels: j.labels,
            c: DVector::from_vec(j.c),
            a,
            sigma: from_rows(&j.sigma, k, k, "sigma")?,
            loglik: j.loglik,
            aic: j.aic,
            n_obs: j.n_obs,
            last_obs: from_rows(&j.last_observations, j.p, k, "last_observations")?,
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    pub(crate) fn simulate(seed: u64, n: usize, c: &[f64], a: &[DMatrix<f64>]) -> DMatrix<f64> {
        let k = c.len();
        let burn = 200;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<DVector<f64>> = vec![DVector::zeros(k); a.len()];
        for _ in 0..n + burn {
            let mut next = DVector::from_column_slice(c);
            for (i, ai) in a.iter().enumerate() {
                next += ai * &rows[rows.len() - 1 - i];
            }
            for v in next.iter_mut() {
                let e: f64 = StandardNormal.sample(&mut rng);
                *v += e;
            }
            rows.push(next);
        }
        let tail = &rows[rows.len() - n..];
        DMatrix::from_fn(n, k, |t, j| tail[t][j])
    }

    fn a1() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.3])
    }

    #[test]
    fn recovers_var1() {
        let data = simulate(1, 2000, &[0.0, 0.0], &[a1()]);
        let fit = fit_var(&data, 1).unwrap();
        assert!((&fit.a[0] - a1()).abs().max() <= 0.1);
        assert_eq!(fit.n_obs, 1999);
        assert_eq!(fit.aic, -2.0 * fit.loglik + 2.0 * 6.0);
    }

    #[test]
    fn noiseless_recursion_exact() {
        // Lightly damped rotation keeps the trajectory informative.
        let (r, th) = (0.98f64, 0.3f64);
        let a = DMatrix::from_row_slice(2, 2, &[r * th.cos(), -r * th.sin(), r * th.sin(), r * th.cos()]);
        let c = DVector::from_column_slice(&[0.5, -0.2]);
        let mut rows = vec![DVector::from_column_slice(&[3.0, 1.0])];
        for _ in 1..200 {
            let next = &c + &a * rows.last().unwrap();
            rows.push(next);
        }
        let data = DMatrix::from_fn(200, 2, |t, j| rows[t][j]);
        let fit = fit_var(&data, 1).unwrap();
        assert!((&fit.a[0] - &a).abs().max() < 1e-8);
        assert!((&fit.c - &c).abs().max() < 1e-8);
        assert!(fit.residuals(&data).abs().max() < 1e-8);
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let data = simulate(2, 500, &[1.0, -1.0], &[a1()]);
        let fit = fit_var(&data, 2).unwrap();
        let x = lagged_design(&data, 2, 2);
        let u = fit.residuals(&data);
        let inner = x.transpose() * u;
        assert!(inner.abs().max() < 1e-8 * 500.0);
    }

    #[test]
    fn k1_matches_ar_ols() {
        let data = simulate(3, 400, &[0.5], &[DMatrix::from_element(1, 1, 0.6)]);
        let fit = fit_var(&data, 1).unwrap();
        // Oracle: simple-regression slope of y_t on y_{t−1}.
        let y: Vec<f64> = data.column(0).iter().copied().collect();
        let (xs, ys) = (&y[..y.len() - 1], &y[1..]);
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx).powi(2)).sum();
        assert_abs_diff_eq!(fit.a[0][(0, 0)], sxy / sxx, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.c[0], my - sxy / sxx * mx, epsilon = 1e-10);
    }

    #[test]
    fn k1_agrees_with_arima_css() {
        let data = simulate(4, 1000, &[0.2], &[DMatrix::from_element(1, 1, 0.7)]);
        let y: Vec<f64> = data.column(0).iter().copied().collect();
        let var = fit_var(&data, 1).unwrap();
        let ar = crate::arima::fit_arima(&y, crate::arima::ArimaOrder::new(1, 0, 0), None).unwrap();
        assert!((var.a[0][(0, 0)] - ar.ar[0]).abs() < 1e-3);
    }

    #[test]
    fn forecast_one_step_is_the_equation() {
        let data = simulate(5, 300, &[0.3, 0.1], &[a1(), DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.05, 0.1])]);
        let fit = fit_var(&data, 2).unwrap();
        let f = forecast_var(&fit, 1).unwrap();
        let expected = &fit.c + &fit.a[0] * data.row(299).transpose() + &fit.a[1] * data.row(298).transpose();
        assert_eq!(f.row(0).transpose(), expected);
    }

    #[test]
    fn forecast_converges_to_fixed_point() {
        let data = simulate(6, 1000, &[1.0, 2.0], &[a1()]);
        let fit = fit_var(&data, 1).unwrap();
        let f = forecast_var(&fit, 400).unwrap();
        let mean = (DMatrix::identity(2, 2) - &fit.a[0]).try_inverse().unwrap() * &fit.c;
        assert!((f.row(399).transpose() - mean).abs().max() < 1e-9);
    }

    #[test]
    fn zero_dynamics_forecast_zero() {
        let fit = VarFit {
            k: 2,
            p: 1,
            labels: vec!["a".into(), "b".into()],
            c: DVector::zeros(2),
            a: vec![DMatrix::zeros(2, 2)],
            sigma: DMatrix::identity(2, 2),
            loglik: 0.0,
            aic: 0.0,
            n_obs: 10,
            last_obs: DMatrix::from_row_slice(1, 2, &[5.0, -3.0]),
        };
        assert!(forecast_var(&fit, 3).unwrap().iter().all(|v| *v == 0.0));
        assert_eq!(forecast_var(&fit, 0).unwrap_err(), VarError::ZeroHorizon);
    }

    #[test]
    fn ar1_closed_form_forecast() {
        let data = simulate(7, 500, &[2.0], &[DMatrix::from_element(1, 1, 0.6)]);
        let fit = fit_var(&data, 1).unwrap();
        let (phi, c) = (fit.a[0][(0, 0)], fit.c[0]);
        let mu = c / (1.0 - phi);
        let last = data[(499, 0)];
        let f = forecast_var(&fit, 8).unwrap();
        for h in 0..8 {
            assert_abs_diff_eq!(f[(h, 0)], mu + phi.powi(h as i32 + 1) * (last - mu), epsilon = 1e-10);
        }
    }

    #[test]
    fn lag_selection_and_common_sample() {
        let a2 = DMatrix::from_row_slice(2, 2, &[-0.3, 0.0, 0.1, 0.2]);
        let data = simulate(8, 2000, &[0.0, 0.0], &[a1(), a2]);
        let labels = vec!["x".to_string(), "y".to_string()];
        let (p, fit) = select_var_lag(&data, labels.clone(), 6).unwrap();
        assert_eq!(p, 2);
        assert_eq!(fit.n_obs, 2000 - 6);
        let (p1, _) = select_var_lag(&data, labels, 1).unwrap();
        assert_eq!(p1, 1);
    }

    #[test]
    fn error_cases() {
        let short = DMatrix::from_fn(11, 2, |i, j| (i * (j + 1)) as f64);
        assert!(matches!(fit_var(&short, 1), Err(VarError::TooShort { need: 12, .. })));
        let constant = DMatrix::from_fn(50, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        assert_eq!(fit_var(&constant, 1).unwrap_err(), VarError::ConstantColumn("y1".into()));
        let dup = DMatrix::from_fn(50, 2, |i, _| ((i * 7) % 11) as f64);
        assert_eq!(fit_var(&dup, 1).unwrap_err(), VarError::RankDeficient);
        assert_eq!(fit_var(&dup, 0).unwrap_err(), VarError::ZeroLag);
    }

    #[test]
    fn json_round_trip_row_major() {
        let data = simulate(9, 200, &[0.0, 1.0], &[a1()]);
        let fit = fit_var(&data, 2).unwrap();
        let json = serde_json::to_string(&fit).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["a"][0][0][1].as_f64().unwrap(), fit.a[0][(0, 1)]);
        let back: VarFit = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fit);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn reordering_variables_permutes_the_fit(seed in 0u64..1000, p in 1usize..3) {
            let a = DMatrix::from_row_slice(3, 3, &[0.4, 0.1, 0.0, 0.0, 0.3, 0.1, 0.1, 0.0, 0.2]);
            let data = simulate(seed, 150, &[0.1, 0.2, 0.3], &[a]);
            let perm = [2usize, 0, 1];
            let permuted = DMatrix::from_fn(150, 3, |t, j| data[(t, perm[j])]);
            let f = fit_var(&data, p).unwrap();
            let g = fit_var(&permuted, p).unwrap();
            for i in 0..3 {
                prop_assert!((g.c[i] - f.c[perm[i]]).abs() < 1e-9);
                for j in 0..3 {
                    prop_assert!((g.sigma[(i, j)] - f.sigma[(perm[i], perm[j])]).abs() < 1e-9);
                    for l in 0..p {
                        prop_assert!((g.a[l][(i, j)] - f.a[l][(perm[i], perm[j])]).abs() < 1e-9);
                    }
                }
            }
            prop_assert!((g.loglik - f.loglik).abs() < 1e-7);
        }
    }
}
