use nalgebra::DMatrix;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::linalg::least_squares;

use super::fit::{lagged_design, validate};
use super::{VarError, VarFit};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrangerResult {
    pub cause: String,
    pub effect: String,
    pub f_stat: f64,
    pub p_value: f64,
    pub restricted_rss: f64,
    pub unrestricted_rss: f64,
    /// Numerator and denominator degrees of freedom.
    pub df: (usize, usize),
}

/// F-test of whether `p` lags of `cause` improve the least-squares
/// prediction of `effect` in the VAR(p) equation for `effect`.
pub fn granger_causality(
    data: &DMatrix<f64>,
    labels: &[String],
    cause: &str,
    effect: &str,
    p: usize,
) -> Result<GrangerResult, VarError> {
    validate(data, labels, p)?;
    let find = |name: &str| labels.iter().position(|l| l == name).ok_or_else(|| VarError::UnknownLabel(name.to_string()));
    let (ci, ei) = (find(cause)?, find(effect)?);
    if ci == ei {
        return Err(VarError::SameVariable(cause.to_string()));
    }
    let (n, k) = data.shape();
    let full = lagged_design(data, p, p);
    let keep: Vec<usize> = (0..full.ncols()).filter(|&c| c == 0 || (c - 1) % k != ci).collect();
    let restricted = full.select_columns(&keep);
    let y = data.view((p, ei), (n - p, 1)).into_owned();

    let rss = |x: &DMatrix<f64>| -> Result<f64, VarError> {
        let ls = least_squares(x, &y).map_err(|_| VarError::RankDeficient)?;
        Ok(ls.residuals.norm_squared())
    };
    let unrestricted_rss = rss(&full)?;
    let restricted_rss = rss(&restricted)?.max(unrestricted_rss);

    let df_den = (n - p) as i64 - full.ncols() as i64;
    if df_den <= 0 {
        return Err(VarError::DegenerateDf(df_den));
    }
    let (df1, df2) = (p, df_den as usize);
    let (f_stat, p_value) = if unrestricted_rss > 0.0 {
        let f = ((restricted_rss - unrestricted_rss) / df1 as f64) / (unrestricted_rss / df2 as f64);
        let dist = FisherSnedecor::new(df1 as f64, df2 as f64).map_err(|e| VarError::Invalid(e.to_string()))?;
        (f, dist.sf(f).clamp(0.0, 1.0))
    } else if restricted_rss > 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        return Err(VarError::PerfectFit);
    };

    Ok(GrangerResult {
        cause: cause.to_string(),
        effect: effect.to_string(),
        f_stat,
        p_value,
        restricted_rss,
        unrestricted_rss,
        df: (df1, df2),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrfResult {
    pub horizon: usize,
    /// `responses[h][(i, j)]`: response of variable `i` at step `h` to a
    /// unit shock in variable `j` at step 0.
    #[serde(serialize_with = "row_major")]
    pub responses: Vec<DMatrix<f64>>,
}

fn row_major<S: serde::Serializer>(ms: &[DMatrix<f64>], s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<Vec<f64>>> =
        ms.iter().map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect()).collect();
    rows.serialize(s)
}

/// Non-orthogonalised impulse responses `Ψ_0 = I`,
/// `Ψ_h = Σ_{i=1..min(h,p)} A_i Ψ_{h−i}`.
pub fn impulse_response(fit: &VarFit, horizon: usize) -> IrfResult {
    let mut psi = vec![DMatrix::identity(fit.k, fit.k)];
    for h in 1..=horizon {
        let mut next = DMatrix::zeros(fit.k, fit.k);
        for i in 1..=h.min(fit.p) {
            next += &fit.a[i - 1] * &psi[h - i];
        }
        psi.push(next);
    }
    IrfResult { horizon, responses: psi }
}
