//! Conditional-sum-of-squares objective for regression with ARMA errors.
//!
//! For fixed ARMA coefficients the residual filter is linear, so the
//! regression coefficients (intercept and covariates) are obtained by least
//! squares on the filtered columns and only the ARMA coefficients are left
//! to the optimiser.

use crate::linalg::solve_gram;

use super::polynomial::{strictly_invertible, strictly_stationary};

pub(crate) struct CssProblem<'a> {
    pub y: &'a [f64],
    /// Regressor columns on the same (differenced) scale as `y`.
    pub columns: &'a [Vec<f64>],
    pub p: usize,
    /// Residuals before this index are filtered but not summed.
    pub burn_in: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct CssValue {
    pub ssr: f64,
    pub n_terms: usize,
    pub beta: Vec<f64>,
}

impl CssValue {
    /// Concentrated conditional log-likelihood.
    pub fn loglik(&self) -> f64 {
        let n = self.n_terms as f64;
        -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + 1.0 + (self.ssr / n).ln())
    }
}

/// Residuals of the inverse ARMA filter, `e_t` for `t ≥ p`, with pre-sample
/// residuals set to zero.
pub(crate) fn arma_residuals(v: &[f64], ar: &[f64], ma: &[f64], out: &mut Vec<f64>) {
    let p = ar.len();
    out.clear();
    if v.len() <= p {
        return;
    }
    out.reserve(v.len() - p);
    for t in p..v.len() {
        let mut e = v[t];
        for (i, phi) in ar.iter().enumerate() {
            e -= phi * v[t - i - 1];
        }
        let k = out.len();
        for (j, theta) in ma.iter().enumerate() {
            if k > j {
                e -= theta * out[k - j - 1];
            }
        }
        out.push(e);
    }
}

impl CssProblem<'_> {
    pub fn start(&self) -> usize {
        self.burn_in.max(self.p)
    }

    /// Evaluates at ARMA coefficients `params = (φ, θ)`. Returns `None` for
    /// non-stationary or non-invertible points and degenerate regressions.
    pub fn evaluate(&self, params: &[f64], scratch: &mut Scratch) -> Option<CssValue> {
        let (ar, ma) = params.split_at(self.p);
        if !strictly_stationary(ar) || !strictly_invertible(ma) {
            return None;
        }
        let skip = self.start() - self.p;
        let m = self.columns.len();

        arma_residuals(self.y, ar, ma, &mut scratch.fy);
        scratch.fz.resize(m, Vec::new());
        for (col, out) in self.columns.iter().zip(scratch.fz.iter_mut()) {
            arma_residuals(col, ar, ma, out);
        }
        let fy = &scratch.fy[skip..];
        let n_terms = fy.len();
        if n_terms == 0 {
            return None;
        }

        let beta = if m == 0 {
            Vec::new()
        } else {
            let mut gram = vec![0.0; m * m];
            let mut rhs = vec![0.0; m];
            for a in 0..m {
                let za = &scratch.fz[a][skip..];
                rhs[a] = dot(za, fy);
                for b in 0..=a {
                    let g = dot(za, &scratch.fz[b][skip..]);
                    gram[a * m + b] = g;
                    gram[b * m + a] = g;
                }
            }
            solve_gram(&gram, &rhs)?
        };

        let mut ssr = 0.0;
        for (t, &v) in fy.iter().enumerate() {
            let mut e = v;
            for (col, b) in scratch.fz.iter().zip(&beta) {
                e -= b * col[skip + t];
            }
            ssr += e * e;
        }
        (ssr.is_finite() && ssr > 0.0).then_some(CssValue { ssr, n_terms, beta })
    }

    /// Objective minimised by the simplex: the negated concentrated
    /// log-likelihood without constants.
    pub fn objective(&self, params: &[f64], scratch: &mut Scratch) -> f64 {
        match self.evaluate(params, scratch) {
            Some(v) => 0.5 * v.n_terms as f64 * (v.ssr / v.n_terms as f64).ln(),
            None => f64::INFINITY,
        }
    }
}

#[derive(Default)]
pub(crate) struct Scratch {
    fy: Vec<f64>,
    fz: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
