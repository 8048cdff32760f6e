//! Exact Gaussian likelihood of a zero-mean ARMA(p, q) process through its
//! state-space form
//!
//! ```text
//! x_{t+1} = T x_t + R ε_{t+1},   w_t = x_t[0],
//! ```
//!
//! with `r = max(p, q + 1)`, `T` the companion matrix of the AR part and
//! `R = (1, θ₁, …, θ_{r−1})`. The innovation variance is profiled out, so the
//! recursion runs on covariances scaled by 1/σ².

use nalgebra::DMatrix;

#[derive(Clone, Debug)]
pub(crate) struct KalmanOutput {
    /// Σ ln F_t over the counted steps.
    pub sum_log_f: f64,
    /// Σ v_t² / F_t over the counted steps.
    pub sum_sq: f64,
    pub n_terms: usize,
    /// Predicted state for the step after the last observation.
    pub next_state: Vec<f64>,
}

impl KalmanOutput {
    pub fn sigma2(&self) -> f64 {
        self.sum_sq / self.n_terms as f64
    }

    /// Log-likelihood with σ² at its maximising value.
    pub fn loglik(&self) -> f64 {
        let n = self.n_terms as f64;
        -0.5 * (n * ((2.0 * std::f64::consts::PI).ln() + 1.0 + self.sigma2().ln()) + self.sum_log_f)
    }
}

struct StateSpace {
    r: usize,
    phi: Vec<f64>,
    rr: Vec<f64>,
}

impl StateSpace {
    fn new(ar: &[f64], ma: &[f64]) -> Self {
        let r = ar.len().max(ma.len() + 1);
        let mut phi = vec![0.0; r];
        phi[..ar.len()].copy_from_slice(ar);
        let mut rvec = vec![0.0; r];
        rvec[0] = 1.0;
        rvec[1..=ma.len()].copy_from_slice(ma);
        let mut rr = vec![0.0; r * r];
        for i in 0..r {
            for j in 0..r {
                rr[i * r + j] = rvec[i] * rvec[j];
            }
        }
        Self { r, phi, rr }
    }

    fn transition(&self, x: &[f64], out: &mut [f64]) {
        let r = self.r;
        for i in 0..r {
            out[i] = self.phi[i] * x[0] + if i + 1 < r { x[i + 1] } else { 0.0 };
        }
    }

    /// `T P Tᵀ + R Rᵀ` into `out`, using `tmp` as scratch.
    fn propagate(&self, p: &[f64], tmp: &mut [f64], out: &mut [f64]) {
        let r = self.r;
        for i in 0..r {
            for j in 0..r {
                let below = if i + 1 < r { p[(i + 1) * r + j] } else { 0.0 };
                tmp[i * r + j] = self.phi[i] * p[j] + below;
            }
        }
        for i in 0..r {
            for j in 0..r {
                let right = if j + 1 < r { tmp[i * r + j + 1] } else { 0.0 };
                out[i * r + j] = tmp[i * r] * self.phi[j] + right + self.rr[i * r + j];
            }
        }
    }

    /// Stationary state covariance from `P = T P Tᵀ + R Rᵀ`.
    fn stationary_covariance(&self) -> Option<Vec<f64>> {
        let r = self.r;
        let mut t = DMatrix::zeros(r, r);
        for i in 0..r {
            t[(i, 0)] = self.phi[i];
            if i + 1 < r {
                t[(i, i + 1)] = 1.0;
            }
        }
        let kron = t.kronecker(&t);
        let system = DMatrix::identity(r * r, r * r) - kron;
        // Row-major and column-major vec coincide for the symmetric RRᵀ.
        let rhs = nalgebra::DVector::from_column_slice(&self.rr);
        let sol = system.lu().solve(&rhs)?;
        let mut p = vec![0.0; r * r];
        for i in 0..r {
            for j in 0..r {
                // Column-major vec(P): element (i, j) at j·r + i.
                let v = 0.5 * (sol[j * r + i] + sol[i * r + j]);
                p[i * r + j] = v;
            }
        }
        p.iter().all(|v| v.is_finite()).then_some(p)
    }
}

/// Runs the filter over `w`. The first `skip` innovations are filtered but
/// left out of the likelihood sums. Returns `None` when the state covariance
/// cannot be initialised or an innovation variance collapses.
pub(crate) fn filter(w: &[f64], ar: &[f64], ma: &[f64], skip: usize) -> Option<KalmanOutput> {
    let ss = StateSpace::new(ar, ma);
    let r = ss.r;
    let mut p = ss.stationary_covariance()?;
    let mut a = vec![0.0; r];
    let mut filtered = vec![0.0; r];
    let mut upd = vec![0.0; r * r];
    let mut tmp = vec![0.0; r * r];
    let mut next_p = vec![0.0; r * r];
    let mut gain = vec![0.0; r];
    let mut steady = false;

    let mut sum_log_f = 0.0;
    let mut sum_sq = 0.0;
    let mut n_terms = 0;

    for (t, &obs) in w.iter().enumerate() {
        let f = p[0];
        if f.is_nan() || f <= 1e-12 || !f.is_finite() {
            return None;
        }
        let v = obs - a[0];
        if t >= skip {
            sum_log_f += f.ln();
            sum_sq += v * v / f;
            n_terms += 1;
        }
        for i in 0..r {
            gain[i] = p[i * r] / f;
            filtered[i] = a[i] + gain[i] * v;
        }
        ss.transition(&filtered, &mut a);

        if !steady {
            for i in 0..r {
                for j in 0..r {
                    upd[i * r + j] = p[i * r + j] - gain[i] * p[j];
                }
            }
            ss.propagate(&upd, &mut tmp, &mut next_p);
            let delta = next_p.iter().zip(&p).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            std::mem::swap(&mut p, &mut next_p);
            steady = delta < 1e-13;
        }
    }

    if n_terms == 0 || sum_sq.is_nan() || sum_sq <= 0.0 || !sum_sq.is_finite() {
        return None;
    }
    Some(KalmanOutput { sum_log_f, sum_sq, n_terms, next_state: a })
}

/// Point forecasts of the ARMA part for `horizon` steps from a predicted
/// state.
pub(crate) fn forecast_states(ar: &[f64], ma: &[f64], state: &[f64], horizon: usize) -> Vec<f64> {
    let ss = StateSpace::new(ar, ma);
    let mut a = state.to_vec();
    a.resize(ss.r, 0.0);
    let mut next = vec![0.0; ss.r];
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        out.push(a[0]);
        ss.transition(&a, &mut next);
        std::mem::swap(&mut a, &mut next);
    }
    out
}
