use super::ArimaError;

/// Applies `d` first differences. The result is `d` elements shorter.
pub fn difference(series: &[f64], d: usize) -> Result<Vec<f64>, ArimaError> {
    if d >= series.len() && d > 0 {
        return Err(ArimaError::DifferenceTooLarge { len: series.len(), d });
    }
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Inverse of [`difference`]: rebuilds the original series from the
/// differenced values and its first `d` elements.
pub fn integrate(differenced: &[f64], initial: &[f64], d: usize) -> Result<Vec<f64>, ArimaError> {
    if initial.len() != d {
        return Err(ArimaError::InitialValues { expected: d, got: initial.len() });
    }
    let mut out = initial.to_vec();
    extend_integrated(&mut out, differenced, d);
    Ok(out)
}

/// Appends levels to `history` so that its `d`-th difference continues with
/// `increments`. Uses the binomial expansion of (1 − B)^d directly so that a
/// zero increment reproduces the last level bit for bit when `d = 1`.
pub(crate) fn extend_integrated(history: &mut Vec<f64>, increments: &[f64], d: usize) {
    let weights = binomial_weights(d);
    for &w in increments {
        let t = history.len();
        let mut level = w;
        for (i, c) in weights.iter().enumerate().skip(1) {
            level -= c * history[t - i];
        }
        history.push(level);
    }
}

/// Coefficients of (1 − B)^d: `C(d, i)·(−1)^i`.
fn binomial_weights(d: usize) -> Vec<f64> {
    let mut w = vec![1.0];
    for i in 1..=d {
        let prev = w[i - 1];
        w.push(-prev * (d + 1 - i) as f64 / i as f64);
    }
    w
}
