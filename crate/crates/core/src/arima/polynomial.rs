//! Root-location checks for lag polynomials.

/// Largest partial autocorrelation magnitude accepted as strictly inside the
/// stationary region.
pub(crate) const PACF_LIMIT: f64 = 0.99999;

/// Whether `1 − φ₁z − … − φ_p z^p` has all roots outside the unit circle.
///
/// Runs the Durbin–Levinson recursion backwards: the polynomial is stationary
/// iff every partial autocorrelation it implies has modulus below one.
pub fn is_stationary(ar: &[f64]) -> bool {
    step_down(ar, 1.0)
}

/// Whether `1 + θ₁z + … + θ_q z^q` has all roots outside the unit circle.
pub fn is_invertible(ma: &[f64]) -> bool {
    let neg: Vec<f64> = ma.iter().map(|t| -t).collect();
    step_down(&neg, 1.0)
}

pub(crate) fn strictly_stationary(ar: &[f64]) -> bool {
    step_down(ar, PACF_LIMIT)
}

pub(crate) fn strictly_invertible(ma: &[f64]) -> bool {
    let neg: Vec<f64> = ma.iter().map(|t| -t).collect();
    step_down(&neg, PACF_LIMIT)
}

fn step_down(coef: &[f64], limit: f64) -> bool {
    let mut a: Vec<f64> = coef.to_vec();
    while let Some(&last) = a.last() {
        if last == 0.0 {
            a.pop();
        } else {
            break;
        }
    }
    if a.iter().any(|v| !v.is_finite()) {
        return false;
    }
    for k in (1..=a.len()).rev() {
        let kappa = a[k - 1];
        if kappa.abs() >= limit {
            return false;
        }
        let denom = 1.0 - kappa * kappa;
        let prev: Vec<f64> = (1..k).map(|j| (a[j - 1] + kappa * a[k - j - 1]) / denom).collect();
        a.truncate(k - 1);
        a.copy_from_slice(&prev);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    /// Independent check: the companion matrix's eigenvalues are the
    /// reciprocals of the polynomial roots.
    fn companion_radius(ar: &[f64]) -> f64 {
        let p = ar.len();
        if p == 0 {
            return 0.0;
        }
        let mut m = DMatrix::zeros(p, p);
        for (j, &c) in ar.iter().enumerate() {
            m[(0, j)] = c;
        }
        for i in 1..p {
            m[(i, i - 1)] = 1.0;
        }
        m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn simple_cases() {
        assert!(is_stationary(&[]));
        assert!(is_stationary(&[0.8]));
        assert!(!is_stationary(&[1.0]));
        assert!(!is_stationary(&[1.2]));
        assert!(is_stationary(&[0.5, 0.3]));
        assert!(!is_stationary(&[0.5, 0.6]));
        assert!(is_invertible(&[0.4]));
        assert!(!is_invertible(&[-1.0]));
        assert!(is_stationary(&[0.5, 0.0]));
    }

    proptest! {
        #[test]
        fn agrees_with_companion_eigenvalues(ar in prop::collection::vec(-1.5f64..1.5, 1..6)) {
            let radius = companion_radius(&ar);
            prop_assume!((radius - 1.0).abs() > 1e-6);
            prop_assert_eq!(is_stationary(&ar), radius < 1.0);
        }
    }
}
