//! Lag-polynomial arithmetic.
//!
//! Coefficient vectors are ordered by power of the backshift operator,
//! lowest first, so `[1.0, -0.5]` is `1 - 0.5B`.

/// Product of two polynomials.
pub fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `1 + sign * (c_1 B^step + c_2 B^{2 step} + ...)`.
pub fn lag_polynomial(coeffs: &[f64], step: usize, sign: f64) -> Vec<f64> {
    let mut poly = vec![0.0; coeffs.len() * step + 1];
    poly[0] = 1.0;
    for (k, &c) in coeffs.iter().enumerate() {
        poly[(k + 1) * step] = sign * c;
    }
    poly
}

/// Expanded autoregressive lag coefficients of `phi(B) Phi(B^s)`, in the
/// form `y_t = sum_j a_j y_{t-j} + ...` (index 0 is lag 1).
pub fn expand_ar(phi: &[f64], seasonal_phi: &[f64], period: usize) -> Vec<f64> {
    let poly = multiply(
        &lag_polynomial(phi, 1, -1.0),
        &lag_polynomial(seasonal_phi, period.max(1), -1.0),
    );
    poly[1..].iter().map(|c| -c).collect()
}

/// Expanded moving-average lag coefficients of `theta(B) Theta(B^s)`
/// (index 0 is lag 1).
pub fn expand_ma(theta: &[f64], seasonal_theta: &[f64], period: usize) -> Vec<f64> {
    let poly = multiply(
        &lag_polynomial(theta, 1, 1.0),
        &lag_polynomial(seasonal_theta, period.max(1), 1.0),
    );
    poly[1..].to_vec()
}

/// Evaluates the polynomial at `x` (Horner).
pub fn evaluate(poly: &[f64], x: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seasonal_ar_expansion() {
        let ar = expand_ar(&[0.5], &[0.3], 7);
        assert_eq!(ar.len(), 8);
        assert!((ar[0] - 0.5).abs() < 1e-15);
        assert!((ar[6] - 0.3).abs() < 1e-15);
        assert!((ar[7] + 0.15).abs() < 1e-15);
        assert!(ar[1..6].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn non_seasonal_is_unchanged() {
        assert_eq!(expand_ar(&[0.2, -0.1], &[], 12), vec![0.2, -0.1]);
        assert_eq!(expand_ma(&[0.4], &[], 7), vec![0.4]);
        assert!(expand_ar(&[], &[], 1).is_empty());
    }

    #[test]
    fn seasonal_ma_expansion() {
        let ma = expand_ma(&[0.4], &[-0.5], 3);
        assert_eq!(ma, vec![0.4, 0.0, -0.5, -0.2]);
    }

    /// Brute-force product: accumulate every pair of terms into a lag map.
    fn brute_force(phi: &[f64], seasonal: &[f64], s: usize) -> Vec<f64> {
        let mut left = vec![(0usize, 1.0)];
        left.extend(phi.iter().enumerate().map(|(i, c)| (i + 1, -c)));
        let mut right = vec![(0usize, 1.0)];
        right.extend(seasonal.iter().enumerate().map(|(i, c)| ((i + 1) * s, -c)));
        let degree = phi.len() + seasonal.len() * s;
        let mut acc = vec![0.0; degree + 1];
        for &(i, a) in &left {
            for &(j, b) in &right {
                acc[i + j] += a * b;
            }
        }
        acc[1..].iter().map(|c| -c).collect()
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            phi in prop::collection::vec(-1.0f64..1.0, 0..4),
            seasonal in prop::collection::vec(-1.0f64..1.0, 0..3),
        ) {
            let got = expand_ar(&phi, &seasonal, 4);
            let want = brute_force(&phi, &seasonal, 4);
            prop_assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                prop_assert!((g - w).abs() < 1e-14);
            }
        }
    }
}
