//! Partial-autocorrelation reparametrization of AR/MA coefficient blocks.
//!
//! An unconstrained vector `u` maps to partial autocorrelations
//! `r_k = tanh(u_k)` in (-1, 1), and the Durbin–Levinson step
//! `a_j^{(k)} = a_j^{(k-1)} - r_k a_{k-j}^{(k-1)}` turns those into the
//! coefficients of a stationary polynomial `1 - a_1 B - ... - a_p B^p`.
//! Every `u` lands in the stationary region and every stationary
//! polynomial has exactly one preimage.

use crate::error::{Error, Result};

/// Partials are kept strictly inside the unit interval so the state
/// covariance stays finite.
const MAX_PARTIAL: f64 = 1.0 - 1e-8;

/// Stationary AR coefficients from partial autocorrelations.
pub fn partials_to_ar(partials: &[f64]) -> Vec<f64> {
    let mut a: Vec<f64> = Vec::with_capacity(partials.len());
    let mut prev: Vec<f64> = Vec::with_capacity(partials.len());
    for &r in partials {
        prev.clear();
        prev.extend_from_slice(&a);
        let k = prev.len();
        for j in 0..k {
            a[j] = prev[j] - r * prev[k - 1 - j];
        }
        a.push(r);
    }
    a
}

/// Inverse of [`partials_to_ar`]. Fails when the polynomial is not
/// stationary.
pub fn ar_to_partials(coeffs: &[f64]) -> Result<Vec<f64>> {
    let mut a = coeffs.to_vec();
    let mut partials = vec![0.0; a.len()];
    for k in (0..a.len()).rev() {
        let r = a[k];
        if !(r.abs() < 1.0) {
            return Err(Error::NotStationary);
        }
        partials[k] = r;
        let denom = 1.0 - r * r;
        let prev: Vec<f64> = (0..k).map(|j| (a[j] + r * a[k - 1 - j]) / denom).collect();
        a.truncate(k);
        a.copy_from_slice(&prev);
    }
    Ok(partials)
}

/// True when `1 - a_1 B - ... - a_p B^p` has all roots outside the unit circle.
pub fn is_stationary(coeffs: &[f64]) -> bool {
    ar_to_partials(coeffs).is_ok()
}

/// True when `1 + b_1 B + ... + b_q B^q` has all roots outside the unit circle.
pub fn is_invertible(coeffs: &[f64]) -> bool {
    let negated: Vec<f64> = coeffs.iter().map(|c| -c).collect();
    is_stationary(&negated)
}

pub fn constrain_ar(u: &[f64]) -> Vec<f64> {
    let partials: Vec<f64> = u
        .iter()
        .map(|x| x.tanh().clamp(-MAX_PARTIAL, MAX_PARTIAL))
        .collect();
    partials_to_ar(&partials)
}

pub fn unconstrain_ar(coeffs: &[f64]) -> Result<Vec<f64>> {
    Ok(ar_to_partials(coeffs)?.into_iter().map(f64::atanh).collect())
}

/// MA coefficients in the `1 + b_1 B + ...` sign convention.
pub fn constrain_ma(u: &[f64]) -> Vec<f64> {
    constrain_ar(u).into_iter().map(|c| -c).collect()
}

pub fn unconstrain_ma(coeffs: &[f64]) -> Result<Vec<f64>> {
    let negated: Vec<f64> = coeffs.iter().map(|c| -c).collect();
    unconstrain_ar(&negated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::polynomial;
    use proptest::prelude::*;

    /// Smallest root modulus of `1 - sum a_j z^j`, closed form for degree <= 2.
    fn min_root_modulus(a: &[f64]) -> f64 {
        match a.len() {
            0 => f64::INFINITY,
            1 => 1.0 / a[0].abs(),
            2 => {
                // -a2 z^2 - a1 z + 1 = 0
                let (qa, qb, qc) = (-a[1], -a[0], 1.0);
                if qa == 0.0 {
                    return (qc / qb).abs();
                }
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let r1 = (-qb + disc.sqrt()) / (2.0 * qa);
                    let r2 = (-qb - disc.sqrt()) / (2.0 * qa);
                    r1.abs().min(r2.abs())
                } else {
                    (qc / qa).abs().sqrt()
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn ar1_is_identity() {
        assert_eq!(partials_to_ar(&[0.7]), vec![0.7]);
        assert_eq!(ar_to_partials(&[-0.3]).unwrap(), vec![-0.3]);
    }

    #[test]
    fn ar2_known_values() {
        // a1 = r1 (1 - r2), a2 = r2
        let a = partials_to_ar(&[0.5, 0.3]);
        assert!((a[0] - 0.35).abs() < 1e-15 && (a[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_unit_root() {
        assert!(ar_to_partials(&[1.0]).is_err());
        assert!(!is_stationary(&[0.5, 0.5]));
        assert!(is_stationary(&[0.5, 0.3]));
        assert!(is_invertible(&[0.9]));
        assert!(!is_invertible(&[1.2]));
    }

    #[test]
    fn extreme_inputs_stay_stationary() {
        let a = constrain_ar(&[50.0, -50.0, 50.0]);
        assert!(a.iter().all(|c| c.is_finite()));
        assert!(is_stationary(&a));
    }

    proptest! {
        #[test]
        fn round_trip(u in prop::collection::vec(-3.0f64..3.0, 1..=5)) {
            let coeffs = constrain_ar(&u);
            let back = unconstrain_ar(&coeffs).unwrap();
            let again = constrain_ar(&back);
            for (a, b) in coeffs.iter().zip(&again) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            for (a, b) in u.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-8);
            }
        }

        #[test]
        fn image_is_stationary(u in prop::collection::vec(-4.0f64..4.0, 1..=2)) {
            let a = constrain_ar(&u);
            prop_assert!(min_root_modulus(&a) > 1.0);
            let ma = constrain_ma(&u);
            let negated: Vec<f64> = ma.iter().map(|c| -c).collect();
            prop_assert!(min_root_modulus(&negated) > 1.0);
            let poly = polynomial::lag_polynomial(&ma, 1, 1.0);
            prop_assert!(polynomial::evaluate(&poly, 1.0) > 0.0);
        }
    }
}
