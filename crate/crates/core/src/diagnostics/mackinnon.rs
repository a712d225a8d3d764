//! MacKinnon response surfaces for the single-series unit-root statistic.
//!
//! p-values use the 1994 approximation (normal CDF of a polynomial in the
//! statistic); critical values use the 2010 finite-sample surfaces.

use statrs::distribution::{ContinuousCDF, Normal};

use super::AdfRegression;

struct Surface {
    max: f64,
    min: f64,
    star: f64,
    small_p: [f64; 3],
    large_p: [f64; 4],
    /// 1%, 5%, 10% rows: `b0 + b1/T + b2/T^2 + b3/T^3`.
    critical: [[f64; 4]; 3],
}

const NO_TREND: Surface = Surface {
    max: f64::INFINITY,
    min: -19.04,
    star: -1.04,
    small_p: [0.6344, 1.2378, 3.2496e-2],
    large_p: [0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2],
    critical: [
        [-2.56574, -2.2358, -3.627, 0.0],
        [-1.941, -0.2686, -3.365, 31.223],
        [-1.61682, 0.2656, -2.714, 25.364],
    ],
};

const CONSTANT: Surface = Surface {
    max: 2.74,
    min: -18.83,
    star: -1.61,
    small_p: [2.1659, 1.4412, 3.8269e-2],
    large_p: [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2],
    critical: [
        [-3.43035, -6.5393, -16.786, -79.433],
        [-2.86154, -2.8903, -4.234, -40.040],
        [-2.56677, -1.5384, -2.809, 0.0],
    ],
};

const CONSTANT_TREND: Surface = Surface {
    max: 0.7,
    min: -16.18,
    star: -2.89,
    small_p: [3.2512, 1.6047, 4.9588e-2],
    large_p: [2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2],
    critical: [
        [-3.95877, -9.0531, -28.428, -134.155],
        [-3.41049, -4.3904, -9.036, -45.374],
        [-3.12705, -2.5856, -3.925, -22.38],
    ],
};

fn surface(regression: AdfRegression) -> &'static Surface {
    match regression {
        AdfRegression::None => &NO_TREND,
        AdfRegression::Constant => &CONSTANT,
        AdfRegression::ConstantTrend => &CONSTANT_TREND,
    }
}

/// Lower and upper bounds applied to p-values outside the tabulated range.
pub const P_FLOOR: f64 = 1e-8;
pub const P_CEIL: f64 = 1.0 - 1e-8;

/// Approximate p-value of `stat`; the flag is set when the statistic fell
/// outside the tabulated range and the result was clamped.
pub fn p_value(stat: f64, regression: AdfRegression) -> (f64, bool) {
    let s = surface(regression);
    if stat > s.max {
        return (P_CEIL, true);
    }
    if stat < s.min {
        return (P_FLOOR, true);
    }
    let z = if stat <= s.star {
        s.small_p[0] + s.small_p[1] * stat + s.small_p[2] * stat * stat
    } else {
        s.large_p
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * stat + c)
    };
    let p = Normal::new(0.0, 1.0).expect("unit normal").cdf(z);
    (p.clamp(0.0, 1.0), false)
}

/// Critical values at 1%, 5% and 10% for `nobs` observations.
pub fn critical_values(regression: AdfRegression, nobs: usize) -> [f64; 3] {
    let s = surface(regression);
    let inv = 1.0 / nobs as f64;
    s.critical
        .map(|b| b[0] + b[1] * inv + b[2] * inv * inv + b[3] * inv * inv * inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_percent_critical_value_has_five_percent_p() {
        for reg in [AdfRegression::None, AdfRegression::Constant, AdfRegression::ConstantTrend] {
            let cv = critical_values(reg, 100_000)[1];
            let (p, clamped) = p_value(cv, reg);
            assert!(!clamped);
            assert!((p - 0.05).abs() < 0.005, "{reg:?}: p({cv}) = {p}");
        }
    }

    #[test]
    fn reference_values() {
        // Frozen from statsmodels' mackinnonp / mackinnoncrit.
        let cases = [
            (-5.45, AdfRegression::Constant, 2.657484924653966e-06),
            (-10.403, AdfRegression::Constant, 1.8880522155664905e-18),
            (0.0, AdfRegression::Constant, 0.958532086060056),
            (-2.0, AdfRegression::ConstantTrend, 0.6014337722402741),
            (-1.5, AdfRegression::None, 0.1252400584846753),
        ];
        for (stat, reg, want) in cases {
            let (p, clamped) = p_value(stat, reg);
            assert!(!clamped);
            assert!((p / want - 1.0).abs() < 1e-9, "{stat} {reg:?}: {p} vs {want}");
        }
        let cv = critical_values(AdfRegression::Constant, 500);
        let want = [-3.44349638, -2.86733786, -2.56985804];
        for (a, b) in cv.iter().zip(want) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn clamps_outside_range() {
        assert_eq!(p_value(-21.152, AdfRegression::Constant), (P_FLOOR, true));
        assert_eq!(p_value(3.0, AdfRegression::Constant), (P_CEIL, true));
        let (p, clamped) = p_value(30.0, AdfRegression::None);
        assert!(!clamped && p > 0.999);
    }
}
