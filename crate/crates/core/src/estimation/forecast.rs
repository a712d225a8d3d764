//! Multi-step forecasts with error variances on the original scale.

use chrono::{Days, NaiveDate};

use super::kalman::{self, ArmaStateSpace};
use super::{differenced_values, expand_polynomials, SarimaParams, SarimaSpec, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};
use crate::series::{integrate_values, TimeSeries};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    /// Date of the first forecast step.
    pub start: NaiveDate,
    pub point: Vec<f64>,
    pub variance: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Forecast {
    pub fn horizon(&self) -> usize {
        self.point.len()
    }

    pub fn date_at(&self, step: usize) -> NaiveDate {
        self.start + Days::new(step as u64)
    }
}

/// Largest horizon accepted for a given spec: `max(3 s, 365)`.
pub fn horizon_cap(spec: &SarimaSpec) -> usize {
    (3 * spec.period).max(365)
}

/// Forecasts `horizon` days past the end of `series`.
///
/// The filter runs over the whole differenced series; predictions of the
/// differenced process are then integrated back. Error variances account for
/// the correlation between forecast errors at different steps, which is what
/// makes random-walk variances grow linearly.
pub fn forecast(
    spec: &SarimaSpec,
    params: &SarimaParams,
    series: &TimeSeries,
    horizon: usize,
) -> Result<Forecast> {
    if horizon > horizon_cap(spec) {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} exceeds cap {}",
            horizon_cap(spec)
        )));
    }
    forecast_uncapped(spec, params, series, horizon)
}

/// [`forecast`] without the horizon cap; used for backtests whose test
/// segment is longer than a year.
pub fn forecast_uncapped(
    spec: &SarimaSpec,
    params: &SarimaParams,
    series: &TimeSeries,
    horizon: usize,
) -> Result<Forecast> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    spec.validate(DEFAULT_STATE_CAP)?;
    params.validate(spec)?;
    let values = series.values()?;
    let w = differenced_values(spec, series)?;
    let mean = if spec.with_intercept { params.intercept } else { 0.0 };
    let centered: Vec<f64> = w.iter().map(|v| v - mean).collect();
    let (ar, ma) = expand_polynomials(spec, params);
    let ss = ArmaStateSpace::new(&ar, &ma);
    let r = ss.dim();
    let out = kalman::filter_with_covariance(&ss, &[&centered])?;

    let mut state = out.next_state[0].clone();
    let mut cov = out.next_covariance.expect("requested covariance");
    let mut w_point = Vec::with_capacity(horizon);
    // First column of each step's error covariance; Cov(w_i, w_j) for j >= i
    // is the first entry of T^(j-i) applied to it.
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        w_point.push(mean + state[0]);
        columns.push((0..r).map(|i| cov[i * r]).collect());
        ss.advance_state(&mut state);
        cov = ss.advance_covariance(&cov);
    }
    let mut c = vec![0.0; horizon * horizon];
    for i in 0..horizon {
        let mut col = columns[i].clone();
        c[i * horizon + i] = col[0];
        for j in i + 1..horizon {
            ss.advance_state(&mut col);
            c[i * horizon + j] = col[0];
            c[j * horizon + i] = col[0];
        }
    }

    // y errors are xi-weighted sums of w errors, xi = coefficients of 1/delta(B).
    let delta = spec.differencing().polynomial();
    let mut xi = vec![0.0; horizon];
    xi[0] = 1.0;
    for k in 1..horizon {
        xi[k] = -(1..delta.len().min(k + 1))
            .map(|j| delta[j] * xi[k - j])
            .sum::<f64>();
    }
    let variance: Vec<f64> = (0..horizon)
        .map(|h| {
            let mut v = 0.0;
            for a in 0..=h {
                for b in 0..=h {
                    v += xi[h - a] * xi[h - b] * c[a * horizon + b];
                }
            }
            params.sigma2 * v.max(0.0)
        })
        .collect();

    let point = integrate_values(&values, &w_point, &spec.differencing())?;
    let half: Vec<f64> = variance.iter().map(|v| Z95 * v.sqrt()).collect();
    Ok(Forecast {
        start: series.end() + Days::new(1),
        lower: point.iter().zip(&half).map(|(p, h)| p - h).collect(),
        upper: point.iter().zip(&half).map(|(p, h)| p + h).collect(),
        point,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(values: Vec<f64>) -> TimeSeries {
        TimeSeries::from_values(NaiveDate::from_ymd_opt(2022, 3, 1).unwrap(), values).unwrap()
    }

    #[test]
    fn white_noise_is_flat() {
        let spec = SarimaSpec::arima(0, 0, 0);
        let params = SarimaParams::white_noise(100.0, 4.0);
        let f = forecast(&spec, &params, &ts(vec![98.0, 103.0, 99.0, 101.0]), 7).unwrap();
        assert!(f.point.iter().all(|&p| p == 100.0));
        assert!(f.variance.iter().all(|&v| (v - 4.0).abs() < 1e-12));
        assert!((f.upper[0] - (100.0 + Z95 * 2.0)).abs() < 1e-12);
        assert_eq!(f.start, NaiveDate::from_ymd_opt(2022, 3, 5).unwrap());
    }

    #[test]
    fn ar1_decays() {
        let spec = SarimaSpec::arima(1, 0, 0).intercept(false);
        let params = SarimaParams {
            phi: vec![0.5],
            ..SarimaParams::white_noise(0.0, 1.0)
        };
        let f = forecast(&spec, &params, &ts(vec![1.0, -2.0, 3.0, 10.0]), 3).unwrap();
        for (p, want) in f.point.iter().zip([5.0, 2.5, 1.25]) {
            assert!((p - want).abs() < 1e-12);
        }
        for (v, want) in f.variance.iter().zip([1.0, 1.25, 1.3125]) {
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn random_walk() {
        let spec = SarimaSpec::arima(0, 1, 0);
        let params = SarimaParams::white_noise(0.0, 2.0);
        let f = forecast(&spec, &params, &ts(vec![3.0, 4.0, 2.0, 7.0, 6.5]), 5).unwrap();
        for (h, (p, v)) in f.point.iter().zip(&f.variance).enumerate() {
            assert_eq!(*p, 6.5);
            assert!((v - 2.0 * (h + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn seasonal_ar_uses_only_seasonal_lags() {
        let spec = SarimaSpec::sarima(0, 0, 0, 2, 0, 0, 7);
        let params = SarimaParams {
            seasonal_phi: vec![0.5, 0.2],
            ..SarimaParams::white_noise(10.0, 1.0)
        };
        let base: Vec<f64> = (0..40).map(|i| 10.0 + ((i * 7919) % 13) as f64 / 3.0).collect();
        let f0 = forecast(&spec, &params, &ts(base.clone()), 1).unwrap();
        let mut poked = base.clone();
        for lag in [1usize, 2, 3, 6, 8, 13] {
            poked[40 - lag] += 5.0;
        }
        let f1 = forecast(&spec, &params, &ts(poked), 1).unwrap();
        assert!((f0.point[0] - f1.point[0]).abs() < 1e-9);
    }

    #[test]
    fn integrated_variance_grows() {
        let spec = SarimaSpec::sarima(1, 1, 1, 1, 1, 0, 7);
        let params = SarimaParams {
            phi: vec![0.3],
            theta: vec![-0.4],
            seasonal_phi: vec![0.2],
            ..SarimaParams::white_noise(0.0, 1.0)
        };
        let data: Vec<f64> = (0..60).map(|i| (i as f64 * 0.9).sin() * 5.0 + i as f64).collect();
        let f = forecast(&spec, &params, &ts(data), 30).unwrap();
        assert!(f.variance.windows(2).all(|v| v[1] >= v[0]));
        assert!(f.lower.iter().zip(&f.point).all(|(l, p)| l <= p));
    }

    #[test]
    fn horizon_bounds() {
        let spec = SarimaSpec::arima(0, 0, 0);
        let p = SarimaParams::white_noise(0.0, 1.0);
        let s = ts(vec![1.0, 2.0, 3.0]);
        assert!(forecast(&spec, &p, &s, 0).is_err());
        assert!(forecast(&spec, &p, &s, 366).is_err());
        assert!(forecast(&spec, &p, &s, 365).is_ok());
    }
}
