use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelogramKind {
    Acf,
    Pacf,
}

impl CorrelogramKind {
    pub fn name(&self) -> &'static str {
        match self {
            CorrelogramKind::Acf => "acf",
            CorrelogramKind::Pacf => "pacf",
        }
    }
}

/// Correlations at lags `1..=values.len()` with a white-noise band.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelogramResult {
    pub kind: CorrelogramKind,
    pub values: Vec<f64>,
    /// Half-width `1.96 / sqrt(n)` of the 95% band.
    pub band: f64,
}

/// Biased sample autocovariances `gamma(0..=max_lag)`.
pub fn autocovariance(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|k| {
            centered[..n - k]
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Durbin–Levinson output for orders `1..=order`.
#[derive(Debug, Clone)]
pub struct Levinson {
    pub partials: Vec<f64>,
    /// AR coefficients of the highest order.
    pub coefficients: Vec<f64>,
    /// One-step prediction error variance of the highest order.
    pub error_variance: f64,
}

/// Solves the Yule–Walker equations recursively from autocovariances
/// `acov[0..=order]`.
pub fn durbin_levinson(acov: &[f64], order: usize) -> Result<Levinson> {
    if acov.len() <= order {
        return Err(Error::InvalidArgument(format!(
            "need {} autocovariances, have {}",
            order + 1,
            acov.len()
        )));
    }
    if !(acov[0] > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let mut phi: Vec<f64> = Vec::with_capacity(order);
    let mut prev = Vec::with_capacity(order);
    let mut partials = Vec::with_capacity(order);
    let mut v = acov[0];
    for k in 1..=order {
        let num = acov[k] - phi.iter().enumerate().map(|(j, a)| a * acov[k - 1 - j]).sum::<f64>();
        let r = num / v;
        if !(r.abs() < 1.0) || !r.is_finite() {
            return Err(Error::Numerical(format!(
                "Durbin–Levinson breakdown at lag {k}"
            )));
        }
        prev.clear();
        prev.extend_from_slice(&phi);
        for j in 0..k - 1 {
            phi[j] = prev[j] - r * prev[k - 2 - j];
        }
        phi.push(r);
        partials.push(r);
        v *= 1.0 - r * r;
    }
    Ok(Levinson {
        partials,
        coefficients: phi,
        error_variance: v,
    })
}

fn checked_values(series: &TimeSeries, max_lag: usize) -> Result<Vec<f64>> {
    let x = series.values()?;
    if max_lag >= x.len() {
        return Err(Error::TooShort {
            needed: max_lag,
            have: x.len(),
        });
    }
    Ok(x)
}

/// Sample autocorrelation with the biased `1/n` convention.
pub fn acf(series: &TimeSeries, max_lag: usize) -> Result<CorrelogramResult> {
    let x = checked_values(series, max_lag)?;
    acf_values(&x, max_lag)
}

pub fn acf_values(x: &[f64], max_lag: usize) -> Result<CorrelogramResult> {
    let acov = autocovariance(x, max_lag);
    if !(acov[0] > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(CorrelogramResult {
        kind: CorrelogramKind::Acf,
        values: acov[1..].iter().map(|g| g / acov[0]).collect(),
        band: 1.96 / (x.len() as f64).sqrt(),
    })
}

/// Partial autocorrelation via Durbin–Levinson on the sample ACF.
pub fn pacf(series: &TimeSeries, max_lag: usize) -> Result<CorrelogramResult> {
    let x = checked_values(series, max_lag)?;
    if 2 * max_lag > x.len() {
        return Err(Error::TooShort {
            needed: 2 * max_lag,
            have: x.len(),
        });
    }
    pacf_values(&x, max_lag)
}

pub fn pacf_values(x: &[f64], max_lag: usize) -> Result<CorrelogramResult> {
    let acov = autocovariance(x, max_lag);
    let lev = durbin_levinson(&acov, max_lag)?;
    Ok(CorrelogramResult {
        kind: CorrelogramKind::Pacf,
        values: lev.partials,
        band: 1.96 / (x.len() as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn ts(values: Vec<f64>) -> TimeSeries {
        TimeSeries::from_values(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), values).unwrap()
    }

    #[test]
    fn alternating_series() {
        let x: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.0 } else { 2.0 }).collect();
        let r = acf(&ts(x), 2).unwrap();
        assert!((r.values[0] + 1.0).abs() < 0.01);
        assert!((r.values[1] - 1.0).abs() < 0.02);
    }

    #[test]
    fn lag_one_agrees() {
        let x: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let a = acf(&ts(x.clone()), 5).unwrap();
        let p = pacf(&ts(x), 5).unwrap();
        assert_eq!(a.values[0], p.values[0]);
        assert!(a.values.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(acf(&ts(vec![3.0; 10]), 2), Err(Error::ZeroVariance)));
        assert!(acf(&ts(vec![1.0, 2.0, 3.0]), 3).is_err());
        assert!(pacf(&ts(vec![1.0, 2.0, 4.0, 3.0]), 3).is_err());
        let gappy = TimeSeries::new(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), vec![Some(1.0), None])
            .unwrap();
        assert!(matches!(acf(&gappy, 1), Err(Error::MissingValues)));
    }

    #[test]
    fn levinson_ar2_population() {
        // AR(2) with phi = (0.5, 0.3): rho1 = phi1 / (1 - phi2), rho2 = phi1 rho1 + phi2
        let rho1 = 0.5 / 0.7;
        let rho2 = 0.5 * rho1 + 0.3;
        let rho3 = 0.5 * rho2 + 0.3 * rho1;
        let lev = durbin_levinson(&[1.0, rho1, rho2, rho3], 3).unwrap();
        assert!((lev.coefficients[0] - 0.5).abs() < 1e-12);
        assert!((lev.coefficients[1] - 0.3).abs() < 1e-12);
        assert!(lev.partials[2].abs() < 1e-12);
    }
}
