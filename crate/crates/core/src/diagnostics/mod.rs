//! Stationarity and correlation-structure diagnostics.

pub mod correlogram;
pub mod mackinnon;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::series::{difference_values, DifferenceSpec, TimeSeries};

pub use correlogram::{acf, autocovariance, durbin_levinson, pacf, CorrelogramKind, CorrelogramResult};

/// Deterministic terms in the unit-root regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdfRegression {
    None,
    #[default]
    Constant,
    ConstantTrend,
}

impl AdfRegression {
    fn n_trend(&self) -> usize {
        match self {
            AdfRegression::None => 0,
            AdfRegression::Constant => 1,
            AdfRegression::ConstantTrend => 2,
        }
    }
}

impl fmt::Display for AdfRegression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdfRegression::None => "n",
            AdfRegression::Constant => "c",
            AdfRegression::ConstantTrend => "ct",
        })
    }
}

impl FromStr for AdfRegression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" | "none" => Ok(AdfRegression::None),
            "c" | "constant" => Ok(AdfRegression::Constant),
            "ct" | "trend" => Ok(AdfRegression::ConstantTrend),
            _ => Err(Error::InvalidArgument(format!("unknown regression '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdfResult {
    pub statistic: f64,
    pub p_value: f64,
    /// True when the statistic was outside the tabulated range and the
    /// p-value was clamped.
    pub p_clamped: bool,
    pub used_lags: usize,
    pub n_effective: usize,
    pub regression: AdfRegression,
    /// 1%, 5%, 10%.
    pub critical_values: [f64; 3],
}

impl AdfResult {
    pub fn rejects_unit_root(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Minimum series length accepted by [`adf_test`].
pub const ADF_MIN_LEN: usize = 20;

/// Default maximum lag `floor(12 (n/100)^(1/4))`.
pub fn schwert_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Builds the regression of `diff[t]` on the lagged level, `lags` lagged
/// differences and trend terms, using rows `first..` of the difference
/// series.
fn adf_design(
    x: &[f64],
    diff: &[f64],
    lags: usize,
    first: usize,
    regression: AdfRegression,
) -> (DMatrix<f64>, DVector<f64>) {
    let rows = diff.len() - first;
    let cols = 1 + lags + regression.n_trend();
    let mut design = DMatrix::zeros(rows, cols);
    let mut y = DVector::zeros(rows);
    for (row, t) in (first..diff.len()).enumerate() {
        y[row] = diff[t];
        design[(row, 0)] = x[t];
        for k in 1..=lags {
            design[(row, k)] = diff[t - k];
        }
        if regression.n_trend() >= 1 {
            design[(row, 1 + lags)] = 1.0;
        }
        if regression.n_trend() == 2 {
            design[(row, 2 + lags)] = (row + 1) as f64;
        }
    }
    (design, y)
}

/// Augmented Dickey–Fuller test on a gap-free series.
pub fn adf_test(
    series: &TimeSeries,
    regression: AdfRegression,
    max_lag: Option<usize>,
) -> Result<AdfResult> {
    adf_values(&series.values()?, regression, max_lag)
}

/// [`adf_test`] on a plain slice.
///
/// The lag order minimizes AIC over `0..=max_lag`, all candidates being fit
/// on the common sample; the chosen lag is then refit on the longest
/// sample it allows.
pub fn adf_values(x: &[f64], regression: AdfRegression, max_lag: Option<usize>) -> Result<AdfResult> {
    let n = x.len();
    if n < ADF_MIN_LEN {
        return Err(Error::TooShort {
            needed: ADF_MIN_LEN - 1,
            have: n,
        });
    }
    let cap = (n / 2).saturating_sub(regression.n_trend() + 1);
    let max_lag = max_lag.unwrap_or_else(|| schwert_max_lag(n)).min(cap);
    let diff: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();

    let mut best: Option<(f64, usize)> = None;
    for lags in 0..=max_lag {
        let (design, y) = adf_design(x, &diff, lags, max_lag, regression);
        let fit = match ols(&design, &y) {
            Ok(f) => f,
            Err(Error::Singular(_)) => continue,
            Err(e) => return Err(e),
        };
        let aic = fit.aic();
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, lags));
        }
    }
    let (_, used_lags) = best.ok_or(Error::Singular("ADF regression"))?;

    let (design, y) = adf_design(x, &diff, used_lags, used_lags, regression);
    let fit = ols(&design, &y)?;
    let statistic = fit.t_value(0);
    if !statistic.is_finite() {
        return Err(Error::Singular("ADF regression"));
    }
    let (p_value, p_clamped) = mackinnon::p_value(statistic, regression);
    let n_effective = y.len();
    Ok(AdfResult {
        statistic,
        p_value,
        p_clamped,
        used_lags,
        n_effective,
        regression,
        critical_values: mackinnon::critical_values(regression, n_effective),
    })
}

/// ADF outcome for one regular differencing order.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferencingStep {
    pub d: usize,
    pub adf: AdfResult,
    pub lag1_acf: f64,
    /// p-value underflowed the tabulated range, or the lag-1 ACF fell below -0.5.
    pub over_differencing_risk: bool,
}

/// Result of [`recommend_differencing`].
#[derive(Debug, Clone, PartialEq)]
pub struct DifferencingAdvice {
    pub spec: DifferenceSpec,
    pub over_differenced: bool,
    pub steps: Vec<DifferencingStep>,
    /// Lag-7 autocorrelation of the recommended series; informational only.
    pub weekly_acf: Option<f64>,
}

pub const RECOMMEND_MIN_LEN: usize = 50;

/// ADF at differencing orders `0..=max_d` without stopping early.
pub fn differencing_table(
    x: &[f64],
    regression: AdfRegression,
    max_d: usize,
) -> Result<Vec<DifferencingStep>> {
    (0..=max_d)
        .map(|d| {
            let w = difference_values(x, &DifferenceSpec::regular(d))?;
            let adf = adf_values(&w, regression, None)?;
            let lag1_acf = correlogram::acf_values(&w, 1)?.values[0];
            let over_differencing_risk = d > 0 && (adf.p_clamped && adf.statistic < 0.0 || lag1_acf < -0.5);
            Ok(DifferencingStep {
                d,
                adf,
                lag1_acf,
                over_differencing_risk,
            })
        })
        .collect()
}

/// Smallest `d` in `0..=2` whose differenced series rejects a unit root at 5%.
pub fn recommend_differencing(series: &TimeSeries) -> Result<DifferencingAdvice> {
    let x = series.values()?;
    if x.len() < RECOMMEND_MIN_LEN {
        return Err(Error::TooShort {
            needed: RECOMMEND_MIN_LEN - 1,
            have: x.len(),
        });
    }
    let mut steps = Vec::new();
    for d in 0..=2 {
        let mut table = differencing_table(&x, AdfRegression::Constant, d)?;
        let step = table.pop().expect("non-empty table");
        let rejects = step.adf.rejects_unit_root(0.05);
        steps.push(step);
        if rejects {
            let w = difference_values(&x, &DifferenceSpec::regular(d))?;
            let weekly_acf = correlogram::acf_values(&w, 7).ok().map(|r| r.values[6]);
            let over_differenced = steps.last().is_some_and(|s| s.lag1_acf < -0.5);
            return Ok(DifferencingAdvice {
                spec: DifferenceSpec::regular(d),
                over_differenced,
                steps,
                weekly_acf,
            });
        }
    }
    Err(Error::Numerical(
        "no differencing order up to 2 rejects a unit root".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Deterministic pseudo-random sequence for fixtures.
    fn noise(n: usize, seed: u64) -> Vec<f64> {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            adf_values(&[1.0; 10], AdfRegression::Constant, None),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn lag_bookkeeping() {
        let x: Vec<f64> = noise(300, 3).iter().scan(0.0, |s, e| {
            *s = 0.5 * *s + e;
            Some(*s)
        }).collect();
        let r = adf_values(&x, AdfRegression::Constant, Some(6)).unwrap();
        assert!(r.used_lags <= 6);
        assert_eq!(r.n_effective, x.len() - r.used_lags - 1);
        assert!((0.0..=1.0).contains(&r.p_value));
        assert!(r.critical_values[0] < r.critical_values[1]);
    }

    #[test]
    fn schwert_rule() {
        assert_eq!(schwert_max_lag(100), 12);
        assert_eq!(schwert_max_lag(500), 17);
        assert_eq!(schwert_max_lag(3640), 29);
    }

    #[test]
    fn affine_invariance() {
        let x: Vec<f64> = noise(250, 11).iter().scan(0.0, |s, e| {
            *s = 0.8 * *s + e;
            Some(*s)
        }).collect();
        let y: Vec<f64> = x.iter().map(|v| 250.0 * v + 4000.0).collect();
        for reg in [AdfRegression::Constant, AdfRegression::ConstantTrend] {
            let a = adf_values(&x, reg, None).unwrap();
            let b = adf_values(&y, reg, None).unwrap();
            assert_eq!(a.used_lags, b.used_lags);
            assert!((a.statistic - b.statistic).abs() < 1e-9);
        }
    }

    #[test]
    fn recommends_levels_for_stationary_and_one_for_walk() {
        let e = noise(500, 5);
        let ar: Vec<f64> = e.iter().scan(0.0, |s, v| {
            *s = 0.5 * *s + v;
            Some(*s)
        }).collect();
        let walk: Vec<f64> = e.iter().scan(0.0, |s, v| {
            *s += v;
            Some(*s)
        }).collect();
        let start = chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let rec = recommend_differencing(&TimeSeries::from_values(start, ar).unwrap()).unwrap();
        assert_eq!(rec.spec.d, 0);
        let rec = recommend_differencing(&TimeSeries::from_values(start, walk).unwrap()).unwrap();
        assert_eq!(rec.spec.d, 1);
        assert_eq!(rec.steps.len(), 2);
    }
}
