//! ARMA / ARIMA / SARIMA estimation, forecasting and simulation.
//!
//! Models follow the multiplicative form
//!
//! ```text
//! phi(B) Phi(B^s) (1-B)^d (1-B^s)^D (y_t - ...) = theta(B) Theta(B^s) e_t
//! ```
//!
//! The series is differenced first; the differenced series `w_t` is then a
//! stationary ARMA with mean `intercept` (only when `with_intercept`), whose
//! exact Gaussian likelihood is computed with a Kalman filter started from
//! the stationary state covariance.

pub mod fit;
pub mod forecast;
pub mod kalman;
pub mod lyapunov;
pub mod model_file;
pub mod polynomial;
pub mod simulate;
pub mod transform;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::series::{difference_values, DifferenceSpec, TimeSeries};

pub use fit::{fit, fit_with, FitOptions, SarimaFit};
pub use forecast::{forecast, Forecast};
pub use model_file::{read_model, write_model, SavedModel};
pub use simulate::simulate;

/// Largest expanded AR or MA degree accepted by default.
pub const DEFAULT_STATE_CAP: usize = 70;

/// Model order `(p,d,q)(P,D,Q,s)` plus the intercept flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SarimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal_p: usize,
    pub seasonal_d: usize,
    pub seasonal_q: usize,
    pub period: usize,
    pub with_intercept: bool,
}

impl SarimaSpec {
    /// Non-seasonal ARIMA; intercept on when `d == 0`.
    pub fn arima(p: usize, d: usize, q: usize) -> Self {
        Self::sarima(p, d, q, 0, 0, 0, 1)
    }

    /// Seasonal ARIMA; intercept on when `d + D == 0`.
    pub fn sarima(
        p: usize,
        d: usize,
        q: usize,
        seasonal_p: usize,
        seasonal_d: usize,
        seasonal_q: usize,
        period: usize,
    ) -> Self {
        Self {
            p,
            d,
            q,
            seasonal_p,
            seasonal_d,
            seasonal_q,
            period,
            with_intercept: d + seasonal_d == 0,
        }
    }

    pub fn intercept(mut self, on: bool) -> Self {
        self.with_intercept = on;
        self
    }

    pub fn validate(&self, state_cap: usize) -> Result<()> {
        if self.period == 0 {
            return Err(Error::InvalidArgument("seasonal period must be >= 1".into()));
        }
        if self.is_seasonal() && self.period < 2 {
            return Err(Error::InvalidArgument(
                "seasonal terms need a period >= 2".into(),
            ));
        }
        self.differencing().validate()?;
        if self.ar_degree() > state_cap || self.ma_degree() > state_cap {
            return Err(Error::InvalidArgument(format!(
                "{self}: expanded degree {} / {} exceeds cap {state_cap}",
                self.ar_degree(),
                self.ma_degree()
            )));
        }
        Ok(())
    }

    pub fn is_seasonal(&self) -> bool {
        self.seasonal_p + self.seasonal_d + self.seasonal_q > 0
    }

    pub fn has_seasonal_arma(&self) -> bool {
        self.seasonal_p + self.seasonal_q > 0
    }

    pub fn differencing(&self) -> DifferenceSpec {
        DifferenceSpec {
            d: self.d,
            seasonal_d: self.seasonal_d,
            period: self.period,
        }
    }

    /// Degree of `phi(B) Phi(B^s)`.
    pub fn ar_degree(&self) -> usize {
        self.p + self.seasonal_p * self.period
    }

    /// Degree of `theta(B) Theta(B^s)`.
    pub fn ma_degree(&self) -> usize {
        self.q + self.seasonal_q * self.period
    }

    pub fn state_dim(&self) -> usize {
        self.ar_degree().max(self.ma_degree() + 1)
    }

    pub fn n_coefficients(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    /// Parameter count used by the information criteria: coefficients,
    /// intercept if present, and the innovation variance.
    pub fn n_params(&self) -> usize {
        self.n_coefficients() + usize::from(self.with_intercept) + 1
    }

    /// `"p,d,q"`.
    pub fn order_label(&self) -> String {
        format!("{},{},{}", self.p, self.d, self.q)
    }

    /// Suffix flagging an intercept setting that differs from the default
    /// for this differencing order; empty otherwise.
    pub fn mean_note(&self) -> &'static str {
        match (self.with_intercept, self.d + self.seasonal_d == 0) {
            (true, false) => " +mean",
            (false, true) => " zero-mean",
            _ => "",
        }
    }

    /// `"P,D,Q,s"`.
    pub fn seasonal_label(&self) -> String {
        format!(
            "{},{},{},{}",
            self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period
        )
    }
}

impl fmt::Display for SarimaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.order_label())?;
        if self.is_seasonal() {
            write!(f, "({})", self.seasonal_label())?;
        }
        f.write_str(self.mean_note())
    }
}

impl FromStr for SarimaSpec {
    type Err = Error;

    /// Parses `p,d,q` or `p,d,q,P,D,Q,s`; parentheses and spaces are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s
            .chars()
            .map(|c| if c == '(' || c == ')' { ',' } else { c })
            .filter(|c| !c.is_whitespace())
            .collect();
        let parts: Vec<&str> = cleaned.split(',').filter(|p| !p.is_empty()).collect();
        let nums: Vec<usize> = parts
            .iter()
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad order '{s}'")))
            })
            .collect::<Result<_>>()?;
        let spec = match nums[..] {
            [p, d, q] => SarimaSpec::arima(p, d, q),
            [p, d, q, sp, sd, sq, period] => SarimaSpec::sarima(p, d, q, sp, sd, sq, period),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "order '{s}' must have 3 or 7 fields"
                )))
            }
        };
        spec.validate(DEFAULT_STATE_CAP)?;
        Ok(spec)
    }
}

/// Model coefficients.
///
/// `intercept` is the mean of the differenced series. For an undifferenced
/// model the constant of the difference equation is
/// `intercept * (1 - sum of expanded AR coefficients)`, see
/// [`SarimaParams::constant`].
#[derive(Debug, Clone, PartialEq)]
pub struct SarimaParams {
    pub intercept: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
    pub sigma2: f64,
}

impl SarimaParams {
    pub fn white_noise(intercept: f64, sigma2: f64) -> Self {
        Self {
            intercept,
            phi: Vec::new(),
            theta: Vec::new(),
            seasonal_phi: Vec::new(),
            seasonal_theta: Vec::new(),
            sigma2,
        }
    }

    /// Checks dimensions, variance, stationarity and invertibility.
    pub fn validate(&self, spec: &SarimaSpec) -> Result<()> {
        let dims = [
            (self.phi.len(), spec.p, "phi"),
            (self.theta.len(), spec.q, "theta"),
            (self.seasonal_phi.len(), spec.seasonal_p, "seasonal phi"),
            (self.seasonal_theta.len(), spec.seasonal_q, "seasonal theta"),
        ];
        for (have, want, name) in dims {
            if have != want {
                return Err(Error::InvalidArgument(format!(
                    "{name}: {have} coefficients for order {want}"
                )));
            }
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma2 = {}", self.sigma2)));
        }
        if !self.intercept.is_finite() {
            return Err(Error::InvalidArgument("non-finite intercept".into()));
        }
        // A product of polynomials is stationary iff each factor is.
        if !transform::is_stationary(&self.phi) || !transform::is_stationary(&self.seasonal_phi) {
            return Err(Error::NotStationary);
        }
        if !transform::is_invertible(&self.theta) || !transform::is_invertible(&self.seasonal_theta)
        {
            return Err(Error::NotStationary);
        }
        Ok(())
    }

    /// Constant `c` of `y_t = c + sum a_j y_{t-j} + ...` on the differenced scale.
    pub fn constant(&self, spec: &SarimaSpec) -> f64 {
        let (ar, _) = expand_polynomials(spec, self);
        self.intercept * (1.0 - ar.iter().sum::<f64>())
    }
}

/// Expanded AR and MA lag coefficients (index 0 = lag 1).
pub fn expand_polynomials(spec: &SarimaSpec, params: &SarimaParams) -> (Vec<f64>, Vec<f64>) {
    (
        polynomial::expand_ar(&params.phi, &params.seasonal_phi, spec.period),
        polynomial::expand_ma(&params.theta, &params.seasonal_theta, spec.period),
    )
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn differenced_values(spec: &SarimaSpec, series: &TimeSeries) -> Result<Vec<f64>> {
    let values = series.values()?;
    let w = difference_values(&values, &spec.differencing())?;
    let needed = spec.ar_degree().max(spec.ma_degree()) + 1;
    if w.len() <= needed {
        return Err(Error::TooShort {
            needed: needed + spec.differencing().lag_count(),
            have: values.len(),
        });
    }
    Ok(w)
}

/// Exact Gaussian log-likelihood (nats) of `series` under fixed parameters.
pub fn log_likelihood(spec: &SarimaSpec, params: &SarimaParams, series: &TimeSeries) -> Result<f64> {
    spec.validate(DEFAULT_STATE_CAP)?;
    params.validate(spec)?;
    let w = differenced_values(spec, series)?;
    let mean = if spec.with_intercept { params.intercept } else { 0.0 };
    let centered: Vec<f64> = w.iter().map(|v| v - mean).collect();
    let (ar, ma) = expand_polynomials(spec, params);
    let ss = kalman::ArmaStateSpace::new(&ar, &ma);
    let out = kalman::filter(&ss, &[&centered])?;
    let ll: f64 = out.innovations[0]
        .iter()
        .zip(&out.variances)
        .map(|(v, f)| {
            let var = params.sigma2 * f;
            -0.5 * (LN_2PI + var.ln() + v * v / var)
        })
        .sum();
    if ll.is_finite() {
        Ok(ll)
    } else {
        Err(Error::Numerical("non-finite log-likelihood".into()))
    }
}
