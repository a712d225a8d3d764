//! Maximum-likelihood fitting.
//!
//! The objective is the exact Kalman likelihood of the differenced series
//! with both the innovation variance and (when present) the mean profiled
//! out in closed form. Coefficient blocks are optimized in the
//! unconstrained partial-autocorrelation space of [`super::transform`], so
//! every trial point is stationary and invertible.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::kalman::{self, ArmaStateSpace};
use super::{
    differenced_values, polynomial, transform, SarimaParams, SarimaSpec, DEFAULT_STATE_CAP, LN_2PI,
};
use crate::diagnostics::correlogram::{autocovariance, durbin_levinson};
use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadConfig};
use crate::series::TimeSeries;

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub state_cap: usize,
    pub optimizer: NelderMeadConfig,
    /// Extra simplex runs started from perturbations of the best point.
    pub restarts: usize,
    /// Standard deviation of the restart perturbation in unconstrained space.
    pub restart_scale: f64,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            state_cap: DEFAULT_STATE_CAP,
            optimizer: NelderMeadConfig::default(),
            restarts: 3,
            restart_scale: 0.1,
            seed: 0x5eed,
        }
    }
}

/// A fitted model.
#[derive(Debug, Clone)]
pub struct SarimaFit {
    pub spec: SarimaSpec,
    pub params: SarimaParams,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    /// One-step innovations on the differenced scale, in data units.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub n_obs: usize,
    pub evaluations: usize,
}

impl SarimaFit {
    /// One-step in-sample predictions on the original scale for every
    /// observation after the differencing burn-in.
    pub fn fitted_values(&self, series: &TimeSeries) -> Result<Vec<f64>> {
        let values = series.values()?;
        let lags = self.spec.differencing().lag_count();
        if values.len() != self.n_obs + lags {
            return Err(Error::LengthMismatch(values.len(), self.n_obs + lags));
        }
        Ok(values[lags..]
            .iter()
            .zip(&self.residuals)
            .map(|(y, e)| y - e)
            .collect())
    }

    pub fn forecast(&self, series: &TimeSeries, horizon: usize) -> Result<super::Forecast> {
        super::forecast(&self.spec, &self.params, series, horizon)
    }
}

/// `2k - 2 loglik` and `k ln(n) - 2 loglik`.
pub fn information_criteria(spec: &SarimaSpec, loglik: f64, n_obs: usize) -> (f64, f64) {
    let k = spec.n_params() as f64;
    (2.0 * k - 2.0 * loglik, k * (n_obs as f64).ln() - 2.0 * loglik)
}

/// Profiled likelihood at given expanded polynomials.
struct Profile {
    loglik: f64,
    sigma2: f64,
    mean: f64,
    residuals: Vec<f64>,
}

fn profile(ar: &[f64], ma: &[f64], w: &[f64], with_mean: bool) -> Result<Profile> {
    let ss = ArmaStateSpace::new(ar, ma);
    let n = w.len() as f64;
    let ones = vec![1.0; w.len()];
    let columns: Vec<&[f64]> = if with_mean { vec![w, &ones] } else { vec![w] };
    let out = kalman::filter(&ss, &columns)?;
    let mean = if with_mean {
        let (mut num, mut den) = (0.0, 0.0);
        for ((vy, vx), f) in out.innovations[0].iter().zip(&out.innovations[1]).zip(&out.variances) {
            num += vy * vx / f;
            den += vx * vx / f;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    } else {
        0.0
    };
    let residuals: Vec<f64> = if with_mean {
        out.innovations[0]
            .iter()
            .zip(&out.innovations[1])
            .map(|(vy, vx)| vy - mean * vx)
            .collect()
    } else {
        out.innovations[0].clone()
    };
    let mut weighted = 0.0;
    let mut log_det = 0.0;
    for (v, f) in residuals.iter().zip(&out.variances) {
        weighted += v * v / f;
        log_det += f.ln();
    }
    let sigma2 = weighted / n;
    let loglik = -0.5 * n * (LN_2PI + sigma2.ln() + 1.0) - 0.5 * log_det;
    if !loglik.is_finite() || !(sigma2 > 0.0) {
        return Err(Error::Numerical("non-finite profiled likelihood".into()));
    }
    Ok(Profile {
        loglik,
        sigma2,
        mean,
        residuals,
    })
}

/// Coefficient blocks in optimizer order: phi, seasonal phi, theta, seasonal theta.
struct Blocks {
    phi: Vec<f64>,
    seasonal_phi: Vec<f64>,
    theta: Vec<f64>,
    seasonal_theta: Vec<f64>,
}

impl Blocks {
    fn from_unconstrained(spec: &SarimaSpec, u: &[f64]) -> Self {
        let (a, rest) = u.split_at(spec.p);
        let (b, rest) = rest.split_at(spec.seasonal_p);
        let (c, e) = rest.split_at(spec.q);
        Blocks {
            phi: transform::constrain_ar(a),
            seasonal_phi: transform::constrain_ar(b),
            theta: transform::constrain_ma(c),
            seasonal_theta: transform::constrain_ma(e),
        }
    }

    fn to_unconstrained(&self) -> Result<Vec<f64>> {
        let mut u = transform::unconstrain_ar(&self.phi)?;
        u.extend(transform::unconstrain_ar(&self.seasonal_phi)?);
        u.extend(transform::unconstrain_ma(&self.theta)?);
        u.extend(transform::unconstrain_ma(&self.seasonal_theta)?);
        Ok(u)
    }

    fn expanded(&self, period: usize) -> (Vec<f64>, Vec<f64>) {
        (
            polynomial::expand_ar(&self.phi, &self.seasonal_phi, period),
            polynomial::expand_ma(&self.theta, &self.seasonal_theta, period),
        )
    }
}

/// Shrinks a block toward zero until it satisfies `valid`.
fn make_valid(mut coeffs: Vec<f64>, valid: fn(&[f64]) -> bool) -> Vec<f64> {
    for _ in 0..60 {
        if coeffs.iter().all(|c| c.is_finite()) && valid(&coeffs) {
            return coeffs;
        }
        coeffs.iter_mut().for_each(|c| *c *= 0.85);
    }
    vec![0.0; coeffs.len()]
}

/// Hannan–Rissanen starting values: a long autoregression supplies
/// residual estimates, then one least-squares regression on the model's own
/// AR lags and residual lags. Seasonal cross terms are ignored.
fn hannan_rissanen(spec: &SarimaSpec, w: &[f64]) -> Blocks {
    let zeros = || Blocks {
        phi: vec![0.0; spec.p],
        seasonal_phi: vec![0.0; spec.seasonal_p],
        theta: vec![0.0; spec.q],
        seasonal_theta: vec![0.0; spec.seasonal_q],
    };
    let n = w.len();
    let mean = w.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = w.iter().map(|v| v - mean).collect();

    let has_ma = spec.q + spec.seasonal_q > 0;
    let long_order = (spec.ar_degree().max(spec.ma_degree()) + 10)
        .max(20)
        .min(n / 4);
    let resid = if has_ma && long_order > 0 {
        let acov = autocovariance(&x, long_order);
        match durbin_levinson(&acov, long_order) {
            Ok(lev) => {
                let mut e = vec![0.0; n];
                for t in long_order..n {
                    e[t] = x[t]
                        - lev
                            .coefficients
                            .iter()
                            .enumerate()
                            .map(|(j, a)| a * x[t - 1 - j])
                            .sum::<f64>();
                }
                Some(e)
            }
            Err(_) => None,
        }
    } else {
        None
    };
    if has_ma && resid.is_none() {
        return zeros();
    }

    let mut lags: Vec<(bool, usize)> = Vec::new();
    lags.extend((1..=spec.p).map(|l| (false, l)));
    lags.extend((1..=spec.seasonal_p).map(|k| (false, k * spec.period)));
    lags.extend((1..=spec.q).map(|l| (true, l)));
    lags.extend((1..=spec.seasonal_q).map(|k| (true, k * spec.period)));
    if lags.is_empty() {
        return zeros();
    }
    let max_lag = lags.iter().map(|l| l.1).max().unwrap_or(0);
    let first = max_lag + if has_ma { long_order } else { 0 };
    if n <= first + lags.len() + 1 {
        return zeros();
    }
    let rows = n - first;
    let design = DMatrix::from_fn(rows, lags.len(), |r, c| {
        let t = first + r;
        let (is_resid, lag) = lags[c];
        match (&resid, is_resid) {
            (Some(e), true) => e[t - lag],
            _ => x[t - lag],
        }
    });
    let target = DVector::from_fn(rows, |r, _| x[first + r]);
    let beta = match design.clone().svd(true, true).solve(&target, 1e-10) {
        Ok(b) => b,
        Err(_) => return zeros(),
    };
    let b: Vec<f64> = beta.iter().copied().collect();
    let (phi, rest) = b.split_at(spec.p);
    let (sphi, rest) = rest.split_at(spec.seasonal_p);
    let (theta, stheta) = rest.split_at(spec.q);
    Blocks {
        phi: make_valid(phi.to_vec(), transform::is_stationary),
        seasonal_phi: make_valid(sphi.to_vec(), transform::is_stationary),
        theta: make_valid(theta.to_vec(), transform::is_invertible),
        seasonal_theta: make_valid(stheta.to_vec(), transform::is_invertible),
    }
}

/// Fits `spec` by exact maximum likelihood with default options.
pub fn fit(spec: &SarimaSpec, series: &TimeSeries) -> Result<SarimaFit> {
    fit_with(spec, series, &FitOptions::default())
}

pub fn fit_with(spec: &SarimaSpec, series: &TimeSeries, options: &FitOptions) -> Result<SarimaFit> {
    spec.validate(options.state_cap)?;
    let w = differenced_values(spec, series)?;
    let n_obs = w.len();
    if n_obs < 10 * spec.n_params() {
        log::warn!(
            "{spec}: {n_obs} observations for {} parameters",
            spec.n_params()
        );
    }
    let period = spec.period;
    let with_mean = spec.with_intercept;

    let objective = |u: &[f64]| -> f64 {
        let blocks = Blocks::from_unconstrained(spec, u);
        let (ar, ma) = blocks.expanded(period);
        match profile(&ar, &ma, &w, with_mean) {
            Ok(p) => -p.loglik,
            Err(_) => f64::INFINITY,
        }
    };

    let start = hannan_rissanen(spec, &w)
        .to_unconstrained()
        .unwrap_or_else(|_| vec![0.0; spec.n_coefficients()]);
    let start: Vec<f64> = start.into_iter().map(|v| v.clamp(-3.0, 3.0)).collect();

    let mut best = nelder_mead(objective, &start, &options.optimizer);
    let mut evaluations = best.evaluations;
    let mut converged = best.converged;
    if spec.n_coefficients() > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        let jitter = Normal::new(0.0, options.restart_scale)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for _ in 0..options.restarts {
            let from: Vec<f64> = best.x.iter().map(|v| v + jitter.sample(&mut rng)).collect();
            let run = nelder_mead(objective, &from, &options.optimizer);
            evaluations += run.evaluations;
            if run.value < best.value {
                converged = run.converged;
                best = run;
            } else if run.value == best.value {
                converged |= run.converged;
            }
        }
    }
    if !best.value.is_finite() {
        return Err(Error::Numerical(format!(
            "{spec}: likelihood not finite at any start"
        )));
    }

    let blocks = Blocks::from_unconstrained(spec, &best.x);
    let (ar, ma) = blocks.expanded(period);
    let prof = profile(&ar, &ma, &w, with_mean)?;
    let params = SarimaParams {
        intercept: prof.mean,
        phi: blocks.phi,
        theta: blocks.theta,
        seasonal_phi: blocks.seasonal_phi,
        seasonal_theta: blocks.seasonal_theta,
        sigma2: prof.sigma2,
    };
    let (aic, bic) = information_criteria(spec, prof.loglik, n_obs);
    Ok(SarimaFit {
        spec: *spec,
        params,
        loglik: prof.loglik,
        aic,
        bic,
        residuals: prof.residuals,
        converged,
        n_obs,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{log_likelihood, simulate};

    #[test]
    fn white_noise_fit_is_closed_form() {
        let values = vec![3.0, 5.0, 4.0, 8.0, 6.0, 7.0, 2.0, 5.0, 4.0, 6.0, 5.0, 4.0];
        let s = TimeSeries::from_values(chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), values.clone()).unwrap();
        let f = fit(&SarimaSpec::arima(0, 0, 0), &s).unwrap();
        let mean = values.iter().sum::<f64>() / 12.0;
        assert!((f.params.intercept - mean).abs() < 1e-12);
        for (r, v) in f.residuals.iter().zip(&values) {
            assert!((r - (v - mean)).abs() < 1e-12);
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 12.0;
        assert!((f.params.sigma2 - var).abs() < 1e-12);
        assert!(f.converged);
        let k = 2.0;
        assert_eq!(f.aic, 2.0 * k - 2.0 * f.loglik);
        assert_eq!(f.bic, k * 12f64.ln() - 2.0 * f.loglik);
    }

    #[test]
    fn profiled_loglik_equals_explicit_loglik() {
        let spec = SarimaSpec::arima(1, 0, 1);
        let truth = SarimaParams {
            intercept: 50.0,
            phi: vec![0.6],
            theta: vec![0.3],
            seasonal_phi: vec![],
            seasonal_theta: vec![],
            sigma2: 4.0,
        };
        let s = simulate(&spec, &truth, 400, 7).unwrap();
        let f = fit(&spec, &s).unwrap();
        let ll = log_likelihood(&spec, &f.params, &s).unwrap();
        assert!((ll - f.loglik).abs() < 1e-8, "{ll} vs {}", f.loglik);
        assert!((f.params.phi[0] - 0.6).abs() < 0.15);
        assert_eq!(f.residuals.len(), f.n_obs);
        let fitted = f.fitted_values(&s).unwrap();
        assert_eq!(fitted.len(), 400);
    }

    #[test]
    fn rejects_oversized_spec() {
        let s = TimeSeries::from_values(chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), vec![1.0; 500]).unwrap();
        let spec = SarimaSpec::sarima(0, 0, 0, 11, 0, 0, 7);
        assert!(matches!(fit(&spec, &s), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fit_is_deterministic() {
        let spec = SarimaSpec::arima(1, 0, 1);
        let truth = SarimaParams {
            intercept: 0.0,
            phi: vec![0.4],
            theta: vec![-0.2],
            seasonal_phi: vec![],
            seasonal_theta: vec![],
            sigma2: 1.0,
        };
        let s = simulate(&spec, &truth, 300, 1).unwrap();
        let a = fit(&spec, &s).unwrap();
        let b = fit(&spec, &s).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.loglik.to_bits(), b.loglik.to_bits());
    }
}
