//! Exact likelihood of seasonal and differenced models against a dense
//! Gaussian density built from psi-weight autocovariances.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use demandcast::estimation::{expand_polynomials, log_likelihood, SarimaParams, SarimaSpec};
use demandcast::series::difference_values;
use demandcast::series::TimeSeries;

fn autocovariance(ar: &[f64], ma: &[f64], sigma2: f64, lags: usize) -> Vec<f64> {
    let terms = 6000;
    let mut psi = vec![0.0; terms + lags];
    for j in 0..psi.len() {
        let mut v = match j {
            0 => 1.0,
            j if j <= ma.len() => ma[j - 1],
            _ => 0.0,
        };
        for (k, a) in ar.iter().enumerate().take(j) {
            v += a * psi[j - k - 1];
        }
        psi[j] = v;
    }
    (0..lags)
        .map(|h| sigma2 * (0..terms).map(|j| psi[j] * psi[j + h]).sum::<f64>())
        .collect()
}

fn dense_loglik(w: &[f64], mean: f64, acov: &[f64]) -> f64 {
    let n = w.len();
    let chol = DMatrix::from_fn(n, n, |i, j| acov[i.abs_diff(j)]).cholesky().unwrap();
    let z = chol
        .l()
        .solve_lower_triangular(&DVector::from_iterator(n, w.iter().map(|v| v - mean)))
        .unwrap();
    let logdet: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + logdet + z.norm_squared())
}

fn check(spec: SarimaSpec, params: SarimaParams, n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<f64> = (0..n).map(|_| 50.0 + 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
    let series = TimeSeries::from_values(NaiveDate::from_ymd_opt(2021, 6, 1).unwrap(), y.clone()).unwrap();
    let got = log_likelihood(&spec, &params, &series).unwrap();

    let w = difference_values(&y, &spec.differencing()).unwrap();
    let (ar, ma) = expand_polynomials(&spec, &params);
    let mean = if spec.with_intercept { params.intercept } else { 0.0 };
    let want = dense_loglik(&w, mean, &autocovariance(&ar, &ma, params.sigma2, w.len()));
    assert!((got - want).abs() < 1e-8, "{spec}: {got} vs {want}");
}

#[test]
fn seasonal_arma() {
    check(
        SarimaSpec::sarima(1, 0, 1, 1, 0, 1, 7),
        SarimaParams {
            intercept: 50.0,
            phi: vec![0.4],
            theta: vec![-0.3],
            seasonal_phi: vec![0.5],
            seasonal_theta: vec![0.2],
            sigma2: 9.0,
        },
        60,
        1,
    );
}

#[test]
fn high_order_seasonal_ar() {
    check(
        SarimaSpec::sarima(0, 0, 0, 3, 0, 2, 7),
        SarimaParams {
            intercept: 49.0,
            phi: vec![],
            theta: vec![],
            seasonal_phi: vec![0.3, -0.2, 0.1],
            seasonal_theta: vec![0.4, 0.1],
            sigma2: 8.0,
        },
        80,
        2,
    );
}

#[test]
fn differenced_models() {
    check(
        SarimaSpec::sarima(1, 1, 1, 1, 1, 0, 7),
        SarimaParams {
            intercept: 0.0,
            phi: vec![0.2],
            theta: vec![0.5],
            seasonal_phi: vec![-0.4],
            seasonal_theta: vec![],
            sigma2: 20.0,
        },
        70,
        3,
    );
    check(
        SarimaSpec::arima(2, 2, 0),
        SarimaParams {
            intercept: 0.0,
            phi: vec![-0.5, -0.2],
            theta: vec![],
            seasonal_phi: vec![],
            seasonal_theta: vec![],
            sigma2: 50.0,
        },
        40,
        4,
    );
}

#[test]
fn near_unit_root() {
    check(
        SarimaSpec::arima(1, 0, 2),
        SarimaParams {
            intercept: 50.0,
            phi: vec![0.97],
            theta: vec![0.6, 0.3],
            seasonal_phi: vec![],
            seasonal_theta: vec![],
            sigma2: 1.5,
        },
        30,
        5,
    );
}
