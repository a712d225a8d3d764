use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{expand_polynomials, SarimaParams, SarimaSpec, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};
use crate::series::{integrate_values, TimeSeries};

/// Start date given to simulated series.
pub const SIMULATION_START: (i32, u32, u32) = (2000, 1, 1);

/// Draws a Gaussian sample path of length `n`.
///
/// The stationary part runs through a burn-in of `max(10 r, 100)` steps,
/// `r` being the state dimension; the integrated part starts from zeros
/// which are then dropped. Same seed, same path.
pub fn simulate(spec: &SarimaSpec, params: &SarimaParams, n: usize, seed: u64) -> Result<TimeSeries> {
    spec.validate(DEFAULT_STATE_CAP)?;
    params.validate(spec)?;
    let (ar, ma) = expand_polynomials(spec, params);
    let burn = (10 * spec.state_dim()).max(100);
    let total = burn + n;
    let mean = if spec.with_intercept { params.intercept } else { 0.0 };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, params.sigma2.sqrt())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let e: Vec<f64> = (0..total).map(|_| noise.sample(&mut rng)).collect();
    let mut x = vec![0.0; total];
    for t in 0..total {
        let mut v = e[t];
        for (j, a) in ar.iter().enumerate().take(t) {
            v += a * x[t - 1 - j];
        }
        for (j, b) in ma.iter().enumerate().take(t) {
            v += b * e[t - 1 - j];
        }
        x[t] = v;
    }
    let w: Vec<f64> = x[burn..].iter().map(|v| v + mean).collect();
    let diff = spec.differencing();
    let zeros = vec![0.0; diff.lag_count()];
    let y = integrate_values(&zeros, &w, &diff)?;
    let (yy, mm, dd) = SIMULATION_START;
    TimeSeries::from_values(NaiveDate::from_ymd_opt(yy, mm, dd).expect("valid date"), y)
}
