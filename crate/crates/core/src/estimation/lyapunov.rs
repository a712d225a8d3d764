//! Discrete Lyapunov equation `P = T P T' + Q`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_DOUBLINGS: usize = 64;

/// Solves `P = T P T' + Q` for stable `T` by the doubling iteration
/// `P_{k+1} = P_k + A_k P_k A_k'`, `A_{k+1} = A_k^2`, which sums the series
/// `sum_j T^j Q T'^j` in `2^k` terms after `k` steps.
pub fn solve_discrete_lyapunov(t: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    if t.ncols() != n || q.shape() != (n, n) {
        return Err(Error::InvalidArgument("lyapunov: shape mismatch".into()));
    }
    let mut p = q.clone();
    let mut a = t.clone();
    for _ in 0..MAX_DOUBLINGS {
        let increment = &a * &p * a.transpose();
        let inc_max = increment.amax();
        p += &increment;
        if !inc_max.is_finite() || !p.amax().is_finite() {
            return Err(Error::Numerical("lyapunov: non-finite iterate".into()));
        }
        if inc_max <= 1e-16 * p.amax() {
            // symmetrize against round-off drift
            let sym = (&p + p.transpose()) * 0.5;
            return Ok(sym);
        }
        a = &a * &a;
    }
    Err(Error::Singular("discrete lyapunov solve"))
}
