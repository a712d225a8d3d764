//! Ordinary least squares on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub beta: DVector<f64>,
    pub ssr: f64,
    /// Diagonal of `(X'X)^{-1}`.
    pub xtx_inv_diag: DVector<f64>,
    pub nobs: usize,
}

impl OlsFit {
    pub fn sigma2(&self) -> f64 {
        self.ssr / (self.nobs - self.beta.len()) as f64
    }

    pub fn std_error(&self, k: usize) -> f64 {
        (self.sigma2() * self.xtx_inv_diag[k]).sqrt()
    }

    pub fn t_value(&self, k: usize) -> f64 {
        self.beta[k] / self.std_error(k)
    }

    /// Gaussian log-likelihood at the ML variance estimate.
    pub fn log_likelihood(&self) -> f64 {
        let n = self.nobs as f64;
        -0.5 * n * ((2.0 * std::f64::consts::PI * self.ssr / n).ln() + 1.0)
    }

    pub fn aic(&self) -> f64 {
        -2.0 * self.log_likelihood() + 2.0 * self.beta.len() as f64
    }
}

/// Least squares via Householder QR. Fails on a rank-deficient design.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if n <= k {
        return Err(Error::TooShort { needed: k, have: n });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let diag_max = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-12 * diag_max.max(1e-300)) {
        return Err(Error::Singular("least-squares design"));
    }
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::Singular("least-squares design"))?;
    let resid = y - x * &beta;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::Singular("least-squares design"))?;
    let xtx_inv_diag = DVector::from_fn(k, |i, _| r_inv.row(i).norm_squared());
    Ok(OlsFit {
        beta,
        ssr: resid.norm_squared(),
        xtx_inv_diag,
        nobs: n,
    })
}
