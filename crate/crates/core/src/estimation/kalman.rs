//! Kalman filter for a zero-mean ARMA process in companion (Harvey) form.
//!
//! ```text
//! x_{t+1} = T x_t + R e_{t+1}      T: first column = AR lags, superdiagonal = 1
//! y_t     = x_t[0]                 R = [1, theta_1, ..., theta_{r-1}]
//! ```
//!
//! All covariances are in units of the innovation variance (sigma2 = 1), so
//! the filter output can be rescaled for any sigma2 and the variance can be
//! concentrated out of the likelihood.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative change in the predicted state covariance below which the
/// filter switches to its steady-state gain.
const STEADY_STATE_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct ArmaStateSpace {
    dim: usize,
    ar: Vec<f64>,
    noise: Vec<f64>,
}

impl ArmaStateSpace {
    /// `ar` and `ma` are expanded lag coefficients (index 0 = lag 1).
    pub fn new(ar: &[f64], ma: &[f64]) -> Self {
        let dim = ar.len().max(ma.len() + 1);
        let mut ar_pad = vec![0.0; dim];
        ar_pad[..ar.len()].copy_from_slice(ar);
        let mut noise = vec![0.0; dim];
        noise[0] = 1.0;
        noise[1..=ma.len()].copy_from_slice(ma);
        Self {
            dim,
            ar: ar_pad,
            noise,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn transition(&self) -> DMatrix<f64> {
        let r = self.dim;
        DMatrix::from_fn(r, r, |i, j| {
            let first = if j == 0 { self.ar[i] } else { 0.0 };
            let shift = if j == i + 1 { 1.0 } else { 0.0 };
            first + shift
        })
    }

    /// Stationary covariance of the state, row-major `dim x dim`.
    ///
    /// Solves `P = T P T' + R R'` using the companion structure: entrywise
    /// the equation reads
    /// `P[i][j] = a_i a_j P[0][0] + a_i P[0][j+1] + a_j P[i+1][0] + P[i+1][j+1] + R_i R_j`,
    /// so once the first row is known the rest follows backwards from the
    /// last corner. The first row is `Cov(y_t, x_t[j])`, built from the
    /// process autocovariances and psi-weights.
    pub fn stationary_covariance(&self) -> Result<Vec<f64>> {
        let r = self.dim;
        let a = &self.ar;
        let rn = &self.noise;
        let pa = a.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
        let q = rn.iter().rposition(|&c| c != 0.0).unwrap_or(0);

        let mut psi = vec![0.0; r];
        for j in 0..r {
            psi[j] = rn[j] + (1..=j.min(pa)).map(|k| a[k - 1] * psi[j - k]).sum::<f64>();
        }
        let rhs = |k: usize| -> f64 { (k..=q).map(|j| rn[j] * psi[j - k]).sum() };

        // Yule-Walker-type system for gamma(0..=pa).
        let mut system = DMatrix::<f64>::identity(pa + 1, pa + 1);
        for k in 0..=pa {
            for j in 1..=pa {
                system[(k, k.abs_diff(j))] -= a[j - 1];
            }
        }
        let b = nalgebra::DVector::from_fn(pa + 1, |k, _| rhs(k));
        let head = system
            .lu()
            .solve(&b)
            .ok_or(Error::Singular("stationary autocovariance"))?;
        let mut gamma: Vec<f64> = head.iter().copied().collect();
        for k in pa + 1..=r {
            let g = (1..=pa).map(|j| a[j - 1] * gamma[k - j]).sum::<f64>() + rhs(k);
            gamma.push(g);
        }
        if !(gamma[0] > 0.0) || gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::NotStationary);
        }

        let s = r + 1;
        let mut p = vec![0.0; s * s];
        for j in 0..r {
            let v: f64 = (0..r - j).map(|k| a[j + k] * gamma[k + 1] + rn[j + k] * psi[k]).sum();
            p[j] = v;
            p[j * s] = v;
        }
        for i in (1..r).rev() {
            for j in (i..r).rev() {
                let v = a[i] * a[j] * p[0] + a[i] * p[j + 1] + a[j] * p[(i + 1) * s] + p[(i + 1) * s + j + 1]
                    + rn[i] * rn[j];
                p[i * s + j] = v;
                p[j * s + i] = v;
            }
        }
        Ok((0..r * r).map(|k| p[(k / r) * s + k % r]).collect())
    }

    /// `x <- T x`.
    pub fn advance_state(&self, x: &mut [f64]) {
        let x0 = x[0];
        let r = self.dim;
        for i in 0..r - 1 {
            x[i] = self.ar[i] * x0 + x[i + 1];
        }
        x[r - 1] = self.ar[r - 1] * x0;
    }

    /// `P <- T P T' + R R'` for a row-major `P`.
    pub fn advance_covariance(&self, p: &[f64]) -> Vec<f64> {
        let r = self.dim;
        let at = |i: usize, j: usize| if i < r && j < r { p[i * r + j] } else { 0.0 };
        let mut out = vec![0.0; r * r];
        for i in 0..r {
            for j in 0..r {
                out[i * r + j] = self.ar[i] * self.ar[j] * p[0]
                    + self.ar[i] * at(0, j + 1)
                    + self.ar[j] * at(i + 1, 0)
                    + at(i + 1, j + 1)
                    + self.noise[i] * self.noise[j];
            }
        }
        out
    }
}

/// Output of [`filter`] and [`filter_with_covariance`].
#[derive(Debug, Clone)]
pub struct Filtered {
    /// One-step innovations, one vector per input column.
    pub innovations: Vec<Vec<f64>>,
    /// Innovation variances `F_t` in units of sigma2.
    pub variances: Vec<f64>,
    /// Predicted state `x_{n+1|n}` per column.
    pub next_state: Vec<Vec<f64>>,
    /// Predicted covariance `P_{n+1|n}`, row-major; only from
    /// [`filter_with_covariance`].
    pub next_covariance: Option<Vec<f64>>,
}

fn check_columns(columns: &[&[f64]]) -> Result<usize> {
    let n = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument("filter: ragged columns".into()));
    }
    Ok(n)
}

fn check_variance(f: f64, t: usize) -> Result<()> {
    if f > 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(Error::Numerical(format!("innovation variance {f} at step {t}")))
    }
}

/// Runs the filter over several data columns sharing one gain sequence.
///
/// Because the gains do not depend on the data, feeding a column of ones
/// next to the data yields the regressor needed to profile out a mean.
///
/// Started from the stationary covariance, successive predicted
/// covariances differ by a rank-one matrix `M W W'`, so the gain can be
/// propagated with the Chandrasekhar recursions in O(r) per step instead of
/// the O(r^2) Riccati update.
pub fn filter(model: &ArmaStateSpace, columns: &[&[f64]]) -> Result<Filtered> {
    let n = check_columns(columns)?;
    let r = model.dim;
    let p0 = model.stationary_covariance()?;

    let mut f = p0[0];
    check_variance(f, 0)?;
    // gain k = T P e1 / F, applied after advancing the state
    let mut gain: Vec<f64> = (0..r).map(|i| p0[i * r] / f).collect();
    model.advance_state(&mut gain);
    let mut w = gain.clone();
    let mut m = -f;
    let mut tw = vec![0.0; r];

    let mut states: Vec<Vec<f64>> = vec![vec![0.0; r]; columns.len()];
    let mut innovations: Vec<Vec<f64>> = vec![Vec::with_capacity(n); columns.len()];
    let mut variances = Vec::with_capacity(n);
    let mut steady = false;

    for t in 0..n {
        check_variance(f, t)?;
        variances.push(f);
        for (c, col) in columns.iter().enumerate() {
            let x = &mut states[c];
            let v = col[t] - x[0];
            innovations[c].push(v);
            model.advance_state(x);
            for i in 0..r {
                x[i] += gain[i] * v;
            }
        }
        if steady {
            continue;
        }
        let w0 = w[0];
        let f_next = f + m * w0 * w0;
        tw.copy_from_slice(&w);
        model.advance_state(&mut tw);
        let mut wmax = 0.0f64;
        for i in 0..r {
            let k_next = (f * gain[i] + tw[i] * m * w0) / f_next;
            w[i] = tw[i] - gain[i] * w0;
            gain[i] = k_next;
            wmax = wmax.max(w[i].abs());
        }
        m -= m * m * w0 * w0 / f_next;
        f = f_next;
        if m.abs() * wmax * wmax <= STEADY_STATE_TOL * f {
            steady = true;
        }
    }

    Ok(Filtered {
        innovations,
        variances,
        next_state: states,
        next_covariance: None,
    })
}

/// [`filter`] via the full Riccati recursion, also returning the final
/// predicted covariance needed for multi-step forecasts.
pub fn filter_with_covariance(model: &ArmaStateSpace, columns: &[&[f64]]) -> Result<Filtered> {
    let n = check_columns(columns)?;
    let r = model.dim;

    // P is stored with stride r+1 and a zero final row/column so the shifted
    // access p[i+1][j+1] never branches.
    let stride = r + 1;
    let p0 = model.stationary_covariance()?;
    let mut p = vec![0.0; stride * stride];
    for i in 0..r {
        p[i * stride..i * stride + r].copy_from_slice(&p0[i * r..i * r + r]);
    }
    let mut next = vec![0.0; stride * stride];
    let mut gain = vec![0.0; stride];

    let mut states: Vec<Vec<f64>> = vec![vec![0.0; r]; columns.len()];
    let mut innovations: Vec<Vec<f64>> = vec![Vec::with_capacity(n); columns.len()];
    let mut variances = Vec::with_capacity(n);
    let mut steady = false;

    for t in 0..n {
        let f = p[0];
        check_variance(f, t)?;
        variances.push(f);
        for (c, col) in columns.iter().enumerate() {
            let x = &mut states[c];
            let v = col[t] - x[0];
            innovations[c].push(v);
            for i in 0..r {
                x[i] += p[i * stride] / f * v;
            }
            model.advance_state(x);
        }
        if steady {
            continue;
        }
        // With no measurement noise the updated covariance has a zero first
        // row and column, so T U T' is just U shifted up-left by one.
        for i in 0..stride {
            gain[i] = p[i * stride] / f.sqrt();
        }
        let mut change = 0.0f64;
        for i in 0..r {
            let gi = gain[i + 1];
            let ni = model.noise[i];
            let src = (i + 1) * stride + 1;
            let dst = i * stride;
            for j in 0..r {
                let v = p[src + j] - gi * gain[j + 1] + ni * model.noise[j];
                change = change.max((v - p[dst + j]).abs());
                next[dst + j] = v;
            }
        }
        std::mem::swap(&mut p, &mut next);
        if change <= STEADY_STATE_TOL * p[0] {
            steady = true;
        }
    }

    let mut next_covariance = vec![0.0; r * r];
    for i in 0..r {
        next_covariance[i * r..i * r + r].copy_from_slice(&p[i * stride..i * stride + r]);
    }
    Ok(Filtered {
        innovations,
        variances,
        next_state: states,
        next_covariance: Some(next_covariance),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_covariance_solves_lyapunov() {
        use crate::estimation::lyapunov::solve_discrete_lyapunov;
        let cases: [(&[f64], &[f64]); 5] = [
            (&[0.5], &[]),
            (&[], &[0.4]),
            (&[0.3, -0.2, 0.1], &[0.4, 0.2]),
            (&[0.9, -0.1], &[0.3, 0.2, 0.1, 0.05]),
            (&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.6], &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5]),
        ];
        for (ar, ma) in cases {
            let ss = ArmaStateSpace::new(ar, ma);
            let r = ss.dim();
            let noise = DMatrix::from_column_slice(r, 1, &ss.noise);
            let want = solve_discrete_lyapunov(&ss.transition(), &(&noise * noise.transpose())).unwrap();
            let got = ss.stationary_covariance().unwrap();
            for i in 0..r {
                for j in 0..r {
                    assert!((want[(i, j)] - got[i * r + j]).abs() < 1e-12, "{ar:?} {ma:?}");
                }
            }
        }
        assert!(ArmaStateSpace::new(&[1.0], &[]).stationary_covariance().is_err());
    }

    #[test]
    fn white_noise_passes_data_through() {
        let ss = ArmaStateSpace::new(&[], &[]);
        let data = [1.0, -2.0, 0.5];
        let out = filter(&ss, &[&data]).unwrap();
        assert_eq!(out.innovations[0], data.to_vec());
        assert!(out.variances.iter().all(|&f| f == 1.0));
    }

    #[test]
    fn ar1_innovations() {
        let ss = ArmaStateSpace::new(&[0.5], &[]);
        let data = [2.0, 3.0, 1.0];
        let out = filter(&ss, &[&data]).unwrap();
        let v = &out.innovations[0];
        assert!((v[0] - 2.0).abs() < 1e-15);
        assert!((v[1] - 2.0).abs() < 1e-15);
        assert!((v[2] + 0.5).abs() < 1e-15);
        assert!((out.variances[0] - 1.0 / 0.75).abs() < 1e-14);
        assert!((out.variances[1] - 1.0).abs() < 1e-14);
        assert!((out.next_state[0][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fast_recursion_matches_riccati() {
        let ar = crate::estimation::polynomial::expand_ar(&[0.4], &[0.5, -0.2], 7);
        let ma = crate::estimation::polynomial::expand_ma(&[-0.3], &[0.6], 7);
        let ss = ArmaStateSpace::new(&ar, &ma);
        let y: Vec<f64> = (0..300).map(|i| ((i * 7919) % 97) as f64 / 10.0 - 4.0).collect();
        let ones = vec![1.0; y.len()];
        let fast = filter(&ss, &[&y, &ones]).unwrap();
        let full = filter_with_covariance(&ss, &[&y, &ones]).unwrap();
        for t in 0..y.len() {
            assert!((fast.variances[t] - full.variances[t]).abs() < 1e-10 * full.variances[t]);
            for c in 0..2 {
                assert!((fast.innovations[c][t] - full.innovations[c][t]).abs() < 1e-9);
            }
        }
        for c in 0..2 {
            for (a, b) in fast.next_state[c].iter().zip(&full.next_state[c]) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn columns_share_gains() {
        let ss = ArmaStateSpace::new(&[0.3, 0.1], &[0.4]);
        let y = [1.0, 0.2, -0.7, 1.1, 0.4];
        let ones = [1.0; 5];
        let both = filter(&ss, &[&y, &ones]).unwrap();
        let shifted: Vec<f64> = y.iter().map(|v| v - 2.0).collect();
        let single = filter(&ss, &[&shifted]).unwrap();
        for t in 0..5 {
            let lin = both.innovations[0][t] - 2.0 * both.innovations[1][t];
            assert!((lin - single.innovations[0][t]).abs() < 1e-12);
        }
    }

    #[test]
    fn advance_covariance_matches_dense() {
        let ss = ArmaStateSpace::new(&[0.2, -0.1, 0.05], &[0.3, 0.2]);
        let p = ss.stationary_covariance().unwrap();
        let r = ss.dim();
        let t = ss.transition();
        let pm = DMatrix::from_row_slice(r, r, &p);
        let noise = DMatrix::from_column_slice(r, 1, &ss.noise);
        let dense = &t * pm * t.transpose() + &noise * noise.transpose();
        let fast = ss.advance_covariance(&p);
        for i in 0..r {
            for j in 0..r {
                assert!((dense[(i, j)] - fast[i * r + j]).abs() < 1e-13);
            }
        }
        // stationarity: the stationary covariance is a fixed point
        for (a, b) in p.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
