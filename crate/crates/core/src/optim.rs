//! Derivative-free minimization with the Nelder–Mead simplex.
//!
//! Uses the dimension-adaptive coefficients of Gao & Han (2012), which keep
//! the simplex from collapsing prematurely once the problem has more than a
//! handful of parameters.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadConfig {
    /// Stop once every vertex is within `tolerance * max(1, |best|)` of the best vertex (sup-norm).
    pub tolerance: f64,
    pub max_evaluations: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_evaluations: 5000,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `start`. Non-finite objective values are
/// treated as `+inf`, so the simplex simply retreats from them.
pub fn nelder_mead<F>(mut f: F, start: &[f64], config: &NelderMeadConfig) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    if n == 0 {
        let value = eval(start, &mut evaluations);
        return Minimum {
            x: Vec::new(),
            value,
            evaluations,
            converged: true,
        };
    }

    let nf = n as f64;
    let alpha = 1.0;
    let gamma = 1.0 + 2.0 / nf;
    let rho = 0.75 - 1.0 / (2.0 * nf);
    let sigma = 1.0 - 1.0 / nf;

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += config.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evaluations)).collect();

    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    loop {
        // order vertices by value, best first
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let best = &simplex[0];
        let scale = best.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if size <= config.tolerance * scale && values[0].is_finite() {
            converged = true;
            break;
        }
        if evaluations >= config.max_evaluations {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / nf;
            }
        }
        let worst = simplex[n].clone();
        for i in 0..n {
            trial[i] = centroid[i] + alpha * (centroid[i] - worst[i]);
        }
        let f_reflect = eval(&trial, &mut evaluations);

        if f_reflect < values[0] {
            for i in 0..n {
                trial2[i] = centroid[i] + gamma * (trial[i] - centroid[i]);
            }
            let f_expand = eval(&trial2, &mut evaluations);
            if f_expand < f_reflect {
                simplex[n].copy_from_slice(&trial2);
                values[n] = f_expand;
            } else {
                simplex[n].copy_from_slice(&trial);
                values[n] = f_reflect;
            }
            continue;
        }
        if f_reflect < values[n - 1] {
            simplex[n].copy_from_slice(&trial);
            values[n] = f_reflect;
            continue;
        }

        // contraction: outside if the reflection beat the worst vertex
        let outside = f_reflect < values[n];
        for i in 0..n {
            trial2[i] = if outside {
                centroid[i] + rho * (trial[i] - centroid[i])
            } else {
                centroid[i] + rho * (worst[i] - centroid[i])
            };
        }
        let f_contract = eval(&trial2, &mut evaluations);
        let threshold = if outside { f_reflect } else { values[n] };
        if f_contract < threshold || (f_contract == threshold && f_contract.is_finite()) {
            simplex[n].copy_from_slice(&trial2);
            values[n] = f_contract;
            continue;
        }

        // shrink toward the best vertex
        let best = simplex[0].clone();
        for k in 1..=n {
            for i in 0..n {
                simplex[k][i] = best[i] + sigma * (simplex[k][i] - best[i]);
            }
            values[k] = eval(&simplex[k], &mut evaluations);
        }
    }

    Minimum {
        x: simplex.swap_remove(0),
        value: values[0],
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let target = [1.0, -2.0, 0.5];
        let f = |x: &[f64]| x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let m = nelder_mead(f, &[0.0; 3], &NelderMeadConfig::default());
        assert!(m.converged);
        for (a, b) in m.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6, "{:?}", m.x);
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let cfg = NelderMeadConfig {
            initial_step: 0.5,
            ..Default::default()
        };
        let m = nelder_mead(f, &[-1.2, 1.0], &cfg);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn respects_evaluation_budget() {
        let f = |x: &[f64]| x.iter().map(|v| v.abs().sqrt()).sum::<f64>();
        let cfg = NelderMeadConfig {
            max_evaluations: 50,
            tolerance: 1e-30,
            ..Default::default()
        };
        let m = nelder_mead(f, &[3.0, 4.0, 5.0, 6.0], &cfg);
        assert!(!m.converged);
        assert!(m.evaluations <= 50 + 5);
    }

    #[test]
    fn retreats_from_infinite_region() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                (x[0] - 0.25).powi(2)
            }
        };
        let m = nelder_mead(f, &[0.05], &NelderMeadConfig::default());
        assert!((m.x[0] - 0.25).abs() < 1e-6);
    }

    #[test]
    fn zero_dimensional() {
        let m = nelder_mead(|_| 4.0, &[], &NelderMeadConfig::default());
        assert_eq!(m.value, 4.0);
        assert!(m.converged);
    }
}
