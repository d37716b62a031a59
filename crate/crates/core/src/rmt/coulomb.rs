use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

/// Unnormalized log-density of GUE eigenvalues,
/// `-½ Σ y_i² + 2 Σ_{j<k} log|y_j - y_k|`.
pub fn coulomb_log_density(y: &[f64]) -> Result<f64> {
    let mut v = -0.5 * y.iter().map(|x| x * x).sum::<f64>();
    for j in 0..y.len() {
        for k in j + 1..y.len() {
            let d = (y[j] - y[k]).abs();
            if d == 0.0 {
                return Err(Error::InvalidParameter(format!("coincident points at {}", y[j])));
            }
            v += 2.0 * d.ln();
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetropolisConfig {
    pub n: usize,
    /// Single-coordinate proposals, burn-in included.
    pub steps: usize,
    /// Initial proposal width; tuned during burn-in towards 40% acceptance.
    pub sigma: f64,
    /// Fraction of steps discarded as burn-in.
    pub burn_in: f64,
    /// Record the state once every `thin` sweeps of `n` proposals.
    pub thin: usize,
    pub seed: u64,
}

impl MetropolisConfig {
    pub fn new(n: usize, steps: usize, seed: u64) -> Self {
        Self {
            n,
            steps,
            sigma: 0.5,
            burn_in: 0.2,
            thin: 1,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetropolisRun {
    pub config: MetropolisConfig,
    /// Recorded states after burn-in, each in matrix units.
    pub states: Vec<Vec<f64>>,
    /// Proposal width after tuning.
    pub sigma: f64,
    /// Acceptance rate after burn-in.
    pub acceptance: f64,
    pub final_log_density: f64,
}

impl MetropolisRun {
    /// Pooled `y / √n` over all recorded states.
    pub fn pooled_scaled(&self) -> Vec<f64> {
        let scale = (self.config.n as f64).sqrt();
        self.states.iter().flatten().map(|y| y / scale).collect()
    }
}

/// Change of the log-density when coordinate `i` moves from `y[i]` to `new`.
fn delta_log_density(y: &[f64], i: usize, new: f64) -> Option<f64> {
    let old = y[i];
    let mut d = -0.5 * (new * new - old * old);
    for (k, &yk) in y.iter().enumerate() {
        if k == i {
            continue;
        }
        let a = (new - yk).abs();
        if a == 0.0 {
            return None;
        }
        d += 2.0 * (a.ln() - (old - yk).abs().ln());
    }
    Some(d)
}

/// Random-walk Metropolis on the eigenvalue density with single-coordinate
/// Gaussian moves. The proposal width adapts only during burn-in, so the
/// recorded part of the chain is a fixed reversible kernel.
pub fn metropolis_sample(config: MetropolisConfig) -> Result<MetropolisRun> {
    let n = config.n;
    if n == 0 || config.steps == 0 || !(config.sigma > 0.0) || config.thin == 0 {
        return Err(Error::InvalidParameter(format!("bad Metropolis configuration {config:?}")));
    }
    if !(0.0..1.0).contains(&config.burn_in) {
        return Err(Error::InvalidParameter(format!("burn-in fraction {}", config.burn_in)));
    }
    let mut rng = rng::root(config.seed);
    // Start spread over the semicircle support.
    let scale = (n as f64).sqrt();
    let mut y: Vec<f64> = (0..n)
        .map(|i| scale * (-1.8 + 3.6 * (i as f64 + 0.5) / n as f64))
        .collect();
    let mut sigma = config.sigma;
    let burn = (config.steps as f64 * config.burn_in) as usize;
    let sweep_len = n;
    let mut states = Vec::new();
    let (mut window_accept, mut window_total) = (0usize, 0usize);
    let (mut accepted, mut proposed) = (0usize, 0usize);
    for step in 0..config.steps {
        let i = rng.random_range(0..n);
        let z: f64 = StandardNormal.sample(&mut rng);
        let new = y[i] + sigma * z;
        // Coincident points have zero density and are never accepted.
        let ok = match delta_log_density(&y, i, new) {
            Some(d) => d >= 0.0 || rng.random::<f64>() < d.exp(),
            None => false,
        };
        if ok {
            y[i] = new;
        }
        if step < burn {
            window_total += 1;
            window_accept += usize::from(ok);
            if window_total == 500 {
                let rate = window_accept as f64 / window_total as f64;
                sigma *= (rate - 0.4).exp();
                window_total = 0;
                window_accept = 0;
            }
        } else {
            proposed += 1;
            accepted += usize::from(ok);
            if (step - burn + 1) % (sweep_len * config.thin) == 0 {
                states.push(y.clone());
            }
        }
    }
    Ok(MetropolisRun {
        config,
        final_log_density: coulomb_log_density(&y)?,
        states,
        sigma,
        acceptance: if proposed > 0 { accepted as f64 / proposed as f64 } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_value() {
        let v = coulomb_log_density(&[-1.0, 1.0]).unwrap();
        assert!((v - (-1.0 + 2.0 * 2f64.ln())).abs() < 1e-15);
        assert!(coulomb_log_density(&[0.3, 0.3]).is_err());
    }

    #[test]
    fn symmetric_under_swaps() {
        let a = coulomb_log_density(&[0.1, -2.0, 1.3, 0.7]).unwrap();
        let b = coulomb_log_density(&[1.3, -2.0, 0.1, 0.7]).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn incremental_update_matches_full() {
        let y = [0.1, -2.0, 1.3, 0.7];
        let d = delta_log_density(&y, 2, 0.9).unwrap();
        let mut z = y;
        z[2] = 0.9;
        let full = coulomb_log_density(&z).unwrap() - coulomb_log_density(&y).unwrap();
        assert!((d - full).abs() < 1e-12);
    }

    #[test]
    fn acceptance_is_tuned() {
        let run = metropolis_sample(MetropolisConfig::new(8, 40_000, 5)).unwrap();
        assert!(run.acceptance > 0.1 && run.acceptance < 0.9, "{}", run.acceptance);
        assert_eq!(run.states.len(), 32_000 / 8);
        assert!(metropolis_sample(MetropolisConfig::new(0, 10, 1)).is_err());
    }
}
