use super::GeneratorMatrix;
use crate::{Error, Result};

/// Poisson mass beyond the last kept term of a chunk.
const TAIL_TOL: f64 = 1e-13;
/// Largest `Λ dt` handled in one chunk, to keep `e^{-Λ dt}` well scaled.
const CHUNK: f64 = 30.0;
/// Default cap on the number of series terms per chunk.
pub const TERM_CAP: usize = 10_000;

/// Point mass on the state with the given sorted sites.
pub fn delta(g: &GeneratorMatrix, sites: &[i64]) -> Result<Vec<f64>> {
    let i = g
        .index_of(sites)
        .ok_or_else(|| Error::InvalidParameter(format!("{sites:?} is not a state")))?;
    let mut v = vec![0.0; g.dim()];
    v[i] = 1.0;
    Ok(v)
}

pub fn uniform(g: &GeneratorMatrix) -> Vec<f64> {
    vec![1.0 / g.dim() as f64; g.dim()]
}

/// `e^{Aᵀ t} π₀` by uniformization with rate `Λ = max exit rate`.
pub fn master_evolve(g: &GeneratorMatrix, pi0: &[f64], t: f64) -> Result<Vec<f64>> {
    master_evolve_capped(g, pi0, t, TERM_CAP)
}

/// As [`master_evolve`], failing once a chunk would need more than `cap` terms.
pub fn master_evolve_capped(
    g: &GeneratorMatrix,
    pi0: &[f64],
    t: f64,
    cap: usize,
) -> Result<Vec<f64>> {
    if pi0.len() != g.dim() {
        return Err(Error::InvalidParameter(format!(
            "distribution of length {} for {} states",
            pi0.len(),
            g.dim()
        )));
    }
    if pi0.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParameter("π₀ must be nonnegative".into()));
    }
    let mass: f64 = pi0.iter().sum();
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("π₀ sums to {mass}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t = {t}")));
    }
    let lambda = g.max_exit_rate();
    let mut pi = pi0.to_vec();
    if t == 0.0 || lambda == 0.0 {
        return Ok(pi);
    }
    let chunks = (lambda * t / CHUNK).ceil().max(1.0) as usize;
    let dt = t / chunks as f64;
    for _ in 0..chunks {
        pi = chunk(g, &pi, lambda, lambda * dt, cap)?;
    }
    Ok(pi)
}

/// One step `Σ_k Pois(k; μ) (I + Aᵀ/Λ)^k π`.
fn chunk(g: &GeneratorMatrix, pi: &[f64], lambda: f64, mu: f64, cap: usize) -> Result<Vec<f64>> {
    let mut weight = (-mu).exp();
    let mut kept = weight;
    let mut term = pi.to_vec();
    let mut out: Vec<f64> = term.iter().map(|v| v * weight).collect();
    let mut k = 0;
    while 1.0 - kept > TAIL_TOL {
        k += 1;
        if k > cap {
            return Err(Error::DivergenceGuard { cap });
        }
        let a = g.apply_transpose(&term);
        for (x, ax) in term.iter_mut().zip(a) {
            *x += ax / lambda;
        }
        weight *= mu / k as f64;
        kept += weight;
        for (o, x) in out.iter_mut().zip(&term) {
            *o += weight * x;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::generator;
    use super::*;
    use crate::asep::Rates;

    #[test]
    fn zero_time_is_identity() {
        let g = generator(2, 5, Rates::new(0.3).unwrap()).unwrap();
        let pi0 = delta(&g, &[0, 2]).unwrap();
        assert_eq!(master_evolve(&g, &pi0, 0.0).unwrap(), pi0);
    }

    #[test]
    fn relaxes_to_uniform() {
        let g = generator(2, 6, Rates::new(0.3).unwrap()).unwrap();
        let pi0 = delta(&g, &[0, 1]).unwrap();
        let pi = master_evolve(&g, &pi0, 200.0).unwrap();
        let u = 1.0 / g.dim() as f64;
        assert!(pi.iter().all(|v| (v - u).abs() < 1e-8));
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_walker_matches_fourier_modes() {
        let (p, l, t) = (0.3, 7usize, 2.3);
        let g = generator(1, l, Rates::new(p).unwrap()).unwrap();
        let pi = master_evolve(&g, &delta(&g, &[0]).unwrap(), t).unwrap();
        // Position distribution of a walker stepping -1 at rate p and +1 at rate q on Z_L.
        for x in 0..l {
            let mut v = 0.0;
            for k in 0..l {
                let th = 2.0 * std::f64::consts::PI * k as f64 / l as f64;
                // E e^{iθX_t} = e^{t (p e^{-iθ} + q e^{iθ} - 1)}.
                let re = th.cos() - 1.0;
                let im = (1.0 - 2.0 * p) * th.sin();
                v += (t * re).exp() * (t * im - th * x as f64).cos();
            }
            v /= l as f64;
            assert!((pi[x] - v).abs() < 1e-10, "x = {x}: {} vs {v}", pi[x]);
        }
    }

    #[test]
    fn divergence_guard() {
        let g = generator(2, 6, Rates::new(0.3).unwrap()).unwrap();
        let pi0 = delta(&g, &[0, 1]).unwrap();
        let err = master_evolve_capped(&g, &pi0, 10.0, 3).unwrap_err();
        assert!(matches!(err, Error::DivergenceGuard { cap: 3 }));
    }

    #[test]
    fn rejects_bad_input() {
        let g = generator(1, 4, Rates::tasep()).unwrap();
        assert!(master_evolve(&g, &[0.5, 0.5, 0.5, -0.5], 1.0).is_err());
        assert!(master_evolve(&g, &[0.5, 0.5], 1.0).is_err());
    }
}
