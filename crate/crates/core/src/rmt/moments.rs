use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gue::draw;
use super::SpectralSample;
use crate::stats::mean_stderr;
use crate::{rng, Error, Result};

pub const MAX_MOMENT: u32 = 8;
pub const MAX_MOMENT_N: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub n: usize,
    pub j: u32,
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Monte Carlo estimate of `E[Tr M^j]` over GUE draws, draw `i` on substream `i`.
pub fn trace_moment(n: usize, j: u32, samples: usize, seed: u64) -> Result<MomentEstimate> {
    if j > MAX_MOMENT || n == 0 || n > MAX_MOMENT_N {
        return Err(Error::InvalidParameter(format!(
            "trace moments need j <= {MAX_MOMENT}, 1 <= n <= {MAX_MOMENT_N}; got j = {j}, n = {n}"
        )));
    }
    if j == 0 {
        return Ok(MomentEstimate { n, j, samples, mean: n as f64, stderr: 0.0 });
    }
    if samples < 2 {
        return Err(Error::EmptySample);
    }
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let m = draw(n, &mut rng::substream(seed, i));
            let s = SpectralSample::of(&m)?;
            Ok(s.eigenvalues.iter().map(|y| y.powi(j as i32)).sum())
        })
        .collect::<Result<_>>()?;
    let (mean, stderr) = mean_stderr(&values)?;
    Ok(MomentEstimate { n, j, samples, mean, stderr })
}

/// All perfect matchings of `0..2k`, each as `partner[i]`.
pub fn pairings(k: usize) -> Vec<Vec<usize>> {
    fn rec(partner: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(first) = partner.iter().position(|&p| p == usize::MAX) else {
            out.push(partner.clone());
            return;
        };
        for second in first + 1..partner.len() {
            if partner[second] == usize::MAX {
                partner[first] = second;
                partner[second] = first;
                rec(partner, out);
                partner[first] = usize::MAX;
                partner[second] = usize::MAX;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![usize::MAX; 2 * k], &mut out);
    out
}

/// Cycles of `γ ∘ π` with `γ(i) = i + 1 mod 2k`: the number of free index
/// sums a pairing leaves in `Σ E[M_{i1 i2} M_{i2 i3} ...]`.
fn faces(partner: &[usize]) -> usize {
    let m = partner.len();
    let mut seen = vec![false; m];
    let mut cycles = 0;
    for start in 0..m {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = (partner[i] + 1) % m;
        }
    }
    cycles
}

/// Number of pairings of `2j` half-edges by genus: entry `g` counts those
/// with `j + 1 - 2g` faces.
pub fn genus_counts(j: usize) -> Vec<u64> {
    let mut counts = vec![0u64; j / 2 + 1];
    for p in pairings(j) {
        let g = (j + 1 - faces(&p)) / 2;
        counts[g] += 1;
    }
    counts
}

/// Exact `E[Tr M^j]` from Wick's theorem: zero for odd `j`, and
/// `Σ_g ε_g(j/2) n^{j/2 + 1 - 2g}` for even `j`.
pub fn wick_trace_moment(n: u64, j: u32) -> u128 {
    if j % 2 == 1 {
        return 0;
    }
    let half = (j / 2) as usize;
    if half == 0 {
        return n as u128;
    }
    genus_counts(half)
        .iter()
        .enumerate()
        .map(|(g, &c)| c as u128 * (n as u128).pow((half + 1 - 2 * g) as u32))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Harer–Zagier: (k+1) ε_g(k) = (4k-2) ε_g(k-1) + (k-1)(2k-1)(2k-3) ε_{g-1}(k-2).
    fn harer_zagier(k: usize, g: usize) -> u64 {
        if k == 0 {
            return u64::from(g == 0);
        }
        if 2 * g > k {
            return 0;
        }
        let mut v = (4 * k as u64 - 2) * harer_zagier(k - 1, g);
        if g > 0 && k >= 2 {
            v += (k as u64 - 1) * (2 * k as u64 - 1) * (2 * k as u64 - 3) * harer_zagier(k - 2, g - 1);
        }
        v / (k as u64 + 1)
    }

    #[test]
    fn pairing_counts() {
        assert_eq!(pairings(3).len(), 15);
        assert_eq!(pairings(4).len(), 105);
    }

    #[test]
    fn genus_counts_match_harer_zagier() {
        assert_eq!(genus_counts(1), vec![1]);
        assert_eq!(genus_counts(2), vec![2, 1]);
        assert_eq!(genus_counts(3), vec![5, 10]);
        assert_eq!(genus_counts(4), vec![14, 70, 21]);
        for k in 1..=5 {
            for (g, &c) in genus_counts(k).iter().enumerate() {
                assert_eq!(c, harer_zagier(k, g), "k = {k}, g = {g}");
            }
        }
    }

    #[test]
    fn low_moments() {
        for n in [2u64, 4, 8] {
            assert_eq!(wick_trace_moment(n, 0), n as u128);
            assert_eq!(wick_trace_moment(n, 1), 0);
            assert_eq!(wick_trace_moment(n, 2), (n * n) as u128);
            assert_eq!(wick_trace_moment(n, 4), (2 * n.pow(3) + n) as u128);
        }
    }

    #[test]
    fn monte_carlo_second_moment() {
        let est = trace_moment(8, 2, 4000, 21).unwrap();
        assert!((est.mean - 64.0).abs() < 3.0 * est.stderr, "{est:?}");
        let odd = trace_moment(8, 1, 4000, 22).unwrap();
        assert!(odd.mean.abs() < 3.0 * odd.stderr, "{odd:?}");
        assert_eq!(trace_moment(5, 0, 0, 0).unwrap().mean, 5.0);
        assert!(trace_moment(100, 2, 10, 0).is_err());
        assert!(trace_moment(4, 9, 10, 0).is_err());
    }
}
