use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asep::Rates;
use crate::{Error, Result};

/// Largest ring admitted by [`generator`].
pub const MAX_RING: usize = 14;
/// Cap on the number of states of a truncated segment.
pub const MAX_SEGMENT_STATES: usize = 250_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateSpace {
    /// N particles on the ring `0..len`.
    Ring { len: usize },
    /// N particles on the sites `lo..hi` of ℤ with closed ends.
    Segment { lo: i64, hi: i64 },
}

/// Sparse generator `A` of the exclusion process on an enumerated state
/// space. `A[x][x']` is the rate from `x` to `x'`; rows sum to zero and the
/// master equation reads `dP/dt = Aᵀ P`.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub n: usize,
    pub space: StateSpace,
    pub rates: Rates,
    states: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
    /// Off-diagonal entries `(from, to, rate)`.
    transitions: Vec<(usize, usize, f64)>,
    diagonal: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// State `i` as sorted site labels.
    pub fn state(&self, i: usize) -> &[i64] {
        &self.states[i]
    }

    pub fn states(&self) -> &[Vec<i64>] {
        &self.states
    }

    pub fn index_of(&self, sites: &[i64]) -> Option<usize> {
        self.index.get(sites).copied()
    }

    pub fn transitions(&self) -> &[(usize, usize, f64)] {
        &self.transitions
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Largest exit rate, `max_x |A[x][x]|`.
    pub fn max_exit_rate(&self) -> f64 {
        self.diagonal.iter().fold(0.0, |m, d| m.max(-d))
    }

    /// `A v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.diagonal.iter().zip(v).map(|(d, x)| d * x).collect();
        for &(from, to, rate) in &self.transitions {
            out[from] += rate * v[to];
        }
        out
    }

    /// `A v` for complex `v`.
    pub fn apply_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.diagonal.iter().zip(v).map(|(d, x)| x * *d).collect();
        for &(from, to, rate) in &self.transitions {
            out[from] += v[to] * rate;
        }
        out
    }

    /// `Aᵀ π`, the right-hand side of the master equation.
    pub fn apply_transpose(&self, pi: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.diagonal.iter().zip(pi).map(|(d, x)| d * x).collect();
        for &(from, to, rate) in &self.transitions {
            out[to] += rate * pi[from];
        }
        out
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diagonal));
        for &(from, to, rate) in &self.transitions {
            m[(from, to)] += rate;
        }
        debug_assert_eq!(m.nrows(), d);
        m
    }

    /// Full spectrum by dense Schur decomposition.
    pub fn spectrum(&self) -> Vec<Complex64> {
        self.dense()
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect()
    }
}

fn combinations(sites: &[i64], n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    fn rec(sites: &[i64], n: usize, start: usize, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        let need = n - current.len();
        for i in start..=sites.len().saturating_sub(need) {
            current.push(sites[i]);
            rec(sites, n, i + 1, current, out);
            current.pop();
        }
    }
    if n <= sites.len() {
        rec(sites, n, 0, &mut current, &mut out);
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn build(n: usize, space: StateSpace, rates: Rates) -> GeneratorMatrix {
    let sites: Vec<i64> = match space {
        StateSpace::Ring { len } => (0..len as i64).collect(),
        StateSpace::Segment { lo, hi } => (lo..hi).collect(),
    };
    let states = combinations(&sites, n);
    let index: HashMap<Vec<i64>, usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let neighbour = |x: i64, step: i64| -> Option<i64> {
        match space {
            StateSpace::Ring { len } => Some((x + step).rem_euclid(len as i64)),
            StateSpace::Segment { lo, hi } => Some(x + step).filter(|y| (lo..hi).contains(y)),
        }
    };
    let mut acc: HashMap<(usize, usize), f64> = HashMap::new();
    let mut diagonal = vec![0.0; states.len()];
    for (from, state) in states.iter().enumerate() {
        for (slot, &x) in state.iter().enumerate() {
            for (step, rate) in [(-1, rates.p()), (1, rates.q())] {
                if rate == 0.0 {
                    continue;
                }
                let Some(y) = neighbour(x, step) else { continue };
                if state.binary_search(&y).is_ok() {
                    continue;
                }
                let mut next = state.clone();
                next[slot] = y;
                next.sort_unstable();
                let to = index[&next];
                *acc.entry((from, to)).or_insert(0.0) += rate;
                diagonal[from] -= rate;
            }
        }
    }
    let mut transitions: Vec<(usize, usize, f64)> =
        acc.into_iter().map(|((f, t), r)| (f, t, r)).collect();
    transitions.sort_by_key(|&(f, t, _)| (f, t));
    GeneratorMatrix {
        n,
        space,
        rates,
        states,
        index,
        transitions,
        diagonal,
    }
}

/// Generator of N particles on a ring of L sites, `1 <= N < L <= 14`.
pub fn generator(n: usize, l: usize, rates: Rates) -> Result<GeneratorMatrix> {
    if n == 0 || n >= l {
        return Err(Error::InvalidParameter(format!("need 1 <= N < L, got N = {n}, L = {l}")));
    }
    if l > MAX_RING {
        return Err(Error::StateSpaceTooLarge {
            size: binomial(l, n),
            limit: binomial(MAX_RING, MAX_RING / 2),
        });
    }
    Ok(build(n, StateSpace::Ring { len: l }, rates))
}

/// Generator of N particles confined to the sites `lo..hi` of ℤ (jumps off
/// the ends are suppressed). Used as a truncation of the infinite line.
pub fn generator_segment(n: usize, lo: i64, hi: i64, rates: Rates) -> Result<GeneratorMatrix> {
    if lo >= hi || n == 0 || n as i64 > hi - lo {
        return Err(Error::InvalidParameter(format!(
            "cannot place {n} particles on sites {lo}..{hi}"
        )));
    }
    let size = binomial((hi - lo) as usize, n);
    if size > MAX_SEGMENT_STATES {
        return Err(Error::StateSpaceTooLarge {
            size,
            limit: MAX_SEGMENT_STATES,
        });
    }
    Ok(build(n, StateSpace::Segment { lo, hi }, rates))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_walker_is_circulant() {
        let rates = Rates::new(0.3).unwrap();
        let a = generator(1, 3, rates).unwrap().dense();
        for i in 0..3 {
            assert_eq!(a[(i, i)], -1.0);
            assert!((a[(i, (i + 2) % 3)] - 0.3).abs() < 1e-15);
            assert!((a[(i, (i + 1) % 3)] - 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn rows_sum_to_zero_and_entries_are_rates() {
        let rates = Rates::new(0.25).unwrap();
        let g = generator(3, 7, rates).unwrap();
        assert_eq!(g.dim(), 35);
        let ones = vec![1.0; g.dim()];
        assert!(g.apply(&ones).iter().all(|v| v.abs() < 1e-14));
        for &(_, _, r) in g.transitions() {
            assert!(r == 0.25 || r == 0.75);
        }
    }

    #[test]
    fn uniform_measure_is_stationary() {
        for (n, l) in [(2, 5), (3, 7)] {
            let g = generator(n, l, Rates::new(0.1).unwrap()).unwrap();
            let pi = vec![1.0 / g.dim() as f64; g.dim()];
            let r = g.apply_transpose(&pi);
            assert!(r.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn particle_hole_spectra_coincide() {
        let rates = Rates::new(0.35).unwrap();
        for l in 3..7 {
            let mut a: Vec<Complex64> = generator(l - 1, l, rates).unwrap().spectrum();
            let mut b: Vec<Complex64> = generator(1, l, rates.reflected()).unwrap().spectrum();
            let key = |z: &Complex64| (z.re * 1e8).round() as i64 * 1_000_000_000 + (z.im * 1e8).round() as i64;
            a.sort_by_key(key);
            b.sort_by_key(key);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-9, "L = {l}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn size_limits() {
        let rates = Rates::tasep();
        assert!(matches!(generator(2, 15, rates), Err(Error::StateSpaceTooLarge { .. })));
        assert!(generator(3, 3, rates).is_err());
        assert!(generator(0, 3, rates).is_err());
        assert!(generator_segment(3, 0, 2, rates).is_err());
    }
}
