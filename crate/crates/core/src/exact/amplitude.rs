use num_complex::Complex64;

use crate::asep::Rates;
use crate::{Error, Result};

/// Smallest admissible modulus of an S-matrix denominator.
pub const POLE_TOL: f64 = 1e-10;

/// All permutations of `0..n` in lexicographic order, as `σ[i] = σ(i)`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_permutation(n, |s| out.push(s.to_vec()));
    out
}

/// Visit every permutation of `0..n` in lexicographic order.
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut s: Vec<usize> = (0..n).collect();
    loop {
        f(&s);
        // Next lexicographic permutation.
        let Some(i) = (1..n).rev().find(|&i| s[i - 1] < s[i]) else {
            return;
        };
        let j = (i..n).rev().find(|&j| s[j] > s[i - 1]).expect("pivot exists");
        s.swap(i - 1, j);
        s[i..].reverse();
    }
}

/// Pairs `(σ(i), σ(j))` over the inversions `i < j`, `σ(i) > σ(j)`.
pub fn inversions(sigma: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..sigma.len() {
        for j in i + 1..sigma.len() {
            if sigma[i] > sigma[j] {
                out.push((sigma[i], sigma[j]));
            }
        }
    }
    out
}

/// Two-body factor `-(p + q ξ_a ξ_b - ξ_a) / (p + q ξ_a ξ_b - ξ_b)`.
pub(crate) fn s_factor(xa: Complex64, xb: Complex64, rates: Rates) -> Result<Complex64> {
    let base = rates.p() + rates.q() * xa * xb;
    let den = base - xb;
    if den.norm() <= POLE_TOL {
        return Err(Error::PoleProximity {
            value: den.norm(),
            tol: POLE_TOL,
        });
    }
    Ok(-(base - xa) / den)
}

/// `A_σ(ξ)`: product of two-body factors over the inversions of `σ`.
pub fn amplitude(sigma: &[usize], xi: &[Complex64], rates: Rates) -> Result<Complex64> {
    if sigma.len() != xi.len() {
        return Err(Error::InvalidParameter(format!(
            "permutation of {} elements with {} variables",
            sigma.len(),
            xi.len()
        )));
    }
    inversions(sigma)
        .into_iter()
        .try_fold(Complex64::new(1.0, 0.0), |acc, (a, b)| {
            Ok(acc * s_factor(xi[a], xi[b], rates)?)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn permutation_enumeration() {
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[5], vec![2, 1, 0]);
        assert_eq!(inversions(&[2, 0, 1]), vec![(2, 0), (2, 1)]);
    }

    #[test]
    fn identity_is_one() {
        let xi = [c(0.3, 0.1), c(-0.2, 0.4), c(0.1, -0.3)];
        let a = amplitude(&[0, 1, 2], &xi, Rates::new(0.2).unwrap()).unwrap();
        assert_eq!(a, c(1.0, 0.0));
    }

    #[test]
    fn tasep_swap() {
        let (x1, x2) = (c(0.3, 0.2), c(-0.1, 0.25));
        let a = amplitude(&[1, 0], &[x1, x2], Rates::tasep()).unwrap();
        let expected = -(x1 * x2 - x2) / (x1 * x2 - x1);
        assert!((a - expected).norm() < 1e-14);
    }

    #[test]
    fn pole_detected() {
        // p + q ξ_a ξ_b - ξ_b = 0 at ξ_b = p / (1 - q ξ_a).
        let rates = Rates::new(0.5).unwrap();
        let xa = c(0.2, 0.0);
        let xb = c(0.5 / 0.9, 0.0);
        let err = amplitude(&[1, 0], &[xb, xa], rates).unwrap_err();
        assert!(matches!(err, Error::PoleProximity { .. }));
    }
}
