use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::amplitude::{amplitude, permutations, POLE_TOL};
use super::generator;
use crate::asep::Rates;
use crate::{Error, Result};

/// Residual below which a root set is accepted.
pub const ACCEPT_RESIDUAL: f64 = 1e-10;
/// Smallest admissible distance between two roots.
pub const MIN_GAP: f64 = 1e-8;
const HOMOTOPY_STEPS: usize = 50;
const NEWTON_ITERS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheRoots {
    pub roots: Vec<Complex64>,
    pub l: usize,
    pub rates: Rates,
    pub residual: f64,
    pub eigenvalue: Complex64,
}

fn eigenvalue(z: &[Complex64], rates: Rates) -> Complex64 {
    z.iter().map(|&z| rates.p() / z + rates.q() * z - 1.0).sum()
}

fn min_gap(z: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            gap = gap.min((z[i] - z[j]).norm());
        }
    }
    gap
}

impl BetheRoots {
    pub fn n(&self) -> usize {
        self.roots.len()
    }

    /// Free-fermion start `z_j = exp(iπ(N - 1 + 2k_j)/L)`, the exact solution
    /// when every two-body ratio is replaced by 1.
    pub fn start(n: usize, l: usize, quantum_numbers: &[usize]) -> Vec<Complex64> {
        quantum_numbers
            .iter()
            .map(|&k| Complex64::from_polar(1.0, PI * (n as f64 - 1.0 + 2.0 * k as f64) / l as f64))
            .collect()
    }

    /// `v(x) = Σ_σ A_σ(z) Π_i z_i^{x_σ(i)}` at the ordered positions `x`.
    pub fn wavefunction(&self, x: &[i64]) -> Result<Complex64> {
        Ok(self.wavefunction_terms(x)?.0)
    }

    /// Value and the sum of the moduli of its terms.
    fn wavefunction_terms(&self, x: &[i64]) -> Result<(Complex64, f64)> {
        if x.len() != self.n() {
            return Err(Error::InvalidParameter(format!(
                "{} positions for {} roots",
                x.len(),
                self.n()
            )));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for sigma in permutations(self.n()) {
            let mut term = amplitude(&sigma, &self.roots, self.rates)?;
            for (i, z) in self.roots.iter().enumerate() {
                term *= z.powi(x[sigma[i]] as i32);
            }
            scale += term.norm();
            sum += term;
        }
        Ok((sum, scale))
    }

    /// Largest `|v(x_1, ..., x_N) - v(x_2, ..., x_N, x_1 + L)|` over ring
    /// configurations, relative to `max |v|`.
    pub fn periodic_defect(&self) -> Result<f64> {
        let g = generator(self.n(), self.l, self.rates)?;
        let mut worst: f64 = 0.0;
        let mut size: f64 = 0.0;
        for s in g.states() {
            let v = self.wavefunction(s)?;
            let mut shifted: Vec<i64> = s[1..].to_vec();
            shifted.push(s[0] + self.l as i64);
            worst = worst.max((v - self.wavefunction(&shifted)?).norm());
            size = size.max(v.norm());
        }
        Ok(worst / size)
    }
}

/// `max_j |z_j^L - (-1)^{N-1} Π_{i≠j} (p + q z_i z_j - z_j)/(p + q z_j z_i - z_i)|`.
pub fn bethe_residual(z: &[Complex64], n: usize, l: usize, rates: Rates) -> Result<f64> {
    if z.len() != n {
        return Err(Error::InvalidParameter(format!("{} roots for N = {n}", z.len())));
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let (p, q) = (rates.p(), rates.q());
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let mut rhs = Complex64::new(sign, 0.0);
        for i in (0..n).filter(|&i| i != j) {
            let num = p + q * z[i] * z[j] - z[j];
            let den = p + q * z[j] * z[i] - z[i];
            if den.norm() <= POLE_TOL {
                return Err(Error::PoleProximity {
                    value: den.norm(),
                    tol: POLE_TOL,
                });
            }
            rhs *= num / den;
        }
        worst = worst.max((z[j].powi(l as i32) - rhs).norm());
    }
    Ok(worst)
}

/// Cleared-denominator Bethe system along the homotopy `s ∈ [0, 1]`, with
/// each two-body ratio deformed to `((1-s) + s n_ij)/((1-s) + s d_ij)`.
fn homotopy_system(z: &[Complex64], s: f64, l: usize, rates: Rates) -> Vec<Complex64> {
    let n = z.len();
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let (p, q) = (rates.p(), rates.q());
    (0..n)
        .map(|j| {
            let mut lhs = z[j].powi(l as i32);
            let mut rhs = Complex64::new(sign, 0.0);
            for i in (0..n).filter(|&i| i != j) {
                let num = p + q * z[i] * z[j] - z[j];
                let den = p + q * z[j] * z[i] - z[i];
                lhs *= (1.0 - s) + s * den;
                rhs *= (1.0 - s) + s * num;
            }
            lhs - rhs
        })
        .collect()
}

/// Newton's method on the homotopy system at fixed `s`, with a complex
/// finite-difference Jacobian (the system is holomorphic).
fn newton(z: &mut [Complex64], s: f64, l: usize, rates: Rates) -> Result<()> {
    let n = z.len();
    let mut last = f64::INFINITY;
    for _ in 0..NEWTON_ITERS {
        let f = homotopy_system(z, s, l, rates);
        let mut jac = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            let h = 1e-7 * z[k].norm().max(1.0);
            let mut zh = z.to_vec();
            zh[k] += h;
            let fh = homotopy_system(&zh, s, l, rates);
            for j in 0..n {
                jac[(j, k)] = (fh[j] - f[j]) / h;
            }
        }
        let rhs = DVector::from_iterator(n, f.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs).ok_or(Error::NoConvergence {
            iterations: 0,
            residual: f64::NAN,
        })?;
        let size = step.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (zk, dk) in z.iter_mut().zip(step.iter()) {
            *zk += dk;
        }
        if !size.is_finite() {
            break;
        }
        if size < 1e-15 || (size < 1e-12 && size >= last) {
            return Ok(());
        }
        last = size;
    }
    let residual = homotopy_system(z, s, l, rates)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if residual.is_finite() && residual < 1e-11 {
        Ok(())
    } else {
        Err(Error::NoConvergence {
            iterations: NEWTON_ITERS,
            residual,
        })
    }
}

/// Bethe roots reached by continuation from `seed_roots`, which must solve
/// the free-fermion system (see [`BetheRoots::start`]). The two-body ratios
/// are switched on in 50 steps and the end point is polished by Newton.
pub fn bethe_solve(n: usize, l: usize, rates: Rates, seed_roots: &[Complex64]) -> Result<BetheRoots> {
    if n == 0 || n > 3 || l > 10 || n >= l {
        return Err(Error::InvalidParameter(format!(
            "Bethe solver needs 1 <= N <= 3, N < L <= 10; got N = {n}, L = {l}"
        )));
    }
    if seed_roots.len() != n {
        return Err(Error::InvalidParameter(format!("{} seed roots for N = {n}", seed_roots.len())));
    }
    let mut z = seed_roots.to_vec();
    for step in 1..=HOMOTOPY_STEPS {
        newton(&mut z, step as f64 / HOMOTOPY_STEPS as f64, l, rates)?;
    }
    finish(z, l, rates)
}

/// Newton refinement of an approximate solution of the full Bethe system.
pub fn bethe_refine(l: usize, rates: Rates, roots: &[Complex64]) -> Result<BetheRoots> {
    let mut z = roots.to_vec();
    newton(&mut z, 1.0, l, rates)?;
    finish(z, l, rates)
}

fn finish(z: Vec<Complex64>, l: usize, rates: Rates) -> Result<BetheRoots> {
    let n = z.len();
    let gap = min_gap(&z);
    if gap <= MIN_GAP {
        return Err(Error::CollidedRoots { gap });
    }
    if z.iter().any(|v| v.norm() < 1e-8 || !v.norm().is_finite()) {
        return Err(Error::NoConvergence {
            iterations: NEWTON_ITERS,
            residual: f64::INFINITY,
        });
    }
    let residual = bethe_residual(&z, n, l, rates)?;
    if !(residual < ACCEPT_RESIDUAL) {
        return Err(Error::NoConvergence {
            iterations: NEWTON_ITERS,
            residual,
        });
    }
    Ok(BetheRoots {
        eigenvalue: eigenvalue(&z, rates),
        roots: z,
        l,
        rates,
        residual,
    })
}

/// Every distinct root set reached from the free-fermion starts, plus the
/// number of starts whose continuation failed.
#[derive(Debug, Clone)]
pub struct BetheSweep {
    pub solutions: Vec<BetheRoots>,
    pub failures: usize,
}

fn same_root_set(a: &[Complex64], b: &[Complex64]) -> bool {
    let mut used = vec![false; b.len()];
    a.iter().all(|za| {
        match (0..b.len()).find(|&i| !used[i] && (b[i] - za).norm() < 1e-7) {
            Some(i) => {
                used[i] = true;
                true
            }
            None => false,
        }
    })
}

pub fn bethe_solve_all(n: usize, l: usize, rates: Rates) -> BetheSweep {
    let mut solutions: Vec<BetheRoots> = Vec::new();
    let mut failures = 0;
    let mut k: Vec<usize> = (0..n).collect();
    loop {
        match bethe_solve(n, l, rates, &BetheRoots::start(n, l, &k)) {
            Ok(sol) => {
                if !solutions.iter().any(|s| same_root_set(&s.roots, &sol.roots)) {
                    solutions.push(sol);
                }
            }
            Err(_) => failures += 1,
        }
        // Next increasing N-subset of 0..L.
        let Some(i) = (0..n).rev().find(|&i| k[i] < l - n + i) else {
            break;
        };
        k[i] += 1;
        for j in i + 1..n {
            k[j] = k[j - 1] + 1;
        }
    }
    BetheSweep { solutions, failures }
}

/// Eigenvalue and Bethe vector over the states of `generator(N, L, rates)`,
/// scaled to unit max-norm.
pub fn bethe_eigenpair(roots: &BetheRoots) -> Result<(Complex64, Vec<Complex64>)> {
    let g = generator(roots.n(), roots.l, roots.rates)?;
    let mut v = Vec::with_capacity(g.dim());
    let mut scale: f64 = 0.0;
    for s in g.states() {
        let (value, terms) = roots.wavefunction_terms(s)?;
        scale = scale.max(terms);
        v.push(value);
    }
    let size = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(size > 1e-9 * scale) {
        return Err(Error::NullVector);
    }
    for c in v.iter_mut() {
        *c /= size;
    }
    Ok((roots.eigenvalue, v))
}

/// How much of the generator spectrum the Bethe sweep recovers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Coverage {
    pub n: usize,
    pub l: usize,
    pub dim: usize,
    /// Bethe eigenvalues matched one-to-one to generator eigenvalues.
    pub matched: usize,
    /// Bethe eigenvalues with no partner in the spectrum (should be 0).
    pub unmatched: usize,
    pub null_vectors: usize,
    pub failures: usize,
    pub fraction: f64,
}

pub fn spectrum_coverage(n: usize, l: usize, rates: Rates) -> Result<Coverage> {
    let g = generator(n, l, rates)?;
    let spectrum = g.spectrum();
    let sweep = bethe_solve_all(n, l, rates);
    let mut used = vec![false; spectrum.len()];
    let (mut matched, mut unmatched, mut null_vectors) = (0, 0, 0);
    for sol in &sweep.solutions {
        if matches!(bethe_eigenpair(sol), Err(Error::NullVector)) {
            null_vectors += 1;
            continue;
        }
        let best = (0..spectrum.len())
            .filter(|&i| !used[i])
            .min_by(|&a, &b| {
                let da = (spectrum[a] - sol.eigenvalue).norm();
                let db = (spectrum[b] - sol.eigenvalue).norm();
                da.total_cmp(&db)
            });
        match best {
            Some(i) if (spectrum[i] - sol.eigenvalue).norm() < 1e-8 => {
                used[i] = true;
                matched += 1;
            }
            _ => unmatched += 1,
        }
    }
    Ok(Coverage {
        n,
        l,
        dim: g.dim(),
        matched,
        unmatched,
        null_vectors,
        failures: sweep.failures,
        fraction: matched as f64 / g.dim() as f64,
    })
}
