use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{GueMatrix, SpectralSample};
use crate::{Error, Result};

pub fn eigenvalues(m: &GueMatrix) -> Result<SpectralSample> {
    SpectralSample::of(m)
}

/// Householder reduction to a real symmetric tridiagonal matrix followed by
/// implicit-shift QL. Returns ascending eigenvalues.
pub fn hermitian_eigenvalues(m: &GueMatrix) -> Result<Vec<f64>> {
    let n = m.n();
    let mut a: Vec<Complex64> = m.entries().to_vec();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut p = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let norm = (lo..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[lo * n + k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        // v = (x - α e₁) / |x - α e₁|, so that H x = α e₁ with H = I - 2 v v*.
        for i in lo..n {
            v[i] = a[i * n + k];
        }
        v[lo] -= alpha;
        let vn = (lo..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for x in &mut v[lo..n] {
            *x /= vn;
        }
        // p = A₂₂ v, κ = v* p, w = p - κ v; A₂₂ -= 2 (v w* + w v*).
        for i in lo..n {
            p[i] = (lo..n).map(|j| a[i * n + j] * v[j]).sum();
        }
        let kappa: Complex64 = (lo..n).map(|i| v[i].conj() * p[i]).sum();
        for i in lo..n {
            p[i] -= kappa * v[i];
        }
        for i in lo..n {
            for j in lo..n {
                a[i * n + j] -= 2.0 * (v[i] * p[j].conj() + p[i] * v[j].conj());
            }
        }
        a[lo * n + k] = alpha;
        a[k * n + lo] = alpha.conj();
        for i in lo + 1..n {
            a[i * n + k] = Complex64::new(0.0, 0.0);
            a[k * n + i] = Complex64::new(0.0, 0.0);
        }
    }
    for i in 0..n {
        diag[i] = a[i * n + i].re;
        if i + 1 < n {
            // A diagonal unitary rotates each complex sub-diagonal entry onto its modulus.
            off[i] = a[(i + 1) * n + i].norm();
        }
    }
    tridiagonal_eigenvalues(diag, off)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// sub-diagonal `e` (`e[i]` couples `i` and `i + 1`), ascending.
pub fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    e.resize(n, 0.0);
    if n > 0 {
        e[n - 1] = 0.0;
    }
    let cap = 50 * n.max(1);
    let mut iterations = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > cap {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvector for a computed eigenvalue by two steps of inverse iteration,
/// normalized to unit length.
pub fn eigenvector(m: &GueMatrix, lambda: f64) -> Result<Vec<Complex64>> {
    let n = m.n();
    let shift = lambda + 1e-10 * m.norm().max(1.0);
    let a = DMatrix::from_fn(n, n, |i, j| {
        m.get(i, j) - if i == j { Complex64::new(shift, 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    let lu = a.lu();
    let mut x = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.3));
    for _ in 0..3 {
        x = lu.solve(&x).ok_or(Error::NullVector)?;
        let norm = x.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NullVector);
        }
        x /= Complex64::new(norm, 0.0);
    }
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmt::sample_gue;

    #[test]
    fn diagonal_input() {
        let n = 6;
        let mut upper = vec![0.0; n * n];
        for i in 0..n {
            upper[i * n + i] = (i + 1) as f64;
        }
        let m = GueMatrix::from_real_symmetric(n, &upper).unwrap();
        let ev = hermitian_eigenvalues(&m).unwrap();
        assert_eq!(ev, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn pauli_x() {
        let m = GueMatrix::from_real_symmetric(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let ev = hermitian_eigenvalues(&m).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn traces_and_reconstruction() {
        for (n, seed) in [(3, 1), (17, 2), (60, 3)] {
            let m = sample_gue(n, seed).unwrap();
            let ev = hermitian_eigenvalues(&m).unwrap();
            assert!(ev.windows(2).all(|w| w[0] <= w[1]));
            let tr: f64 = ev.iter().sum();
            let tr2: f64 = ev.iter().map(|x| x * x).sum();
            assert!((tr - m.trace()).abs() < 1e-8 * n as f64);
            assert!((tr2 - m.trace_sq()).abs() < 1e-6 * n as f64);
            for &lambda in [ev[0], ev[n / 2], ev[n - 1]].iter() {
                let v = eigenvector(&m, lambda).unwrap();
                let mv = m.apply(&v);
                let res = mv
                    .iter()
                    .zip(&v)
                    .map(|(a, x)| (a - x * lambda).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-8 * m.norm(), "n = {n}, λ = {lambda}: {res}");
            }
        }
    }

    #[test]
    fn matches_dense_reference() {
        let m = sample_gue(9, 12).unwrap();
        let ours = hermitian_eigenvalues(&m).unwrap();
        // Real 2n × 2n embedding [[A, -B], [B, A]] doubles every eigenvalue.
        let n = 9;
        let big = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let z = m.get(i % n, j % n);
            match (i < n, j < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let mut reference: Vec<f64> = big.symmetric_eigenvalues().iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        for (k, lambda) in ours.iter().enumerate() {
            assert!((lambda - reference[2 * k]).abs() < 1e-10);
            assert!((lambda - reference[2 * k + 1]).abs() < 1e-10);
        }
    }
}
