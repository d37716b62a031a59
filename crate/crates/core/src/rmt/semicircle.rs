use std::f64::consts::PI;

use num_complex::Complex64;

use super::EmpiricalMeasure;
use crate::{Error, Result};

/// Semicircle density `(2π)^{-1} √(4 - x²)` on `[-2, 2]`.
pub fn semicircle(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// `∫ x^k dμ_sc` by the substitution `x = 2 sin θ`, which turns the moment
/// into a smooth periodic integral that the trapezoid rule resolves exactly.
pub fn semicircle_moment(k: u32) -> f64 {
    let m = 64 + 2 * k as usize;
    let h = 2.0 * PI / m as f64;
    let sum: f64 = (0..m)
        .map(|i| {
            let th = i as f64 * h;
            let x = 2.0 * th.sin();
            x.powi(k as i32) * 4.0 * th.cos().powi(2)
        })
        .sum();
    // The full period covers [-π/2, π/2] twice.
    sum * h / (2.0 * PI) / 2.0
}

/// Catalan numbers `C_0..=C_k` by the convolution recurrence.
pub fn catalan(k: usize) -> Vec<u64> {
    let mut c = vec![1u64];
    for m in 1..=k {
        c.push((0..m).map(|i| c[i] * c[m - 1 - i]).sum());
    }
    c
}

/// `s_μ(z) = ∫ (x - z)^{-1} dμ(x)` of an empirical measure.
pub fn stieltjes(mu: &EmpiricalMeasure, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 {
        return Err(Error::InvalidParameter(format!("Stieltjes transform at real z = {}", z.re)));
    }
    let w = mu.weight();
    Ok(mu.atoms.iter().map(|&x| 1.0 / (x - z)).sum::<Complex64>() * w)
}

/// Root of `s² + z s + 1 = 0` with `Im s` of the same sign as `Im z`.
pub fn semicircle_stieltjes(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 {
        return Err(Error::InvalidParameter(format!("Stieltjes transform at real z = {}", z.re)));
    }
    let root = (z * z - 4.0).sqrt();
    let a = (-z + root) / 2.0;
    let b = (-z - root) / 2.0;
    Ok(if a.im * z.im > 0.0 { a } else { b })
}

/// Density recovered from a Stieltjes transform,
/// `(s(x + ib) - s(x - ib)) / (2πi)` at a small `b > 0`.
pub fn invert_stieltjes<F>(s: F, x: f64, b: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if b <= 0.0 {
        return Err(Error::InvalidParameter(format!("b = {b} must be positive")));
    }
    let up = s(Complex64::new(x, b))?;
    let down = s(Complex64::new(x, -b))?;
    Ok(((up - down) / Complex64::new(0.0, 2.0 * PI)).re)
}

/// Coefficients `c_0..c_order` of `-s(z) = Σ_k c_k z^{-k-1}` at large `z`,
/// from the fixed point `s = -w - w s²` in `w = 1/z`.
pub fn semicircle_stieltjes_series(order: usize) -> Vec<u64> {
    // a[k] is the coefficient of w^{k+1} in -s.
    let mut a = vec![0u64; order + 1];
    a[0] = 1;
    for k in 1..=order {
        // -s = w + w (-s)²: coefficient of w^{k+1} is Σ_{i+j = k-1} a_i a_j over w^{i+1} w^{j+1}.
        if k >= 2 {
            a[k] = (0..=k - 2).map(|i| a[i] * a[k - 2 - i]).sum();
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_and_cdf() {
        assert!((semicircle(0.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(semicircle(2.5), 0.0);
        assert!((semicircle_cdf(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(semicircle_cdf(-2.0), 0.0);
        assert_eq!(semicircle_cdf(2.0), 1.0);
        for i in 0..40 {
            let x = -1.95 + 0.1 * i as f64;
            let h = 1e-5;
            let d = (semicircle_cdf(x + h) - semicircle_cdf(x - h)) / (2.0 * h);
            assert!((d - semicircle(x)).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn even_moments_are_catalan() {
        let c = catalan(5);
        assert_eq!(c, vec![1, 1, 2, 5, 14, 42]);
        for k in 0..=5u32 {
            assert!((semicircle_moment(2 * k) - c[k as usize] as f64).abs() < 1e-8);
            assert!(semicircle_moment(2 * k + 1).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_point_and_branch() {
        let z = Complex64::new(1.0, 1.0);
        let s = semicircle_stieltjes(z).unwrap();
        assert!((s * (z + s) + 1.0).norm() < 1e-12);
        assert!(s.im > 0.0);
        let big = Complex64::new(0.0, 100.0);
        assert!((semicircle_stieltjes(big).unwrap() + 1.0 / big).norm() < 1e-3);
        assert!(semicircle_stieltjes(Complex64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn inversion_recovers_density() {
        for i in 0..39 {
            let x = -1.9 + 0.1 * i as f64;
            let d = invert_stieltjes(semicircle_stieltjes, x, 1e-4).unwrap();
            assert!((d - semicircle(x)).abs() < 1e-3, "x = {x}");
        }
    }

    #[test]
    fn large_z_series() {
        let a = semicircle_stieltjes_series(6);
        assert_eq!(a, vec![1, 0, 1, 0, 2, 0, 5]);
        // Compare against the closed form far from the cut.
        let z = Complex64::new(0.0, 40.0);
        let approx: Complex64 = a
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * z.powi(-(k as i32) - 1))
            .sum();
        assert!((approx + semicircle_stieltjes(z).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn empirical_transform_decays_like_mass() {
        let mu = EmpiricalMeasure::from_atoms(vec![-1.0, 0.5, 1.2]).unwrap();
        let z = Complex64::new(0.0, 1e4);
        assert!((stieltjes(&mu, z).unwrap() + 1.0 / z).norm() < 1e-7);
    }
}
