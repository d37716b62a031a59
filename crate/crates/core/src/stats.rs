//! Empirical distribution functions and Kolmogorov–Smirnov distances.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Right-continuous empirical CDF of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        if sample.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidParameter("sample contains NaN".into()));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// `#{x_i <= s} / m`.
    pub fn eval(&self, s: f64) -> f64 {
        self.sorted.partition_point(|&x| x <= s) as f64 / self.sorted.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsStatistic {
    pub d: f64,
    pub m: usize,
}

/// One-sample KS distance `sup_s |F̂(s) - F(s)|`, attained at sample points.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<KsStatistic> {
    let ecdf = Ecdf::new(sample)?;
    let m = ecdf.len() as f64;
    let d = ecdf
        .sorted()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / m - f).abs().max((f - i as f64 / m).abs())
        })
        .fold(0.0, f64::max);
    Ok(KsStatistic {
        d: d.min(1.0),
        m: ecdf.len(),
    })
}

/// Two-sample KS distance `sup_s |F̂_a(s) - F̂_b(s)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let ea = Ecdf::new(a)?;
    let eb = Ecdf::new(b)?;
    let (xa, xb) = (ea.sorted(), eb.sorted());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Sample mean and (unbiased) standard deviation.
pub fn mean_std(sample: &[f64]) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    if sample.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// Mean and standard error of the mean.
pub fn mean_stderr(sample: &[f64]) -> Result<(f64, f64)> {
    let (mean, std) = mean_std(sample)?;
    Ok((mean, std / (sample.len() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_at_median() {
        let ks = ks_distance(&[0.0], |x| if x < 0.0 { 0.0 } else { 0.5 + x }).unwrap();
        assert_eq!(ks.d, 0.5);
    }

    #[test]
    fn total_mismatch_is_one() {
        let ks = ks_distance(&[1.0, 2.0, 3.0], |_| 0.0).unwrap();
        assert_eq!(ks.d, 1.0);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(matches!(ks_distance(&[], |x| x), Err(Error::EmptySample)));
        assert!(Ecdf::new(&[]).is_err());
    }

    #[test]
    fn ecdf_is_right_continuous() {
        let e = Ecdf::new(&[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.eval(10.0), 1.0);
    }

    #[test]
    fn two_sample_identical_is_zero() {
        let a = [0.3, 0.1, 0.7];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[2.0, 3.0]).unwrap(), 1.0);
    }

    #[test]
    fn uniform_sample_meets_dkw_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let sample: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let ks = ks_distance(&sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert_eq!(ks.m, 10_000);
        // P(D > 0.025) <= 2 exp(-2 m 0.025^2) ~ 7e-6.
        assert!(ks.d < 0.025, "D = {}", ks.d);
    }

    proptest::proptest! {
        #[test]
        fn distance_is_bounded_and_order_free(mut v in proptest::collection::vec(-5.0f64..5.0, 1..60)) {
            let cdf = |x: f64| 1.0 / (1.0 + (-x).exp());
            let d = ks_distance(&v, cdf).unwrap().d;
            proptest::prop_assert!((0.0..=1.0).contains(&d));
            proptest::prop_assert!(d >= 0.5 / v.len() as f64 - 1e-12);
            v.reverse();
            proptest::prop_assert_eq!(ks_distance(&v, cdf).unwrap().d, d);
        }

        #[test]
        fn two_sample_is_symmetric(
            a in proptest::collection::vec(-3.0f64..3.0, 1..40),
            b in proptest::collection::vec(-3.0f64..3.0, 1..40),
        ) {
            let d = ks_two_sample(&a, &b).unwrap();
            proptest::prop_assert_eq!(d, ks_two_sample(&b, &a).unwrap());
            proptest::prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}
