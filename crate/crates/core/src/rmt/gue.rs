use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::hermitian_eigenvalues;
use crate::rng::{self, Rng};
use crate::stats::Ecdf;
use crate::{Error, Result};

/// Hermitian `n × n` matrix stored densely, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GueMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl GueMatrix {
    /// Builds a Hermitian matrix from its upper triangle (row-major `n × n`
    /// input; the strict lower triangle is overwritten by conjugates and the
    /// diagonal made real).
    pub fn from_upper(n: usize, mut entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "{} entries for a {n} x {n} matrix",
                entries.len()
            )));
        }
        for i in 0..n {
            entries[i * n + i].im = 0.0;
            for j in 0..i {
                entries[i * n + j] = entries[j * n + i].conj();
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_real_symmetric(n: usize, upper: &[f64]) -> Result<Self> {
        Self::from_upper(n, upper.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).re).sum()
    }

    /// `Tr M² = Σ_ij |M_ij|²`.
    pub fn trace_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.trace_sq().sqrt()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                self.entries[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect()
    }
}

pub(crate) fn draw(n: usize, rng: &mut Rng) -> GueMatrix {
    let half = 0.5f64.sqrt();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        entries[i * n + i] = Complex64::new(StandardNormal.sample(rng), 0.0);
        for j in i + 1..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            entries[i * n + j] = Complex64::new(re * half, im * half);
        }
    }
    GueMatrix::from_upper(n, entries).expect("square")
}

/// GUE draw: diagonal `N(0, 1)`, off-diagonal real and imaginary parts
/// independent `N(0, 1/2)`.
pub fn sample_gue(n: usize, seed: u64) -> Result<GueMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(draw(n, &mut rng::root(seed)))
}

/// GUE draw on substream `index` of `seed`.
pub fn sample_gue_substream(n: usize, seed: u64, index: u64) -> Result<GueMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(draw(n, &mut rng::substream(seed, index)))
}

/// Sorted eigenvalues of one matrix, in matrix units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
}

impl SpectralSample {
    pub fn of(m: &GueMatrix) -> Result<Self> {
        Ok(Self {
            n: m.n(),
            eigenvalues: hermitian_eigenvalues(m)?,
        })
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("n >= 1")
    }
}

/// Atoms of mass `1/n` at `y_i / √n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub atoms: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn from_atoms(mut atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptySample);
        }
        atoms.sort_by(f64::total_cmp);
        Ok(Self { atoms })
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.atoms.len() as f64
    }

    pub fn mass(&self) -> f64 {
        self.weight() * self.atoms.len() as f64
    }

    pub fn cdf(&self) -> Ecdf {
        Ecdf::new(&self.atoms).expect("nonempty")
    }

    pub fn moment(&self, k: u32) -> f64 {
        self.atoms.iter().map(|x| x.powi(k as i32)).sum::<f64>() * self.weight()
    }

    /// Bin counts normalized to a density over `bins` equal cells of `[lo, hi]`.
    pub fn histogram(&self, lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64)> {
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &x in &self.atoms {
            if x >= lo && x < hi {
                counts[((x - lo) / width) as usize] += 1;
            }
        }
        counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| (lo + (i as f64 + 0.5) * width, c as f64 * self.weight() / width))
            .collect()
    }
}

pub fn esd(s: &SpectralSample) -> EmpiricalMeasure {
    let scale = (s.n as f64).sqrt();
    EmpiricalMeasure::from_atoms(s.eigenvalues.iter().map(|y| y / scale).collect())
        .expect("n >= 1")
}

/// `(y_max - 2√n) n^{1/6}`: the largest eigenvalue centred at the spectral
/// edge and scaled so that its law tends to F₂.
pub fn edge_rescale(s: &SpectralSample) -> Result<f64> {
    if s.n < 2 {
        return Err(Error::InvalidParameter("edge rescaling needs n >= 2".into()));
    }
    let n = s.n as f64;
    Ok((s.max() - 2.0 * n.sqrt()) * n.powf(1.0 / 6.0))
}

/// Rescaled largest eigenvalues of `samples` independent draws, draw `i` on
/// substream `i` of `seed`.
pub fn edge_ensemble(n: usize, samples: usize, seed: u64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter("edge rescaling needs n >= 2".into()));
    }
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let m = draw(n, &mut rng::substream(seed, i));
            edge_rescale(&SpectralSample::of(&m)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_by_construction() {
        let m = sample_gue(6, 3).unwrap();
        for i in 0..6 {
            assert_eq!(m.get(i, i).im, 0.0);
            for j in 0..6 {
                assert_eq!(m.get(i, j), m.get(j, i).conj());
            }
        }
    }

    #[test]
    fn scalar_case() {
        let m = sample_gue(1, 8).unwrap();
        let s = SpectralSample::of(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![m.get(0, 0).re]);
        let mu = esd(&SpectralSample { n: 1, eigenvalues: vec![0.0] });
        assert_eq!(mu.atoms, vec![0.0]);
        assert_eq!(mu.mass(), 1.0);
    }

    #[test]
    fn off_diagonal_variance() {
        let mut rng = rng::root(77);
        let draws = 100_000;
        let xs: Vec<f64> = (0..draws).map(|_| draw(2, &mut rng).get(0, 1).re).collect();
        let var = xs.iter().map(|x| x * x).sum::<f64>() / draws as f64;
        // Var of a sample variance of N(0, 1/2): 2 σ⁴ / n.
        let se = (2.0 * 0.25 / draws as f64).sqrt();
        assert!((var - 0.5).abs() < 3.0 * se, "{var}");
    }

    #[test]
    fn edge_rescale_behaviour() {
        let at_edge = SpectralSample { n: 16, eigenvalues: vec![0.0, 8.0] };
        assert!(edge_rescale(&at_edge).unwrap().abs() < 1e-15);
        let higher = SpectralSample { n: 16, eigenvalues: vec![0.0, 8.5] };
        assert!(edge_rescale(&higher).unwrap() > 0.0);
        assert!(edge_rescale(&SpectralSample { n: 1, eigenvalues: vec![0.0] }).is_err());
    }

    #[test]
    fn histogram_integrates_to_mass() {
        let mu = EmpiricalMeasure::from_atoms(vec![-1.0, 0.2, 0.3, 1.5]).unwrap();
        let h = mu.histogram(-2.0, 2.0, 8);
        let total: f64 = h.iter().map(|(_, d)| d * 0.5).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
