use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::airy::AIRY_RANGE;
use super::painleve::{airy_tails, PainleveSolution};
use crate::{Error, Result};

pub const TW_MEAN: f64 = -1.771_086_807_411;
const TABLE_STEP: f64 = 0.01;

pub const TW_VAR: f64 = 0.813_194_792_832_9;
pub const TW_STD: f64 = 0.901_773_138_229_843_3;

/// F₂ and its density on the Painlevé grid,
/// `F₂(s) = exp(-∫_s^∞ (x - s) q(x)² dx)`, `F₂' = F₂ ∫_s^∞ q²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TWDistribution {
    pub solution: PainleveSolution,
    pub cdf: Vec<f64>,
    pub pdf: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl TWDistribution {
    pub fn new(solution: PainleveSolution) -> Result<Self> {
        let s = &solution.s;
        if s.first().is_none_or(|&a| a > -10.0 + 1e-9) || s.last().is_none_or(|&b| b < 8.0 - 1e-9) {
            return Err(Error::GridCoverage("[-10, 8]".into()));
        }
        let cdf: Vec<f64> = (0..s.len())
            .map(|i| (-(solution.i1[i] - s[i] * solution.i0[i])).exp())
            .collect();
        let pdf: Vec<f64> = cdf.iter().zip(&solution.i0).map(|(f, i0)| f * i0).collect();
        let (mean, std) = simpson_moments(s, &pdf);
        Ok(Self { solution, cdf, pdf, mean, std })
    }

    pub fn grid(&self) -> &[f64] {
        &self.solution.s
    }

    /// F₂ at any `s ≥ -10`: cubic Hermite interpolation of `(F₂, F₂')` on the
    /// grid, the Airy tail beyond it.
    pub fn cdf_at(&self, s: f64) -> Result<f64> {
        let grid = self.grid();
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        if s.is_nan() || s < lo {
            return Err(Error::GridCoverage(format!("s = {s} below {lo}")));
        }
        if s >= hi {
            if s > AIRY_RANGE.1 {
                return Ok(1.0);
            }
            let (i0, i1) = airy_tails(s)?;
            return Ok((-(i1 - s * i0)).exp());
        }
        let h = grid[1] - grid[0];
        let i = (((s - lo) / h).floor() as usize).min(grid.len() - 2);
        let u = (s - grid[i]) / h;
        let (f0, f1) = (self.cdf[i], self.cdf[i + 1]);
        let (d0, d1) = (self.pdf[i] * h, self.pdf[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        Ok((2.0 * u3 - 3.0 * u2 + 1.0) * f0
            + (u3 - 2.0 * u2 + u) * d0
            + (-2.0 * u3 + 3.0 * u2) * f1
            + (u3 - u2) * d1)
    }

    /// F₂ with values below the grid clamped to 0 (F₂(-10) is below 1e-6).
    pub fn cdf_clamped(&self, s: f64) -> f64 {
        self.cdf_at(s).unwrap_or(0.0)
    }

    /// `s*` with `F₂(s*) = 1/2`, by bisection.
    pub fn median(&self) -> f64 {
        let (mut a, mut b) = (-10.0, 8.0);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if self.cdf_clamped(m) < 0.5 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    /// Rows `(s, q, F₂, pdf)` every 0.01 (or every grid point on coarser grids).
    pub fn table(&self) -> Vec<(f64, f64, f64, f64)> {
        let grid = self.grid();
        let stride = ((TABLE_STEP / (grid[1] - grid[0])).round() as usize).max(1);
        (0..grid.len())
            .step_by(stride)
            .map(|i| (self.solution.s[i], self.solution.q[i], self.cdf[i], self.pdf[i]))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["s", "q", "F2", "pdf"])?;
        for (s, q, f, p) in self.table() {
            w.write_record([format!("{s:.2}"), format!("{q:.15e}"), format!("{f:.15e}"), format!("{p:.15e}")])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(())
    }
}

fn simpson_moments(s: &[f64], pdf: &[f64]) -> (f64, f64) {
    let h = s[1] - s[0];
    let intervals = s.len() - 1;
    let integrate = |f: &dyn Fn(usize) -> f64| -> f64 {
        // Simpson on the even part, trapezoid on a leftover interval.
        let even = intervals - intervals % 2;
        let mut acc = f(0) + f(even);
        for i in 1..even {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i);
        }
        let mut total = acc * h / 3.0;
        if even < intervals {
            total += 0.5 * h * (f(even) + f(intervals));
        }
        total
    };
    let m1 = integrate(&|i| s[i] * pdf[i]);
    let m2 = integrate(&|i| s[i] * s[i] * pdf[i]);
    (m1, (m2 - m1 * m1).sqrt())
}

pub fn f2_cdf(dist: &TWDistribution, s: f64) -> Result<f64> {
    dist.cdf_at(s)
}

pub fn f2_moments(dist: &TWDistribution) -> (f64, f64) {
    (dist.mean, dist.std)
}

/// Writes the table without a CSV dependency in callers that only hold a writer.
pub fn write_table<W: Write>(dist: &TWDistribution, mut out: W) -> std::io::Result<()> {
    writeln!(out, "s,q,F2,pdf")?;
    for (s, q, f, p) in dist.table() {
        writeln!(out, "{s:.2},{q:.15e},{f:.15e},{p:.15e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracy_widom::{hastings_mcleod, PainleveGrid};
    use std::sync::OnceLock;

    fn dist() -> &'static TWDistribution {
        static D: OnceLock<TWDistribution> = OnceLock::new();
        D.get_or_init(|| TWDistribution::new(hastings_mcleod(PainleveGrid::default()).unwrap()).unwrap())
    }

    #[test]
    fn moments_match_reference() {
        let (m, s) = f2_moments(dist());
        assert!((m - TW_MEAN).abs() < 1e-4, "mean {m}");
        assert!((s * s - TW_VAR).abs() < 1e-4, "var {}", s * s);
        assert!((s - TW_STD).abs() < 1e-4, "std {s}");
    }

    #[test]
    fn cdf_shape() {
        let d = dist();
        assert!(d.cdf[0] < 1e-6);
        assert!(*d.cdf.last().unwrap() > 1.0 - 1e-10);
        assert!(d.cdf.windows(2).all(|w| w[1] >= w[0]));
        assert!(d.pdf.iter().all(|&p| p >= 0.0));
        let h = d.grid()[1] - d.grid()[0];
        let mass: f64 = d.pdf.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
        let med = d.median();
        assert!(med > -2.0 && med < -1.0);
        assert!(f2_cdf(d, -11.0).is_err());
        assert!((f2_cdf(d, 9.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pdf_is_derivative_of_cdf() {
        let d = dist();
        let mut worst: f64 = 0.0;
        for i in 0..=1000 {
            let s = -6.0 + 0.01 * i as f64;
            let h = 1e-4;
            let fd = (f2_cdf(d, s + h).unwrap() - f2_cdf(d, s - h).unwrap()) / (2.0 * h);
            let idx = ((s + 10.0) / (d.grid()[1] - d.grid()[0])).round() as usize;
            worst = worst.max((fd - d.pdf[idx]).abs());
        }
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn table_round_trip() {
        let mut buf = Vec::new();
        write_table(dist(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1802);
        assert!(text.starts_with("s,q,F2,pdf\n-10.00,"));
    }
}
