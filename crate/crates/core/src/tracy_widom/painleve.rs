use serde::{Deserialize, Serialize};

use super::airy::{airy, AIRY_RANGE};
use super::ode::{dormand_prince, OdeOptions};
use crate::{Error, Result};

/// Equispaced grid `lo, lo + step, ..., hi`; the ODE starts at `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PainleveGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for PainleveGrid {
    fn default() -> Self {
        Self {
            lo: -10.0,
            hi: 8.0,
            step: 0.005,
        }
    }
}

impl PainleveGrid {
    fn points(&self) -> Result<Vec<f64>> {
        if !(self.lo < self.hi && self.step > 0.0) {
            return Err(Error::InvalidParameter(format!("bad grid {self:?}")));
        }
        if self.hi > AIRY_RANGE.1 {
            return Err(Error::OutOfRange {
                what: "grid start",
                value: self.hi,
                lo: AIRY_RANGE.0,
                hi: AIRY_RANGE.1,
            });
        }
        let count = ((self.hi - self.lo) / self.step).round() as usize;
        Ok((0..=count).map(|i| self.hi - i as f64 * self.step).rev().collect())
    }
}

/// Hastings–McLeod solution on a grid, with the tail integrals
/// `I0(s) = ∫_s^∞ q²` and `I1(s) = ∫_s^∞ x q²` carried along.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PainleveSolution {
    pub s: Vec<f64>,
    pub q: Vec<f64>,
    pub dq: Vec<f64>,
    pub i0: Vec<f64>,
    pub i1: Vec<f64>,
}

impl PainleveSolution {
    pub fn step(&self) -> f64 {
        self.s[1] - self.s[0]
    }

    /// Largest `|q'' - (s q + 2 q³)|` at interior points, `q''` by central differences.
    pub fn ode_residual(&self) -> f64 {
        let h = self.step();
        (1..self.s.len() - 1)
            .map(|i| {
                let second = (self.q[i + 1] - 2.0 * self.q[i] + self.q[i - 1]) / (h * h);
                (second - (self.s[i] * self.q[i] + 2.0 * self.q[i].powi(3))).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Tail integrals of `Ai²` beyond `s`, the starting values of `I0`, `I1`.
pub(crate) fn airy_tails(s: f64) -> Result<(f64, f64)> {
    let a = airy(s)?;
    let (ai, dai) = (a.ai, a.ai_prime);
    let i0 = dai * dai - s * ai * ai;
    let i1 = -(s * s * ai * ai - s * dai * dai + ai * dai) / 3.0;
    Ok((i0, i1))
}

/// Below this point the backward integration has drifted measurably off the
/// separatrix (round-off feeds the growing mode), so it only seeds the
/// boundary-value solve there.
const TRUSTED_DOWN_TO: f64 = -6.0;

/// Hastings–McLeod solution on `grid`. The backward integration from
/// `grid.hi` is followed, when the grid extends below -6, by a Newton solve
/// of the Numerov discretization with `q(hi) = Ai(hi)` and the `s → -∞`
/// asymptotic series at `lo`; tail integrals are then accumulated from `hi`.
pub fn hastings_mcleod(grid: PainleveGrid) -> Result<PainleveSolution> {
    if grid.lo >= TRUSTED_DOWN_TO {
        return hastings_mcleod_scaled(grid, 1.0);
    }
    let points = grid.points()?;
    let n = points.len();
    let mut q: Vec<f64> = points.iter().map(|&s| asymptotic_left(s)).collect();
    let first = points.iter().position(|&s| s >= TRUSTED_DOWN_TO - 1e-9).expect("grid reaches -6");
    let seed = hastings_mcleod_scaled(
        PainleveGrid {
            lo: points[first],
            ..grid
        },
        1.0,
    )?;
    q[first..].copy_from_slice(&seed.q);
    q[0] = asymptotic_left(points[0]);
    q[n - 1] = airy(grid.hi)?.ai;
    numerov_polish(&points, &mut q)?;
    with_integrals(points, q)
}

/// `q(s) ~ √(-s/2) (1 + s⁻³/8 - 73 s⁻⁶/128 + 10657 s⁻⁹/1024 - 13912277 s⁻¹²/32768)`.
fn asymptotic_left(s: f64) -> f64 {
    let u = s.powi(-3);
    let series = 1.0 + u / 8.0 - 73.0 * u * u / 128.0 + 10657.0 * u.powi(3) / 1024.0
        - 13_912_277.0 * u.powi(4) / 32768.0;
    (-s / 2.0).sqrt() * series
}

/// Newton iterations on `q_{i+1} - 2q_i + q_{i-1} = h²/12 (f_{i+1} + 10 f_i + f_{i-1})`,
/// `f = s q + 2 q³`, with both end values held fixed.
fn numerov_polish(s: &[f64], q: &mut [f64]) -> Result<()> {
    let n = s.len();
    let h = s[1] - s[0];
    let c = h * h / 12.0;
    let f = |i: usize, q: &[f64]| s[i] * q[i] + 2.0 * q[i].powi(3);
    let df = |i: usize, q: &[f64]| s[i] + 6.0 * q[i] * q[i];
    let m = n - 2;
    let (mut sub, mut diag, mut sup, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for iteration in 0..50 {
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let i = k + 1;
            let r = q[i + 1] - 2.0 * q[i] + q[i - 1] - c * (f(i + 1, q) + 10.0 * f(i, q) + f(i - 1, q));
            worst = worst.max(r.abs());
            rhs[k] = -r;
            sub[k] = 1.0 - c * df(i - 1, q);
            diag[k] = -2.0 - 10.0 * c * df(i, q);
            sup[k] = 1.0 - c * df(i + 1, q);
        }
        // Thomas algorithm.
        for k in 1..m {
            let w = sub[k] / diag[k - 1];
            diag[k] -= w * sup[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        let mut dq = vec![0.0; m];
        dq[m - 1] = rhs[m - 1] / diag[m - 1];
        for k in (0..m - 1).rev() {
            dq[k] = (rhs[k] - sup[k] * dq[k + 1]) / diag[k];
        }
        let step = dq.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        for k in 0..m {
            q[k + 1] += dq[k];
        }
        if !step.is_finite() {
            return Err(Error::BlowUp { s: s[0] });
        }
        if step < 1e-14 || (iteration > 0 && worst < 1e-16) {
            return Ok(());
        }
    }
    Err(Error::NoConvergence {
        iterations: 50,
        residual: f64::NAN,
    })
}

/// `q'` by fourth-order differences and `I0`, `I1` by fourth-order interval
/// quadrature accumulated leftwards from the Airy tails at the right end.
fn with_integrals(s: Vec<f64>, q: Vec<f64>) -> Result<PainleveSolution> {
    let n = s.len();
    let h = s[1] - s[0];
    let dq: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => (-25.0 * q[0] + 48.0 * q[1] - 36.0 * q[2] + 16.0 * q[3] - 3.0 * q[4]) / (12.0 * h),
            1 => (-3.0 * q[0] - 10.0 * q[1] + 18.0 * q[2] - 6.0 * q[3] + q[4]) / (12.0 * h),
            _ if i == n - 2 => {
                (3.0 * q[n - 1] + 10.0 * q[n - 2] - 18.0 * q[n - 3] + 6.0 * q[n - 4] - q[n - 5]) / (12.0 * h)
            }
            _ if i == n - 1 => airy(s[n - 1]).map(|a| a.ai_prime).unwrap_or(f64::NAN),
            _ => (q[i - 2] - 8.0 * q[i - 1] + 8.0 * q[i + 1] - q[i + 2]) / (12.0 * h),
        })
        .collect();
    let g0: Vec<f64> = q.iter().map(|v| v * v).collect();
    let g1: Vec<f64> = g0.iter().zip(&s).map(|(g, x)| g * x).collect();
    let interval = |g: &[f64], i: usize| -> f64 {
        // ∫ over [s_i, s_{i+1}] with a cubic through four neighbouring points.
        if i >= 1 && i + 2 < n {
            h / 24.0 * (-g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2])
        } else if i == 0 {
            h / 24.0 * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3])
        } else {
            h / 24.0 * (9.0 * g[i + 1] + 19.0 * g[i] - 5.0 * g[i - 1] + g[i - 2])
        }
    };
    let (t0, t1) = airy_tails(s[n - 1])?;
    let mut i0 = vec![0.0; n];
    let mut i1 = vec![0.0; n];
    i0[n - 1] = t0;
    i1[n - 1] = t1;
    for i in (0..n - 1).rev() {
        i0[i] = i0[i + 1] + interval(&g0, i);
        i1[i] = i1[i + 1] + interval(&g1, i);
    }
    Ok(PainleveSolution { s, q, dq, i0, i1 })
}

/// Integrates Painlevé II backward from `grid.hi` with `q = scale · Ai`,
/// `q' = scale · Ai'` there. `scale = 1` follows the Hastings–McLeod
/// solution; any other value leaves the separatrix and blows up or decays.
pub fn hastings_mcleod_scaled(grid: PainleveGrid, scale: f64) -> Result<PainleveSolution> {
    let points = grid.points()?;
    let s0 = grid.hi;
    let a = airy(s0)?;
    let (i0, i1) = airy_tails(s0)?;
    let mut state = vec![scale * a.ai, scale * a.ai_prime, scale * scale * i0, scale * scale * i1];
    let rhs = |s: f64, y: &[f64]| {
        let q2 = y[0] * y[0];
        vec![y[1], s * y[0] + 2.0 * q2 * y[0], -q2, -s * q2]
    };
    let opts = OdeOptions {
        rtol: 1e-13,
        atol: 1e-16,
        ..OdeOptions::default()
    };
    let n = points.len();
    let mut out = PainleveSolution {
        s: points.clone(),
        q: vec![0.0; n],
        dq: vec![0.0; n],
        i0: vec![0.0; n],
        i1: vec![0.0; n],
    };
    let mut h = 0.0;
    for idx in (0..n).rev() {
        let target = points[idx];
        let from = if idx + 1 < n { points[idx + 1] } else { s0 };
        state = dormand_prince(rhs, from, &state, target, &mut h, opts)?;
        out.q[idx] = state[0];
        out.dq[idx] = state[1];
        out.i0[idx] = state[2];
        out.i1[idx] = state[3];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separatrix_properties() {
        let sol = hastings_mcleod(PainleveGrid::default()).unwrap();
        let last = sol.s.len() - 1;
        assert_eq!(sol.s[last], 8.0);
        assert_eq!(sol.q[last], airy(8.0).unwrap().ai);
        assert!(sol.q.iter().all(|&q| q > 0.0));
        let zero = sol.s.iter().position(|s| s.abs() < 1e-9).unwrap();
        assert!((sol.q[zero] - 0.367_061_55).abs() < 1e-6, "q(0) = {}", sol.q[zero]);
        assert!(sol.q[zero..].windows(2).all(|w| w[1] < w[0]));
        assert!(sol.ode_residual() < 1e-6, "{}", sol.ode_residual());
        // Far left q ~ √(-s/2).
        assert!((sol.q[0] / 5f64.sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn polish_agrees_with_integration_where_trusted() {
        let polished = hastings_mcleod(PainleveGrid::default()).unwrap();
        let ivp = hastings_mcleod_scaled(PainleveGrid { lo: -6.0, hi: 8.0, step: 0.005 }, 1.0).unwrap();
        let offset = polished.s.len() - ivp.s.len();
        for (i, q) in ivp.q.iter().enumerate() {
            if ivp.s[i] < -4.0 {
                continue;
            }
            assert!((polished.q[offset + i] - q).abs() < 1e-7, "s = {}", ivp.s[i]);
            assert!((polished.i0[offset + i] - ivp.i0[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn perturbed_start_blows_up() {
        let err = hastings_mcleod_scaled(PainleveGrid::default(), 1.0 + 1e-3).unwrap_err();
        match err {
            Error::BlowUp { s } => assert!(s > -8.0, "blew up at {s}"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn tail_integrals_match_quadrature() {
        let (i0, i1) = airy_tails(3.0).unwrap();
        let h = 1e-3;
        let (mut q0, mut q1) = (0.0, 0.0);
        for k in 0..9000 {
            let x = 3.0 + (k as f64 + 0.5) * h;
            let a = airy(x).unwrap().ai;
            q0 += a * a * h;
            q1 += x * a * a * h;
        }
        assert!((i0 - q0).abs() < 1e-9 && (i1 - q1).abs() < 1e-9);
    }
}
