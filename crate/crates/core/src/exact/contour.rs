use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::amplitude::{inversions, permutations, s_factor, POLE_TOL};
use crate::asep::Rates;
use crate::{Error, Result};

/// Largest particle number handled by the contour formula.
pub const MAX_PARTICLES: usize = 3;
/// Allowed change of the value between `M` and `2M` nodes.
pub const CONVERGENCE_TOL: f64 = 1e-8;
/// Allowed imaginary part of the quadrature value.
pub const IMAG_TOL: f64 = 1e-9;

/// A circle `|ξ| = radius` sampled at `nodes` equispaced points, shared by
/// all N integration variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub radius: f64,
    pub nodes: usize,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            radius: 0.5,
            nodes: 128,
        }
    }
}

impl ContourSpec {
    pub fn new(radius: f64, nodes: usize) -> Result<Self> {
        let spec = Self { radius, nodes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "contour radius {} not in (0, 1)",
                self.radius
            )));
        }
        if self.nodes < 32 {
            return Err(Error::InvalidParameter(format!(
                "{} quadrature nodes, need at least 32",
                self.nodes
            )));
        }
        Ok(())
    }

    /// Radius actually used for the given forward rates. The S-matrix pole
    /// nearest to the circle sits at modulus `p'/(1 + q'r)`; when the
    /// requested radius has `r(1 + q'r)/p' > 0.8` it is replaced by the root
    /// of `r(1 + q'r) = 0.8 p'`, so the aliased pole contribution decays like
    /// `0.8^M`.
    fn effective_radius(&self, fw: Rates) -> Result<f64> {
        let (p, q) = (fw.p(), fw.q());
        if p <= 0.0 {
            return Err(Error::PoleProximity { value: 0.0, tol: POLE_TOL });
        }
        if self.radius * (1.0 + q * self.radius) <= 0.8 * p {
            return Ok(self.radius);
        }
        let r = if q > 0.0 {
            // Stable form of (-1 + √(1 + 3.2 p q)) / 2q.
            1.6 * p / (1.0 + (1.0 + 3.2 * p * q).sqrt())
        } else {
            0.8 * p
        };
        Ok(r)
    }
}

/// Outcome of a contour evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourValue {
    pub value: f64,
    pub imag: f64,
    pub radius: f64,
    pub nodes: usize,
    /// |value(M) - value(2M)|.
    pub change: f64,
}

/// The problem in a frame where the end point lies to the right of the start
/// on average. With `ε(ξ) = p'/ξ + q'ξ - 1` the forward equation is solved
/// when `p'` is the right rate, so the direct frame uses the mirrored rates.
/// End points with `Σx < Σy` are handled by reflecting `x -> -x`, which flips
/// the sign of the shift; otherwise the integrand would carry a factor
/// `r^{Σx - Σy}` and cancel catastrophically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Direct,
    Mirrored,
}

struct Frame {
    y: Vec<i64>,
    fw: Rates,
    side: Side,
}

fn mirror(v: &[i64]) -> Vec<i64> {
    v.iter().rev().map(|x| -x).collect()
}

fn frame(y: &[i64], rates: Rates, side: Side) -> Frame {
    match side {
        Side::Direct => Frame {
            y: y.to_vec(),
            fw: rates.reflected(),
            side,
        },
        Side::Mirrored => Frame {
            y: mirror(y),
            fw: rates,
            side,
        },
    }
}

/// Frame for the end point `x`, or `None` when the motion is one-sided and
/// `x` lies on the unreachable side, so the probability is exactly zero.
fn side_for(y: &[i64], x: &[i64], rates: Rates) -> Option<Side> {
    let shift: i64 = x.iter().sum::<i64>() - y.iter().sum::<i64>();
    if shift >= 0 && rates.q() > 0.0 {
        Some(Side::Direct)
    } else if shift <= 0 && rates.p() > 0.0 {
        Some(Side::Mirrored)
    } else {
        None
    }
}

impl Frame {
    fn end(&self, x: &[i64]) -> Vec<i64> {
        match self.side {
            Side::Direct => x.to_vec(),
            Side::Mirrored => mirror(x),
        }
    }
}

fn check_positions(name: &str, v: &[i64]) -> Result<()> {
    if v.is_empty() || v.len() > MAX_PARTICLES {
        return Err(Error::InvalidParameter(format!(
            "{name} has {} particles, need 1..={MAX_PARTICLES}",
            v.len()
        )));
    }
    if v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidOrdering(format!("{name} = {v:?} not strictly increasing")));
    }
    Ok(())
}

/// Nodes, exponential factors and the two-body factor table of one circle.
struct Grid {
    m: usize,
    xi: Vec<Complex64>,
    growth: Vec<Complex64>,
    /// `pair[a * m + b]` = S-factor with ξ_a at node a and ξ_b at node b.
    pair: Vec<Complex64>,
}

impl Grid {
    fn new(r: f64, m: usize, t: f64, fw: Rates, need_pairs: bool) -> Result<Self> {
        let xi: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / m as f64))
            .collect();
        let growth = xi
            .iter()
            .map(|&z| ((fw.p() / z + fw.q() * z - 1.0) * t).exp())
            .collect();
        let mut pair = Vec::new();
        if need_pairs {
            pair.reserve(m * m);
            for &a in &xi {
                for &b in &xi {
                    pair.push(s_factor(a, b, fw)?);
                }
            }
        }
        Ok(Self { m, xi, growth, pair })
    }
}

/// One permutation term prepared for summation over node tuples.
struct Term {
    /// `weights[k][node]` for variable k.
    weights: Vec<Vec<Complex64>>,
    inversions: Vec<(usize, usize)>,
}

fn direct_sum(grid: &Grid, y: &[i64], x: &[i64]) -> Complex64 {
    let n = y.len();
    let m = grid.m;
    let terms: Vec<Term> = permutations(n)
        .into_iter()
        .map(|sigma| {
            // Variable k = σ(j) carries ξ_k^{x_j - y_k}.
            let mut weights = vec![Vec::new(); n];
            for (j, &k) in sigma.iter().enumerate() {
                let e = (x[j] - y[k]) as i32;
                weights[k] = grid
                    .xi
                    .iter()
                    .zip(&grid.growth)
                    .map(|(z, g)| z.powi(e) * g)
                    .collect();
            }
            Term {
                weights,
                inversions: inversions(&sigma),
            }
        })
        .collect();
    let total = m.pow(n as u32);
    let mut idx = vec![0usize; n];
    let mut sum = Complex64::new(0.0, 0.0);
    for flat in 0..total {
        let mut rem = flat;
        for slot in idx.iter_mut() {
            *slot = rem % m;
            rem /= m;
        }
        let mut node = Complex64::new(0.0, 0.0);
        for term in &terms {
            let mut v = Complex64::new(1.0, 0.0);
            for (k, w) in term.weights.iter().enumerate() {
                v *= w[idx[k]];
            }
            for &(a, b) in &term.inversions {
                v *= grid.pair[idx[a] * m + idx[b]];
            }
            node += v;
        }
        sum += node;
    }
    sum / total as f64
}

/// Transition probability `P_y(x; t)` on ℤ from the contour-integral formula,
/// by trapezoidal quadrature on a circle. The value at `M` nodes is compared
/// against `2M` nodes and rejected if they differ by more than 1e-8.
pub fn transition_probability(
    y: &[i64],
    x: &[i64],
    t: f64,
    rates: Rates,
    contour: ContourSpec,
) -> Result<f64> {
    Ok(transition_probability_detailed(y, x, t, rates, contour)?.value)
}

pub fn transition_probability_detailed(
    y: &[i64],
    x: &[i64],
    t: f64,
    rates: Rates,
    contour: ContourSpec,
) -> Result<ContourValue> {
    check_positions("y", y)?;
    check_positions("x", x)?;
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "|y| = {} but |x| = {}",
            y.len(),
            x.len()
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t = {t}")));
    }
    contour.validate()?;
    let Some(side) = side_for(y, x, rates) else {
        return Ok(ContourValue {
            value: 0.0,
            imag: 0.0,
            radius: 0.0,
            nodes: contour.nodes,
            change: 0.0,
        });
    };
    let f = frame(y, rates, side);
    let x = f.end(x);
    let r = contour.effective_radius(f.fw)?;
    let pairs = y.len() > 1;
    let coarse = direct_sum(&Grid::new(r, contour.nodes, t, f.fw, pairs)?, &f.y, &x);
    let fine = direct_sum(&Grid::new(r, 2 * contour.nodes, t, f.fw, pairs)?, &f.y, &x);
    let change = (coarse - fine).norm();
    if change > CONVERGENCE_TOL {
        return Err(Error::QuadratureNotConverged { change });
    }
    if coarse.im.abs() > IMAG_TOL {
        return Err(Error::QuadratureNotConverged { change: coarse.im.abs() });
    }
    Ok(ContourValue {
        value: coarse.re,
        imag: coarse.im,
        radius: r,
        nodes: contour.nodes,
        change,
    })
}

/// `P_y(x; t)` for every `x` at once. For each permutation the node sums
/// are an N-dimensional discrete Fourier transform of the `x`-independent
/// part of the integrand, so one FFT per permutation serves all end points
/// whose displacements stay below `M/2`. Two transforms are kept, one per
/// frame, and each end point is read from the frame where its shift is
/// nonnegative.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    y: Vec<i64>,
    rates: Rates,
    nodes: usize,
    direct: Option<Half>,
    mirrored: Option<Half>,
}

#[derive(Debug, Clone)]
struct Half {
    y: Vec<i64>,
    radius: f64,
    /// Roundoff scale of the transforms, `1e-15 Σ_σ max |integrand|`.
    noise: f64,
    /// `(σ, M^N values)`.
    spectra: Vec<(Vec<usize>, Vec<Complex64>)>,
}

impl TransitionTable {
    /// Circle radii of the direct and mirrored frames, where present.
    pub fn radii(&self) -> (Option<f64>, Option<f64>) {
        (self.direct.as_ref().map(|h| h.radius), self.mirrored.as_ref().map(|h| h.radius))
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    fn half(&self, x: &[i64]) -> Option<(&Half, Vec<i64>)> {
        match side_for(&self.y, x, self.rates)? {
            Side::Direct => self.direct.as_ref().map(|h| (h, x.to_vec())),
            Side::Mirrored => self.mirrored.as_ref().map(|h| (h, mirror(x))),
        }
    }

    /// Estimated roundoff in [`get`](Self::get) at `x`.
    pub fn roundoff(&self, x: &[i64]) -> f64 {
        match self.half(x) {
            Some((h, x)) => {
                let shift: i64 = x.iter().sum::<i64>() - h.y.iter().sum::<i64>();
                h.noise * h.radius.powi(shift as i32)
            }
            None => 0.0,
        }
    }

    /// Probability of the ordered end point `x`.
    pub fn get(&self, x: &[i64]) -> Result<f64> {
        check_positions("x", x)?;
        let n = self.y.len();
        if x.len() != n {
            return Err(Error::InvalidParameter(format!("|x| = {} but N = {n}", x.len())));
        }
        let half = (self.nodes / 2) as i64;
        let far = x.iter().zip(&self.y).map(|(a, b)| (a - b).abs()).max().unwrap_or(0);
        if far >= half {
            return Err(Error::OutOfRange {
                what: "displacement",
                value: far as f64,
                lo: 0.0,
                hi: (half - 1) as f64,
            });
        }
        let Some((h, x)) = self.half(x) else {
            return Ok(0.0);
        };
        let m = self.nodes as i64;
        let mut sum = Complex64::new(0.0, 0.0);
        for (sigma, spec) in &h.spectra {
            // Variable k = σ(j) carries the frequency x_j.
            let mut flat = 0usize;
            let mut stride = 1usize;
            let mut a = vec![0i64; n];
            for (j, &k) in sigma.iter().enumerate() {
                a[k] = x[j];
            }
            for ak in a {
                flat += ak.rem_euclid(m) as usize * stride;
                stride *= self.nodes;
            }
            sum += spec[flat];
        }
        let shift: i64 = x.iter().sum::<i64>() - h.y.iter().sum::<i64>();
        Ok(sum.re * h.radius.powi(shift as i32))
    }
}

pub fn transition_table(y: &[i64], t: f64, rates: Rates, contour: ContourSpec) -> Result<TransitionTable> {
    check_positions("y", y)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t = {t}")));
    }
    contour.validate()?;
    let direct = if rates.q() > 0.0 {
        Some(half_table(&frame(y, rates, Side::Direct), t, contour)?)
    } else {
        None
    };
    let mirrored = if rates.p() > 0.0 {
        Some(half_table(&frame(y, rates, Side::Mirrored), t, contour)?)
    } else {
        None
    };
    Ok(TransitionTable {
        y: y.to_vec(),
        rates,
        nodes: contour.nodes,
        direct,
        mirrored,
    })
}

fn half_table(f: &Frame, t: f64, contour: ContourSpec) -> Result<Half> {
    let n = f.y.len();
    let r = contour.effective_radius(f.fw)?;
    let m = contour.nodes;
    let grid = Grid::new(r, m, t, f.fw, n > 1)?;
    let total = m.pow(n as u32);
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(m);
    let mut spectra = Vec::new();
    let mut noise = 0.0;
    for sigma in permutations(n) {
        let inv = inversions(&sigma);
        // Unit-modulus phases e^{-iθ y_k} and growth factors per variable.
        let factor: Vec<Vec<Complex64>> = (0..n)
            .map(|k| {
                (0..m)
                    .map(|node| {
                        let th = 2.0 * PI * node as f64 / m as f64;
                        Complex64::from_polar(1.0, -th * f.y[k] as f64) * grid.growth[node]
                    })
                    .collect()
            })
            .collect();
        let mut g = vec![Complex64::new(0.0, 0.0); total];
        let mut idx = vec![0usize; n];
        for (flat, slot) in g.iter_mut().enumerate() {
            let mut rem = flat;
            for i in idx.iter_mut() {
                *i = rem % m;
                rem /= m;
            }
            let mut v = Complex64::new(1.0 / total as f64, 0.0);
            for k in 0..n {
                v *= factor[k][idx[k]];
            }
            for &(a, b) in &inv {
                v *= grid.pair[idx[a] * m + idx[b]];
            }
            *slot = v;
        }
        noise += 1e-15 * total as f64 * g.iter().map(|c| c.norm()).fold(0.0, f64::max);
        // N-dimensional inverse DFT, one axis at a time.
        let mut stride = 1;
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        for _ in 0..n {
            for base in 0..total {
                if (base / stride) % m != 0 {
                    continue;
                }
                for (i, c) in line.iter_mut().enumerate() {
                    *c = g[base + i * stride];
                }
                fft.process(&mut line);
                for (i, c) in line.iter().enumerate() {
                    g[base + i * stride] = *c;
                }
            }
            stride *= m;
        }
        spectra.push((sigma, g));
    }
    Ok(Half {
        y: f.y.clone(),
        radius: r,
        noise,
        spectra,
    })
}
