use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Abort when any component exceeds this magnitude.
    pub blowup: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 1_000_000,
            blowup: 1e6,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) from `t0` to `t1` (either direction).
/// `h` carries the step size between calls.
pub fn dormand_prince<F>(f: F, t0: f64, y0: &[f64], t1: f64, h: &mut f64, opts: OdeOptions) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let dim = y0.len();
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0.to_vec();
    if t0 == t1 {
        return Ok(y);
    }
    if *h == 0.0 || !h.is_finite() {
        *h = 1e-3 * (t1 - t0).abs();
    }
    let mut step = h.abs();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    for _ in 0..opts.max_steps {
        let remaining = (t1 - t).abs();
        if remaining <= 1e-14 * t1.abs().max(1.0) {
            return Ok(y);
        }
        let hs = step.min(remaining) * dir;
        for stage in 0..7 {
            for i in 0..dim {
                tmp[i] = y[i] + hs * (0..stage).map(|j| A[stage][j] * k[j][i]).sum::<f64>();
            }
            k[stage] = f(t + C[stage] * hs, &tmp);
        }
        let mut err: f64 = 0.0;
        let mut next = vec![0.0; dim];
        for i in 0..dim {
            let hi: f64 = (0..7).map(|j| B[j] * k[j][i]).sum();
            let lo: f64 = (0..7).map(|j| B_LOW[j] * k[j][i]).sum();
            next[i] = y[i] + hs * hi;
            let scale = opts.atol + opts.rtol * y[i].abs().max(next[i].abs());
            err = err.max((hs * (hi - lo)).abs() / scale);
        }
        if err <= 1.0 {
            t += hs;
            y = next;
            if y.iter().any(|v| !(v.abs() <= opts.blowup)) {
                return Err(Error::BlowUp { s: t });
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        step = (step.min(remaining)) * factor;
        *h = step;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_steps,
        residual: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_both_directions() {
        let f = |_t: f64, y: &[f64]| vec![-y[0]];
        let mut h = 0.0;
        let y = dormand_prince(f, 0.0, &[1.0], 3.0, &mut h, OdeOptions::default()).unwrap();
        assert!((y[0] - (-3f64).exp()).abs() < 1e-12);
        let mut h = 0.0;
        let y = dormand_prince(f, 3.0, &[(-3f64).exp()], 0.0, &mut h, OdeOptions::default()).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator() {
        let f = |_t: f64, y: &[f64]| vec![y[1], -y[0]];
        let mut h = 0.0;
        let y = dormand_prince(f, 0.0, &[0.0, 1.0], 10.0, &mut h, OdeOptions::default()).unwrap();
        assert!((y[0] - 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn blowup_detected() {
        // y' = y², y(0) = 1 explodes at t = 1.
        let f = |_t: f64, y: &[f64]| vec![y[0] * y[0]];
        let mut h = 0.0;
        let err = dormand_prince(f, 0.0, &[1.0], 2.0, &mut h, OdeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::BlowUp { s } if s < 1.0));
    }
}
