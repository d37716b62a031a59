use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const AIRY_RANGE: (f64, f64) = (-12.0, 12.0);

/// Outside `[OSCILLATORY_BELOW, ASYMPTOTIC_FROM]` the asymptotic expansions
/// are used; the series loses digits to cancellation beyond either end.
const ASYMPTOTIC_FROM: f64 = 5.0;
const OSCILLATORY_BELOW: f64 = -7.0;
/// Ai(0) and -Ai'(0).
const C1: f64 = 0.355_028_053_887_817_2;
const C2: f64 = 0.258_819_403_792_806_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryEval {
    pub s: f64,
    pub ai: f64,
    pub ai_prime: f64,
}

/// Airy function and derivative on `[-12, 12]`.
pub fn airy(s: f64) -> Result<AiryEval> {
    if !(AIRY_RANGE.0..=AIRY_RANGE.1).contains(&s) {
        return Err(Error::OutOfRange {
            what: "Airy argument",
            value: s,
            lo: AIRY_RANGE.0,
            hi: AIRY_RANGE.1,
        });
    }
    let (ai, ai_prime) = if s > ASYMPTOTIC_FROM {
        asymptotic(s)
    } else if s < OSCILLATORY_BELOW {
        oscillatory(-s)
    } else {
        maclaurin(s)
    };
    Ok(AiryEval { s, ai, ai_prime })
}

/// `Ai = C1 f - C2 g` with the two power series solutions of `y'' = x y`.
fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = Σ a_k with a_k = a_{k-1} x³ / ((3k-1) 3k), g = Σ b_k with
    // b_k = b_{k-1} x³ / (3k (3k+1)); derivatives termwise.
    let (mut a, mut b) = (1.0, x);
    let (mut f, mut g) = (a, b);
    let (mut fp, mut gp) = (0.0, 1.0);
    for k in 1..200 {
        let kf = k as f64;
        let da = a * x * x / (3.0 * kf - 1.0);
        let db = b * x * x / (3.0 * kf);
        a *= x3 / ((3.0 * kf - 1.0) * 3.0 * kf);
        b *= x3 / (3.0 * kf * (3.0 * kf + 1.0));
        f += a;
        g += b;
        fp += da;
        gp += db;
        if a.abs() + b.abs() + da.abs() + db.abs() < 1e-18 * (f.abs() + g.abs() + 1e-300) {
            break;
        }
    }
    (C1 * f - C2 * g, C1 * fp - C2 * gp)
}

fn asymptotic(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = coefficients(60);
    let (mut su, mut sv) = (0.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 0..u.len() {
        let t = u[k] / zeta.powi(k as i32);
        // Stop at the smallest term of the divergent series.
        if t.abs() >= last {
            break;
        }
        last = t.abs();
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        su += sign * t;
        sv += sign * v[k] / zeta.powi(k as i32);
    }
    let pre = (-zeta).exp() / (2.0 * PI.sqrt());
    (pre * su / x.powf(0.25), -pre * x.powf(0.25) * sv)
}

/// Coefficients `u_k`, `v_k` of the Airy asymptotic expansions.
fn coefficients(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..count {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(next);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * next);
    }
    (u, v)
}

/// `Ai(-x)`, `Ai'(-x)` for large `x > 0`:
/// `Ai(-x) ~ x^{-1/4} π^{-1/2} (sin(ζ + π/4) P - cos(ζ + π/4) Q)`.
fn oscillatory(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = coefficients(60);
    // Even and odd parts with alternating signs, cut at the smallest term.
    let split = |c: &[f64]| -> (f64, f64) {
        let (mut even, mut odd) = (0.0, 0.0);
        let mut last = f64::INFINITY;
        for (k, ck) in c.iter().enumerate() {
            let t = ck / zeta.powi(k as i32);
            if k > 2 && t.abs() >= last {
                break;
            }
            last = t.abs();
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                even += sign * t;
            } else {
                odd += sign * t;
            }
        }
        (even, odd)
    };
    let (p, q) = split(&u);
    let (pv, qv) = split(&v);
    let th = zeta + PI / 4.0;
    let (sin, cos) = th.sin_cos();
    let ai = x.powf(-0.25) / PI.sqrt() * (sin * p - cos * q);
    let ai_prime = -x.powf(0.25) / PI.sqrt() * (cos * pv + sin * qv);
    (ai, ai_prime)
}
