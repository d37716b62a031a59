use std::path::Path;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::laurent::Laurent;
use super::poly::{frac, int, q_to_f64, q_to_string, Poly, RationalFn, Q};
use super::recursion::{Body, MultiDiff, TopRec};
use crate::{Error, Result};

pub const MAX_ORDER: usize = 20;

fn series_mul(a: &[Q], b: &[Q], n: usize) -> Vec<Q> {
    (0..n)
        .map(|k| {
            (0..=k)
                .filter(|&i| i < a.len() && k - i < b.len())
                .fold(Q::zero(), |acc, i| acc + &a[i] * &b[k - i])
        })
        .collect()
}

fn series_inv(a: &[Q], n: usize) -> Vec<Q> {
    super::poly::series_div(&[Q::one()], a, n)
}

/// `(1 + c ζ)^a` to `n` terms.
fn binomial(a: &Q, c: &Q, n: usize) -> Vec<Q> {
    let mut out = vec![Q::one()];
    for k in 1..n {
        let prev = out[k - 1].clone();
        out.push(prev * (a - int(k as i64 - 1)) / int(k as i64) * c);
    }
    out
}

/// `t(ζ) = -√((1 + 2ζ)/(1 - 2ζ))`, the physical sheet near `z = 1/ζ = ∞`.
pub fn chart_series(n: usize) -> Vec<Q> {
    let up = binomial(&frac(1, 2), &int(2), n);
    let down = binomial(&frac(-1, 2), &int(-2), n);
    series_mul(&up, &down, n).into_iter().map(|c| -c).collect()
}

fn poly_of_series(p: &Poly, t: &[Q], n: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); n];
    for c in p.coeffs().iter().rev() {
        out = series_mul(&out, t, n);
        out[0] += c;
    }
    out
}

/// Coefficients `m_0, …, m_order` of `W = -Σ_j m_j z^{-j-1} dz` in the chosen
/// variable near `z = ∞` on the physical sheet. They are Laurent polynomials
/// in the remaining `t` variables (constants when `k = 1`).
pub fn expansion_coeffs(w: &MultiDiff, variable: usize, order: usize) -> Result<Vec<Laurent>> {
    if order > MAX_ORDER {
        return Err(Error::OutOfRange {
            what: "expansion order",
            value: order as f64,
            lo: 0.0,
            hi: MAX_ORDER as f64,
        });
    }
    if variable >= w.k {
        return Err(Error::InvalidParameter(format!("variable {variable} of a {}-point function", w.k)));
    }
    let n = order + 2;
    let t = chart_series(n);
    // dt/dz = -(1 - t²)²/(8t)
    let dtdz_laurent = Laurent::univariate(1, 0, &[(-1, frac(-1, 8)), (1, frac(1, 4)), (3, frac(-1, 8))]);
    let series: Vec<Laurent> = match &w.body {
        Body::OneForm(f) => {
            let dtdz = RationalFn::new(Poly::from_ints(&[-1, 0, 2, 0, -1]), Poly::from_ints(&[0, 8]))?;
            let f = f.mul(&dtdz);
            let num = poly_of_series(f.num(), &t, n);
            let den = poly_of_series(f.den(), &t, n);
            if den[0].is_zero() {
                return Err(Error::ChartSingularity("pole at the expansion point".into()));
            }
            series_mul(&num, &series_inv(&den, n), n)
                .into_iter()
                .map(|c| Laurent::constant(0, c))
                .collect()
        }
        Body::Bergman => {
            return Err(Error::ChartSingularity(
                "W₀₂ is not a Laurent polynomial in the other variable".into(),
            ))
        }
        Body::Laurent(p) => {
            let dtdz = dtdz_laurent.substitute(&[(variable, 1)], p.nvars());
            laurent_series(&p.mul(&dtdz), variable, &t, n)
        }
    };
    Ok(series[1..=order + 1].iter().map(|c| c.scale(&int(-1))).collect())
}

/// Substitutes the series `t(ζ)` for `x_var`.
fn laurent_series(p: &Laurent, var: usize, t: &[Q], n: usize) -> Vec<Laurent> {
    let inv = series_inv(t, n);
    let mut out = vec![Laurent::zero(p.nvars() - 1); n];
    for (e, coeff) in p.split(var) {
        let base = if e >= 0 { t } else { &inv[..] };
        let mut power = vec![Q::zero(); n];
        power[0] = Q::one();
        for _ in 0..e.unsigned_abs() {
            power = series_mul(&power, base, n);
        }
        for (i, c) in power.iter().enumerate() {
            if !c.is_zero() {
                out[i].add_assign(&coeff.scale(c));
            }
        }
    }
    out
}

/// Moments `m_0, …, m_order` of a one-point function.
pub fn moments(w: &MultiDiff, order: usize) -> Result<Vec<Q>> {
    if w.k != 1 {
        return Err(Error::InvalidParameter("moments need a one-point function".into()));
    }
    Ok(expansion_coeffs(w, 0, order)?.iter().map(|c| c.eval(&[])).collect())
}

/// `Σ_g n^{1-2g} m_{g,2j}` as per-genus coefficients `[m_{0,2j}, m_{1,2j}, …]`
/// for `g ≤ 2`: the large-`n` expansion of `E[Tr (M/√n)^{2j}]`.
pub fn genus_expansion(tr: &mut TopRec, j: usize) -> Result<Vec<Q>> {
    (0..=super::recursion::MAX_GENUS)
        .map(|g| Ok(moments(tr.get(g, 1)?, 2 * j)?[2 * j].clone()))
        .collect()
}

pub fn to_json(w: &MultiDiff) -> Value {
    let body = match &w.body {
        Body::OneForm(f) => json!({
            "kind": "rational",
            "numerator": f.num().coeffs().iter().map(q_to_string).collect::<Vec<_>>(),
            "denominator": f.den().coeffs().iter().map(q_to_string).collect::<Vec<_>>(),
        }),
        Body::Bergman => json!({ "kind": "bergman", "expression": "1/(t1 - t2)^2" }),
        Body::Laurent(p) => json!({
            "kind": "laurent",
            "terms": p.terms().map(|(e, c)| json!({ "exponents": e, "coeff": q_to_string(c) })).collect::<Vec<_>>(),
        }),
    };
    json!({ "g": w.g, "k": w.k, "differential": "dt1...dtk", "body": body })
}

pub fn write_json(w: &MultiDiff, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&to_json(w))?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Sample points: every tuple from a fixed rational grid avoiding `0`,
/// `±1` and collisions.
pub fn sample_points(k: usize) -> Vec<Vec<Q>> {
    let grid: Vec<Q> = [(-2, 1), (-3, 4), (-1, 2), (-1, 4), (1, 4), (1, 2), (3, 4), (2, 1)]
        .iter()
        .map(|&(a, b)| frac(a, b))
        .collect();
    let mut out: Vec<Vec<Q>> = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p| {
                grid.iter()
                    .filter(|x| !p.contains(x))
                    .map(|x| {
                        let mut q = p.clone();
                        q.push(x.clone());
                        q
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    out
}

/// CSV with columns `t1, …, tk, value`.
pub fn write_csv(w: &MultiDiff, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = csv::Writer::from_writer(file);
    let mut header: Vec<String> = (1..=w.k).map(|i| format!("t{i}")).collect();
    header.push("value".into());
    out.write_record(&header)?;
    for p in sample_points(w.k) {
        let v = w.eval(&p)?;
        let mut row: Vec<String> = p.iter().map(|x| q_to_f64(x).to_string()).collect();
        row.push(format!("{:.17e}", q_to_f64(&v)));
        out.write_record(&row)?;
    }
    out.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_series_squares_correctly() {
        // t² (1 - 2ζ) = 1 + 2ζ
        let n = 12;
        let t = chart_series(n);
        let t2 = series_mul(&t, &t, n);
        let lhs = series_mul(&t2, &[int(1), int(-2)], n);
        let mut rhs = vec![Q::zero(); n];
        rhs[0] = int(1);
        rhs[1] = int(2);
        assert_eq!(lhs, rhs);
        assert_eq!(t[0], int(-1));
    }

    #[test]
    fn order_is_bounded() {
        let mut tr = TopRec::new();
        let w = tr.get(1, 1).unwrap().clone();
        assert!(expansion_coeffs(&w, 0, 21).is_err());
        assert!(expansion_coeffs(&w, 1, 4).is_err());
    }
}
