use std::collections::HashMap;

use num_traits::{One, Zero};

use super::curve::w01;
use super::laurent::Laurent;
use super::poly::{frac, int, Point, Poly, RationalFn, Q};
use crate::{Error, Result};

/// Largest genus and number of points served to callers; the recursion
/// computes whatever intermediate `W_{g',k'}` these need.
pub const MAX_GENUS: usize = 2;
pub const MAX_POINTS: usize = 3;

/// `W_{g,k}(t₁, …, t_k)` as the coefficient of `dt₁ ⋯ dt_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    /// `W₀₁`, a rational function of one variable.
    OneForm(RationalFn),
    /// `W₀₂ = 1/(t₁ - t₂)²`.
    Bergman,
    /// Every stable `W_{g,k}` is a Laurent polynomial: its only poles are
    /// the branch points `0` and `∞`.
    Laurent(Laurent),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiDiff {
    pub g: usize,
    pub k: usize,
    pub body: Body,
}

impl MultiDiff {
    pub fn eval(&self, t: &[Q]) -> Result<Q> {
        if t.len() != self.k {
            return Err(Error::InvalidParameter(format!("W_{{{},{}}} takes {} arguments, got {}", self.g, self.k, self.k, t.len())));
        }
        let pole = || Error::PoleProximity { value: 0.0, tol: 0.0 };
        match &self.body {
            Body::OneForm(f) => f.eval(&t[0]).ok_or_else(pole),
            Body::Bergman => {
                let d = &t[0] - &t[1];
                if d.is_zero() {
                    return Err(pole());
                }
                Ok((&d * &d).recip())
            }
            Body::Laurent(p) => {
                if t.iter().any(|x| x.is_zero()) {
                    return Err(pole());
                }
                Ok(p.eval(t))
            }
        }
    }

    pub fn laurent(&self) -> Option<&Laurent> {
        match &self.body {
            Body::Laurent(p) => Some(p),
            _ => None,
        }
    }

    /// Euler characteristic order `2g - 2 + k`.
    pub fn order(&self) -> i64 {
        2 * self.g as i64 - 2 + self.k as i64
    }
}

pub fn base_cases() -> (MultiDiff, MultiDiff) {
    (
        MultiDiff {
            g: 0,
            k: 1,
            body: Body::OneForm(w01()),
        },
        MultiDiff {
            g: 0,
            k: 2,
            body: Body::Bergman,
        },
    )
}

pub type Cache = HashMap<(usize, usize), MultiDiff>;

pub fn seeded_cache() -> Cache {
    let (a, b) = base_cases();
    HashMap::from([((0, 1), a), ((0, 2), b)])
}

/// One factor of a recursion integrand in the variables `(t, t₁, …, t_k)`.
#[derive(Debug, Clone)]
enum Factor {
    /// `1/(t² - t₁²)`
    KernelPole,
    /// `1/(t - sign·t_var)²`
    Bergman { var: usize, sign: i32 },
}

/// `poly · Π factors`, the `dt` coefficient of one integrand term.
#[derive(Debug, Clone)]
struct Term {
    poly: Laurent,
    factors: Vec<Factor>,
}

/// `-(1/32)(t² - 1)³/t`, the part of the kernel without the `t₁` pole.
fn kernel_poly(nvars: usize) -> Laurent {
    Laurent::univariate(
        nvars,
        0,
        &[(5, int(1)), (3, int(-3)), (1, int(3)), (-1, int(-1))],
    )
    .scale(&frac(-1, 32))
}

/// A cached `W_{g',k'}` evaluated at `(sign·t, t_{vars…})`, with the `d(-t)`
/// sign folded in. `first` picks `t` or `-t` for the leading slot.
fn place(
    w: &MultiDiff,
    first_sign: i32,
    extra_first: Option<i32>,
    vars: &[usize],
    nvars: usize,
) -> Result<(Laurent, Vec<Factor>)> {
    let mut map = vec![(0, first_sign)];
    if let Some(s) = extra_first {
        map.push((0, s));
    }
    map.extend(vars.iter().map(|&v| (v, 1)));
    let sign_count = map.iter().filter(|(target, s)| *target == 0 && *s < 0).count();
    let sign = if sign_count % 2 == 1 { int(-1) } else { int(1) };
    match &w.body {
        Body::Laurent(p) => Ok((p.substitute(&map, nvars).scale(&sign), Vec::new())),
        Body::Bergman => {
            if extra_first.is_some() {
                // W₀₂(t, -t) = 1/(2t)², times d(-t).
                return Ok((Laurent::univariate(nvars, 0, &[(-2, frac(-1, 4))]), Vec::new()));
            }
            Ok((
                Laurent::constant(nvars, sign),
                vec![Factor::Bergman {
                    var: vars[0],
                    sign: first_sign,
                }],
            ))
        }
        Body::OneForm(_) => Err(Error::InvalidParameter("W₀₁ does not enter the recursion integrand".into())),
    }
}

fn fetch(cache: &Cache, g: usize, k: usize) -> Result<&MultiDiff> {
    cache.get(&(g, k)).ok_or(Error::CacheMiss { g, k })
}

/// Integrand terms for `W_{g,k}`: the kernel times
/// `W_{g-1,k+1}(t, -t, t_rest) + Σ' W_{g₁,|I|+1}(t, t_I) W_{g₂,|J|+1}(-t, t_J)`.
fn integrand(g: usize, k: usize, cache: &Cache) -> Result<Vec<Term>> {
    let nvars = k + 1;
    let rest: Vec<usize> = (2..=k).collect();
    let kernel = kernel_poly(nvars);
    let mut terms = Vec::new();
    let mut push = |poly: Laurent, mut factors: Vec<Factor>| {
        factors.push(Factor::KernelPole);
        terms.push(Term {
            poly: poly.mul(&kernel),
            factors,
        });
    };
    if g >= 1 {
        let w = fetch(cache, g - 1, k + 1)?;
        let (poly, factors) = place(w, 1, Some(-1), &rest, nvars)?;
        push(poly, factors);
    }
    let m = rest.len();
    for g1 in 0..=g {
        for mask in 0..(1usize << m) {
            let (i, j): (Vec<usize>, Vec<usize>) = rest
                .iter()
                .enumerate()
                .fold((Vec::new(), Vec::new()), |(mut i, mut j), (b, &v)| {
                    if mask >> b & 1 == 1 {
                        i.push(v)
                    } else {
                        j.push(v)
                    }
                    (i, j)
                });
            if (g1 == 0 && i.is_empty()) || (g1 == g && j.is_empty()) {
                continue;
            }
            let w1 = fetch(cache, g1, i.len() + 1)?;
            let w2 = fetch(cache, g - g1, j.len() + 1)?;
            let (p1, mut f1) = place(w1, 1, None, &i, nvars)?;
            let (p2, f2) = place(w2, -1, None, &j, nvars)?;
            f1.extend(f2);
            push(p1.mul(&p2), f1);
        }
    }
    Ok(terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Zero,
    Infinity,
}

/// Valuation of a series factor in the local coordinate.
fn factor_valuation(at: Branch) -> i32 {
    match at {
        Branch::Zero => 0,
        Branch::Infinity => 2,
    }
}

/// Local expansion of a factor in `s = t` (at 0) or `s = 1/t` (at ∞), up to `s^max`.
fn expand(f: &Factor, at: Branch, max: i32, nvars: usize) -> Laurent {
    let mut out = Laurent::zero(nvars);
    match (f, at) {
        (Factor::KernelPole, Branch::Zero) => {
            // -Σ t^{2n} t₁^{-2n-2}
            for n in (0..).take_while(|n| 2 * n <= max) {
                let mut e = vec![0; nvars];
                e[0] = 2 * n;
                e[1] = -2 * n - 2;
                out.add_term(e, int(-1));
            }
        }
        (Factor::KernelPole, Branch::Infinity) => {
            // Σ s^{2n+2} t₁^{2n}
            for n in (0..).take_while(|n| 2 * n + 2 <= max) {
                let mut e = vec![0; nvars];
                e[0] = 2 * n + 2;
                e[1] = 2 * n;
                out.add_term(e, int(1));
            }
        }
        (Factor::Bergman { var, sign }, Branch::Zero) => {
            // Σ (n+1) sign^n t^n t_var^{-n-2}
            for n in (0..).take_while(|n| *n <= max) {
                let mut e = vec![0; nvars];
                e[0] = n;
                e[*var] = -n - 2;
                out.add_term(e, int(((n + 1) * sign.pow(n as u32)) as i64));
            }
        }
        (Factor::Bergman { var, sign }, Branch::Infinity) => {
            // Σ (n+1) sign^n t_var^n s^{n+2}
            for n in (0..).take_while(|n| n + 2 <= max) {
                let mut e = vec![0; nvars];
                e[0] = n + 2;
                e[*var] = n;
                out.add_term(e, int(((n + 1) * sign.pow(n as u32)) as i64));
            }
        }
    }
    out
}

/// `Res_{t=a}` of one term, a Laurent polynomial in `t₁, …, t_k`.
fn term_residue(term: &Term, at: Branch) -> Laurent {
    let nvars = term.poly.nvars();
    let poly = match at {
        Branch::Zero => term.poly.clone(),
        // dt = -ds/s²
        Branch::Infinity => term
            .poly
            .invert_var(0)
            .mul(&Laurent::univariate(nvars, 0, &[(-2, int(-1))])),
    };
    let Some(v_poly) = poly.valuation(0) else {
        return Laurent::zero(nvars - 1);
    };
    let vf = factor_valuation(at);
    let total = v_poly + vf * term.factors.len() as i32;
    if total > -1 {
        return Laurent::zero(nvars - 1);
    }
    let mut acc = poly;
    let mut remaining = vf * term.factors.len() as i32;
    for f in &term.factors {
        remaining -= vf;
        let max_here = -1 - (total - vf);
        let series = expand(f, at, max_here, nvars);
        acc = acc.mul_truncated(&series, 0, -1 - remaining);
    }
    acc.coefficient(0, -1)
}

fn check_request(g: usize, k: usize) -> Result<()> {
    if k == 0 || (g == 0 && k <= 2) {
        return Err(Error::BaseCase { g, k });
    }
    Ok(())
}

/// `W_{g,k} = Σ_{a ∈ {0, ∞}} Res_{t=a} K(t₁, t)[…]` from the cached lower terms.
pub fn recursion_step(g: usize, k: usize, cache: &Cache) -> Result<MultiDiff> {
    check_request(g, k)?;
    let mut out = Laurent::zero(k);
    for term in integrand(g, k, cache)? {
        out.add_assign(&term_residue(&term, Branch::Zero));
        out.add_assign(&term_residue(&term, Branch::Infinity));
    }
    Ok(MultiDiff {
        g,
        k,
        body: Body::Laurent(out),
    })
}

/// Memoized recursion; fills in every intermediate term `(g, k)` depends on.
#[derive(Debug, Clone)]
pub struct TopRec {
    cache: Cache,
}

impl Default for TopRec {
    fn default() -> Self {
        Self { cache: seeded_cache() }
    }
}

impl TopRec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cache(&self) -> &Cache {
        &self.cache
    }

    /// `W_{g,k}` for `g ≤ 2`, `1 ≤ k ≤ 3`.
    pub fn get(&mut self, g: usize, k: usize) -> Result<&MultiDiff> {
        if g > MAX_GENUS || k == 0 || k > MAX_POINTS {
            return Err(Error::InvalidParameter(format!(
                "(g, k) = ({g}, {k}) outside g ≤ {MAX_GENUS}, 1 ≤ k ≤ {MAX_POINTS}"
            )));
        }
        self.ensure(g, k)?;
        Ok(&self.cache[&(g, k)])
    }

    fn ensure(&mut self, g: usize, k: usize) -> Result<()> {
        if self.cache.contains_key(&(g, k)) {
            return Ok(());
        }
        if g >= 1 {
            self.ensure(g - 1, k + 1)?;
        }
        for g1 in 0..=g {
            for size in 0..k {
                let (a, b) = (size + 1, k - size);
                if (g1 == 0 && a == 1) || (g1 == g && b == 1) {
                    continue;
                }
                self.ensure(g1, a)?;
                self.ensure(g - g1, b)?;
            }
        }
        let w = recursion_step(g, k, &self.cache)?;
        self.cache.insert((g, k), w);
        Ok(())
    }
}

/// The recursion integrand at fixed `t₁, …, t_k`, as a rational function of `t`.
fn integrand_at(g: usize, k: usize, cache: &Cache, point: &[Q]) -> Result<RationalFn> {
    let terms = integrand(g, k, cache)?;
    let kernel_den = Poly::new(vec![-(&point[0] * &point[0]), Q::zero(), Q::one()]);
    let bergman_den = |var: usize, sign: i32| Poly::linear_root(&(&point[var - 1] * int(sign as i64))).pow(2);
    // Common denominator t^low · (t² - t₁²) · Π_j (t - t_j)²(t + t_j)².
    let mut special = kernel_den.clone();
    for var in 2..=k {
        special = special.mul(&bergman_den(var, 1)).mul(&bergman_den(var, -1));
    }
    let parts: Vec<(Poly, usize, Poly)> = terms
        .iter()
        .map(|term| {
            let (num, low) = term.poly.restrict_raw(0, point);
            let den = term.factors.iter().fold(Poly::constant(Q::one()), |d, f| {
                d.mul(&match f {
                    Factor::KernelPole => kernel_den.clone(),
                    Factor::Bergman { var, sign } => bergman_den(*var, *sign),
                })
            });
            (num, low, den)
        })
        .collect();
    let low = parts.iter().map(|p| p.1).max().unwrap_or(0);
    let mut total = Poly::zero();
    for (num, l, den) in parts {
        let (cofactor, rem) = special.div_rem(&den);
        debug_assert!(rem.is_zero());
        total = total.add(&num.mul(&cofactor).mul(&Poly::monomial(Q::one(), low - l)));
    }
    RationalFn::new(total, special.mul(&Poly::monomial(Q::one(), low)))
}

/// Residues of the integrand at every one of its poles (`0`, `∞`, `±t_i`),
/// which must sum to zero. Errors if the integrand has any other pole.
pub fn integrand_residues(g: usize, k: usize, cache: &Cache, point: &[Q]) -> Result<Vec<(Point, Q)>> {
    check_request(g, k)?;
    let f = integrand_at(g, k, cache, point)?;
    let mut roots: Vec<Q> = vec![Q::zero()];
    for x in point {
        for r in [x.clone(), -x.clone()] {
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
    }
    if f.residual_denominator(&roots).degree() != Some(0) {
        return Err(Error::EssentialSingularity("integrand has a pole off {0, ±t_i}".into()));
    }
    let mut out = vec![(Point::Infinity, f.residue(&Point::Infinity)?)];
    for r in roots {
        let res = f.residue(&Point::At(r.clone()))?;
        out.push((Point::At(r), res));
    }
    Ok(out)
}

/// Branch-point residues of the evaluated integrand: the value of `W_{g,k}`
/// at `point` computed without the symbolic series machinery.
pub fn evaluate_by_residues(g: usize, k: usize, cache: &Cache, point: &[Q]) -> Result<Q> {
    check_request(g, k)?;
    let f = integrand_at(g, k, cache, point)?;
    Ok(f.residue(&Point::Zero)? + f.residue(&Point::Infinity)?)
}

/// Laurent exponent ranges per variable: the denominator of a stable
/// `W_{g,k}` is `Π t_i^{-min_i}`.
pub fn pole_orders(w: &MultiDiff) -> Option<Vec<(i32, i32)>> {
    let p = w.laurent()?;
    Some((0..p.nvars()).map(|v| (p.valuation(v).unwrap_or(0), p.max_degree(v).unwrap_or(0))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w11_closed_form() {
        let mut tr = TopRec::new();
        let w = tr.get(1, 1).unwrap().clone();
        // (1 - t²)³ / (128 t⁴)
        let expect = Laurent::univariate(1, 0, &[(-4, int(1)), (-2, int(-3)), (0, int(3)), (2, int(-1))]).scale(&frac(1, 128));
        assert_eq!(w.laurent().unwrap(), &expect);
    }

    #[test]
    fn base_cases_are_rejected() {
        let c = seeded_cache();
        assert!(matches!(recursion_step(0, 1, &c), Err(Error::BaseCase { .. })));
        assert!(matches!(recursion_step(0, 2, &c), Err(Error::BaseCase { .. })));
    }

    #[test]
    fn cache_miss_is_reported() {
        let c = seeded_cache();
        assert!(matches!(recursion_step(1, 2, &c), Err(Error::CacheMiss { g: 0, k: 3 })));
    }

    #[test]
    fn symbolic_residues_match_evaluated_ones() {
        let mut tr = TopRec::new();
        tr.get(1, 2).unwrap();
        let point = [frac(1, 3), frac(-2, 5)];
        let direct = evaluate_by_residues(1, 2, tr.cache(), &point).unwrap();
        assert_eq!(tr.get(1, 2).unwrap().eval(&point).unwrap(), direct);
    }

    #[test]
    fn scope_is_capped() {
        let mut tr = TopRec::new();
        assert!(tr.get(3, 1).is_err());
        assert!(tr.get(0, 4).is_err());
        assert!(tr.get(1, 0).is_err());
    }

    #[test]
    fn w03_matches_branch_point_formula() {
        // W₀₃ = -Σ_a Res_{t=a} B(t,t₁) B(t,t₂) B(t,t₃) / (dz dy); the sign
        // follows the kernel's orientation of ∫_{-t}^{t}.
        let chart = super::super::curve::CurveChart;
        let dzdy = chart.dz().mul(&chart.y().derivative());
        let mut tr = TopRec::new();
        let w = tr.get(0, 3).unwrap().clone();
        for point in [[frac(1, 2), frac(1, 3), frac(-3, 4)], [int(2), frac(-1, 5), frac(7, 3)]] {
            let mut f = dzdy.recip().unwrap();
            for x in &point {
                let b = RationalFn::new(Poly::constant(Q::one()), Poly::linear_root(x).pow(2)).unwrap();
                f = f.mul(&b);
            }
            let expect = -(f.residue(&Point::Zero).unwrap() + f.residue(&Point::Infinity).unwrap());
            assert_eq!(w.eval(&point).unwrap(), expect);
        }
    }
}
