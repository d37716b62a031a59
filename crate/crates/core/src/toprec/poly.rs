use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

pub type Q = BigRational;

/// Pole orders above this are treated as a runaway computation.
pub const MAX_POLE_ORDER: usize = 512;

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(a: i64, b: i64) -> Q {
    Q::new(BigInt::from(a), BigInt::from(b))
}

/// Dense univariate polynomial, coefficients low to high, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| int(x)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    pub fn monomial(c: Q, degree: usize) -> Self {
        let mut coeffs = vec![Q::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    /// `t - c`
    pub fn linear_root(c: &Q) -> Self {
        Self::new(vec![-c.clone(), Q::one()])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Q> {
        self.coeffs.last()
    }

    /// Index of the lowest nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::constant(Q::one()), |acc, _| acc.mul(self))
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Q::zero(); self.coeffs.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let top = rem.len() - 1;
            let c = &rem[top] / &lead;
            if !c.is_zero() {
                for (j, b) in d.coeffs.iter().enumerate() {
                    rem[top - dd + j] -= &c * b;
                }
            }
            quot[top - dd] = c;
            rem.pop();
        }
        (Self::new(quot), Self::new(rem))
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    /// `p(t + c)`.
    pub fn shift(&self, c: &Q) -> Self {
        let lin = Self::new(vec![c.clone(), Q::one()]);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, a| acc.mul(&lin).add(&Self::constant(a.clone())))
    }

    /// `t^deg p(1/t)`.
    pub fn reversed(&self) -> Self {
        Self::new(self.coeffs.iter().rev().cloned().collect())
    }
}

/// First `terms` coefficients of the power series `num / den`, `den(0) ≠ 0`.
pub fn series_div(num: &[Q], den: &[Q], terms: usize) -> Vec<Q> {
    let d0 = den[0].clone();
    let mut out: Vec<Q> = Vec::with_capacity(terms);
    for n in 0..terms {
        let mut acc = num.get(n).cloned().unwrap_or_else(Q::zero);
        for k in 1..=n.min(den.len().saturating_sub(1)) {
            acc -= &den[k] * &out[n - k];
        }
        out.push(acc / &d0);
    }
    out
}

/// Points where residues are taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Point {
    Zero,
    Infinity,
    At(Q),
}

/// Reduced rational function with a monic denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFn {
    num: Poly,
    den: Poly,
}

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let lead = den.leading().expect("nonzero").recip();
        Ok(Self {
            num: num.scale(&lead),
            den: den.scale(&lead),
        })
    }

    pub fn poly(p: Poly) -> Self {
        Self::new(p, Poly::constant(Q::one())).expect("unit denominator")
    }

    pub fn zero() -> Self {
        Self {
            num: Poly::zero(),
            den: Poly::constant(Q::one()),
        }
    }

    /// `c t^e` for any integer `e`.
    pub fn monomial(c: Q, e: i32) -> Self {
        let u = e.unsigned_abs() as usize;
        if e >= 0 {
            Self::poly(Poly::monomial(c, u))
        } else {
            Self::new(Poly::constant(c), Poly::monomial(Q::one(), u)).expect("nonzero")
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den)).expect("nonzero")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero")
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self::new(self.num.scale(s), self.den.clone()).expect("nonzero")
    }

    pub fn recip(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn derivative(&self) -> Self {
        let n = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        Self::new(n, self.den.mul(&self.den)).expect("nonzero")
    }

    /// `None` at a pole.
    pub fn eval(&self, x: &Q) -> Option<Q> {
        let d = self.den.eval(x);
        (!d.is_zero()).then(|| self.num.eval(x) / d)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let horner = |p: &Poly| p.coeffs().iter().rev().fold(0.0, |acc, c| acc * x + q_to_f64(c));
        horner(&self.num) / horner(&self.den)
    }

    /// `f(-t)`.
    pub fn reflect(&self) -> Self {
        let flip = |p: &Poly| {
            Poly::new(
                p.coeffs()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
                    .collect(),
            )
        };
        Self::new(flip(&self.num), flip(&self.den)).expect("nonzero")
    }

    /// Order of vanishing at `c` (negative for a pole).
    pub fn order_at(&self, c: &Q) -> i64 {
        let ord = |p: &Poly| p.shift(c).valuation().unwrap_or(0) as i64;
        if self.is_zero() {
            return i64::MAX;
        }
        ord(&self.num) - ord(&self.den)
    }

    /// Residue of the differential `f(t) dt` at `a`.
    pub fn residue(&self, a: &Point) -> Result<Q> {
        if self.is_zero() {
            return Ok(Q::zero());
        }
        match a {
            Point::Zero => self.residue_finite(&Q::zero()),
            Point::At(c) => self.residue_finite(c),
            Point::Infinity => {
                // -f(1/u)/u² = -u^{dD - dN - 2} rev(N)(u) / rev(D)(u)
                let dn = self.num.degree().expect("nonzero") as i64;
                let dd = self.den.degree().expect("nonzero") as i64;
                let want = dn - dd + 1;
                if want < 0 {
                    return Ok(Q::zero());
                }
                let want = want as usize;
                if want > MAX_POLE_ORDER {
                    return Err(Error::EssentialSingularity(format!("pole of order {} at infinity", want + 1)));
                }
                let s = series_div(self.num.reversed().coeffs(), self.den.reversed().coeffs(), want + 1);
                Ok(-s[want].clone())
            }
        }
    }

    fn residue_finite(&self, c: &Q) -> Result<Q> {
        let num = self.num.shift(c);
        let den = self.den.shift(c);
        let m = den.valuation().expect("nonzero");
        if m == 0 {
            return Ok(Q::zero());
        }
        if m > MAX_POLE_ORDER {
            return Err(Error::EssentialSingularity(format!("pole of order {m} at {c}")));
        }
        let s = series_div(num.coeffs(), &den.coeffs()[m..], m);
        Ok(s[m - 1].clone())
    }

    /// Denominator with every factor `(t - c)^m`, `c ∈ roots`, divided out.
    pub fn residual_denominator(&self, roots: &[Q]) -> Poly {
        let mut den = self.den.clone();
        for c in roots {
            let lin = Poly::linear_root(c);
            loop {
                let (q, r) = den.div_rem(&lin);
                if !r.is_zero() || den.degree() == Some(0) {
                    break;
                }
                den = q;
            }
        }
        den
    }
}

pub fn q_to_string(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or_else(|| if q.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(n: &[i64], d: &[i64]) -> RationalFn {
        RationalFn::new(Poly::from_ints(n), Poly::from_ints(d)).unwrap()
    }

    #[test]
    fn residue_examples() {
        let inv_t = rf(&[1], &[0, 1]);
        assert_eq!(inv_t.residue(&Point::Zero).unwrap(), int(1));
        assert_eq!(inv_t.residue(&Point::Infinity).unwrap(), int(-1));
        let f = rf(&[0, 1], &[-4, 0, 1]);
        assert_eq!(f.residue(&Point::Zero).unwrap(), int(0));
        // t/(t²-4) has residue 1/2 at ±2 and -1 at infinity.
        assert_eq!(f.residue(&Point::At(int(2))).unwrap(), frac(1, 2));
        assert_eq!(f.residue(&Point::Infinity).unwrap(), int(-1));
    }

    #[test]
    fn higher_order_poles() {
        // e^t-free check: (1 + t + t²)/t³ has residue 1 at 0.
        let f = rf(&[1, 1, 1], &[0, 0, 0, 1]);
        assert_eq!(f.residue(&Point::Zero).unwrap(), int(1));
        assert_eq!(f.residue(&Point::Infinity).unwrap(), int(-1));
        // t³ dt has a pole of order 5 at infinity but zero residue.
        let g = RationalFn::poly(Poly::from_ints(&[0, 0, 0, 1]));
        assert_eq!(g.residue(&Point::Infinity).unwrap(), int(0));
        // 1/(t-1)² has no residue at 1.
        let h = rf(&[1], &[1, -2, 1]);
        assert_eq!(h.residue(&Point::At(int(1))).unwrap(), int(0));
    }

    #[test]
    fn reduces_and_normalizes() {
        let f = rf(&[-2, 0, 2], &[2, 2]); // 2(t²-1)/(2(t+1)) = t - 1
        assert_eq!(f.den(), &Poly::from_ints(&[1]));
        assert_eq!(f.num(), &Poly::from_ints(&[-1, 1]));
        assert!(RationalFn::new(Poly::from_ints(&[1]), Poly::zero()).is_err());
    }

    #[test]
    fn shift_and_divide() {
        let p = Poly::from_ints(&[1, 2, 3]);
        assert_eq!(p.shift(&int(1)), Poly::from_ints(&[6, 8, 3]));
        let (q, r) = p.div_rem(&Poly::from_ints(&[1, 1]));
        assert_eq!(q.mul(&Poly::from_ints(&[1, 1])).add(&r), p);
        let s = series_div(&[int(1)], &[int(1), int(-1)], 5);
        assert!(s.iter().all(|c| *c == int(1)));
    }
}
