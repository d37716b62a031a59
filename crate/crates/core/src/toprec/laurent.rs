use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::poly::{int, Poly, RationalFn, Q};

/// Multivariate Laurent polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Laurent {
    nvars: usize,
    terms: BTreeMap<Vec<i32>, Q>,
}

impl Laurent {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::monomial(c, vec![0; nvars])
    }

    pub fn monomial(c: Q, exps: Vec<i32>) -> Self {
        let mut out = Self::zero(exps.len());
        out.add_term(exps, c);
        out
    }

    /// `Σ c_e x_var^e` in `nvars` variables.
    pub fn univariate(nvars: usize, var: usize, coeffs: &[(i32, Q)]) -> Self {
        let mut out = Self::zero(nvars);
        for (e, c) in coeffs {
            let mut exps = vec![0; nvars];
            exps[var] = *e;
            out.add_term(exps, c.clone());
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exps: Vec<i32>, c: Q) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, o: &Self) {
        for (e, c) in &o.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    pub fn scale(&self, s: &Q) -> Self {
        let mut out = Self::zero(self.nvars);
        if s.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect();
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.mul_truncated(o, 0, i32::MAX)
    }

    /// Product keeping only terms with `x_var` exponent at most `max`.
    pub fn mul_truncated(&self, o: &Self, var: usize, max: i32) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                if ea[var].saturating_add(eb[var]) > max {
                    continue;
                }
                let e: Vec<i32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Lowest exponent of `x_var`.
    pub fn valuation(&self, var: usize) -> Option<i32> {
        self.terms.keys().map(|e| e[var]).min()
    }

    pub fn max_degree(&self, var: usize) -> Option<i32> {
        self.terms.keys().map(|e| e[var]).max()
    }

    /// `x_var → 1/x_var`.
    pub fn invert_var(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e[var] = -e[var];
            out.add_term(e, c.clone());
        }
        out
    }

    /// Substitutes `x_i → sign_i · y_{target_i}` into a polynomial in `nvars`
    /// new variables; several old variables may land on the same new one.
    pub fn substitute(&self, map: &[(usize, i32)], nvars: usize) -> Self {
        assert_eq!(map.len(), self.nvars);
        let mut out = Self::zero(nvars);
        for (e, c) in &self.terms {
            let mut ne = vec![0; nvars];
            let mut negative = false;
            for (i, &(target, sign)) in map.iter().enumerate() {
                ne[target] += e[i];
                if sign < 0 && e[i] % 2 != 0 {
                    negative = !negative;
                }
            }
            out.add_term(ne, if negative { -c.clone() } else { c.clone() });
        }
        out
    }

    /// Coefficient of `x_var^e`, with `x_var` removed.
    pub fn coefficient(&self, var: usize, e: i32) -> Self {
        let mut out = Self::zero(self.nvars - 1);
        for (exps, c) in &self.terms {
            if exps[var] == e {
                let mut rest = exps.clone();
                rest.remove(var);
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Groups by the exponent of `x_var`; the coefficients lose that variable.
    pub fn split(&self, var: usize) -> BTreeMap<i32, Laurent> {
        let mut out: BTreeMap<i32, Laurent> = BTreeMap::new();
        for (exps, c) in &self.terms {
            let mut rest = exps.clone();
            rest.remove(var);
            out.entry(exps[var])
                .or_insert_with(|| Laurent::zero(self.nvars - 1))
                .add_term(rest, c.clone());
        }
        out
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        assert_eq!(x.len(), self.nvars);
        let mut total = Q::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (xi, &ei) in x.iter().zip(e) {
                term *= pow(xi, ei);
            }
            total += term;
        }
        total
    }

    /// Permutes variables: variable `i` becomes variable `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let map: Vec<(usize, i32)> = perm.iter().map(|&p| (p, 1)).collect();
        self.substitute(&map, self.nvars)
    }

    /// The one-variable restriction with the others fixed, as a reduced
    /// rational function in `x_var`.
    pub fn restrict(&self, var: usize, others: &[Q]) -> RationalFn {
        let (num, low) = self.restrict_raw(var, others);
        RationalFn::new(num, Poly::monomial(Q::one(), low)).expect("monomial denominator")
    }

    /// Unreduced restriction `num / x_var^low`.
    pub fn restrict_raw(&self, var: usize, others: &[Q]) -> (Poly, usize) {
        let mut full: Vec<Q> = others.to_vec();
        full.insert(var, int(1));
        let low = self.valuation(var).unwrap_or(0).min(0);
        let mut coeffs: BTreeMap<usize, Q> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, (xi, &ei)) in full.iter().zip(e).enumerate() {
                if i != var {
                    term *= pow(xi, ei);
                }
            }
            *coeffs.entry((e[var] - low) as usize).or_insert_with(Q::zero) += term;
        }
        let top = coeffs.keys().max().copied().unwrap_or(0);
        let num = Poly::new((0..=top).map(|i| coeffs.get(&i).cloned().unwrap_or_else(Q::zero)).collect());
        (num, (-low) as usize)
    }
}

pub fn pow(x: &Q, e: i32) -> Q {
    let mut r = Q::one();
    for _ in 0..e.unsigned_abs() {
        r *= x;
    }
    if e < 0 {
        r.recip()
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::super::poly::frac;
    use super::*;

    #[test]
    fn substitution_tracks_signs() {
        // x0 x1^3 with x0 → y0, x1 → -y0 gives -y0^4.
        let p = Laurent::monomial(int(1), vec![1, 3]);
        let s = p.substitute(&[(0, 1), (0, -1)], 1);
        assert_eq!(s, Laurent::monomial(int(-1), vec![4]));
    }

    #[test]
    fn truncated_product_and_eval() {
        let a = Laurent::univariate(2, 0, &[(-1, int(1)), (2, int(3))]);
        let b = Laurent::univariate(2, 1, &[(1, int(2))]).add_var0(&[(0, int(1))]);
        let full = a.mul(&b);
        let cut = a.mul_truncated(&b, 0, 0);
        assert!(cut.len() < full.len());
        let x = [frac(1, 2), int(3)];
        assert_eq!(full.eval(&x), a.eval(&x) * b.eval(&x));
    }

    #[test]
    fn restriction_is_reduced() {
        // (x0² - 1)/x0 at x1 = 2 times x1: 2(x0² - 1)/x0.
        let mut p = Laurent::zero(2);
        p.add_term(vec![1, 1], int(1));
        p.add_term(vec![-1, 1], int(-1));
        let r = p.restrict(0, &[int(2)]);
        assert_eq!(r.den(), &Poly::from_ints(&[0, 1]));
        assert_eq!(r.num(), &Poly::from_ints(&[-2, 0, 2]));
    }

    impl Laurent {
        fn add_var0(mut self, c: &[(i32, Q)]) -> Self {
            self.add_assign(&Laurent::univariate(self.nvars, 0, c));
            self
        }
    }
}
