use num_traits::{One, Zero};

use super::poly::{frac, int, Poly, RationalFn, Q};

/// Rational chart of `y² + z y + 1 = 0` with `t = (y - 1)/(y + 1)`:
/// `z(t) = -2(1 + t²)/(1 - t²)`, `y(t) = (1 + t)/(1 - t)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CurveChart;

impl CurveChart {
    pub fn z(&self) -> RationalFn {
        RationalFn::new(Poly::from_ints(&[-2, 0, -2]), Poly::from_ints(&[1, 0, -1])).expect("nonzero")
    }

    pub fn y(&self) -> RationalFn {
        RationalFn::new(Poly::from_ints(&[1, 1]), Poly::from_ints(&[1, -1])).expect("nonzero")
    }

    /// `dz/dt = -8t/(1 - t²)²`.
    pub fn dz(&self) -> RationalFn {
        self.z().derivative()
    }

    /// `y² + z y + 1`, identically zero.
    pub fn curve_equation(&self) -> RationalFn {
        let (y, z) = (self.y(), self.z());
        y.mul(&y).add(&z.mul(&y)).add(&RationalFn::poly(Poly::constant(Q::one())))
    }

    /// Zeros of `dz` in the chart; `None` stands for `t = ∞`.
    pub fn branch_points(&self) -> Vec<Option<Q>> {
        let dz = self.dz();
        let mut out = Vec::new();
        let num = dz.num();
        if num.valuation() == Some(1) && num.degree() == Some(1) {
            out.push(Some(Q::zero()));
        }
        // dz = f dt vanishes at infinity when deg den - deg num > 2.
        let gap = dz.den().degree().unwrap_or(0) as i64 - num.degree().unwrap_or(0) as i64;
        if gap > 2 {
            out.push(None);
        }
        out
    }

    /// The local involution `t ↦ -t` exchanging the sheets.
    pub fn involution(&self, t: &Q) -> Q {
        -t.clone()
    }

    /// `t` on the physical sheet (`y → 0` as `z → ∞`) for real `|z| > 2`.
    pub fn t_of_z(&self, z: f64) -> f64 {
        -((z + 2.0) / (z - 2.0)).sqrt()
    }
}

/// `K(t₁, t) = -(1/64)(1/(t + t₁) + 1/(t - t₁))(t² - 1)³/t²`, the `dt₁/dt`
/// coefficient of the recursion kernel.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kernel;

impl Kernel {
    /// As a rational function of `t` at fixed `t₁`.
    pub fn at(&self, t1: &Q) -> RationalFn {
        let plus = RationalFn::new(Poly::constant(Q::one()), Poly::new(vec![t1.clone(), Q::one()])).expect("nonzero");
        let minus = RationalFn::new(Poly::constant(Q::one()), Poly::linear_root(t1)).expect("nonzero");
        let cube = RationalFn::new(Poly::from_ints(&[-1, 0, 1]).pow(3), Poly::from_ints(&[0, 0, 1])).expect("nonzero");
        plus.add(&minus).mul(&cube).scale(&frac(-1, 64))
    }

    /// The same kernel rebuilt from the base cases:
    /// `½ ∫_{-t}^{t} W₀₂(t₁, ·) / (W₀₁(t) - W₀₁(-t))`.
    pub fn from_base_cases(&self, t1: &Q) -> RationalFn {
        // ∫_{-t}^{t} dt'/(t₁ - t')² = 2t/(t₁² - t²)
        let integral = RationalFn::new(
            Poly::from_ints(&[0, 2]),
            Poly::new(vec![t1 * t1, Q::zero(), int(-1)]),
        )
        .expect("nonzero");
        let w01 = w01();
        let diff = w01.sub(&w01.reflect_differential());
        integral.mul(&diff.recip().expect("nonzero")).scale(&frac(1, 2))
    }
}

/// `W₀₁ = y dz` as the `dt` coefficient `-8t/((1 - t)³(1 + t))`.
pub fn w01() -> RationalFn {
    let c = CurveChart;
    c.y().mul(&c.dz())
}

impl RationalFn {
    /// Pull-back of the differential `f(t) dt` by `t ↦ -t`: `-f(-t) dt`.
    pub fn reflect_differential(&self) -> RationalFn {
        self.reflect().neg()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_solves_the_curve() {
        let c = CurveChart;
        assert!(c.curve_equation().is_zero());
        assert_eq!(c.dz(), RationalFn::new(Poly::from_ints(&[0, -8]), Poly::from_ints(&[1, 0, -1]).pow(2)).unwrap());
        assert_eq!(c.branch_points(), vec![Some(Q::zero()), None]);
        // z is invariant under the involution, y goes to 1/y.
        let t = frac(1, 3);
        let s = c.involution(&t);
        assert_eq!(c.z().eval(&t), c.z().eval(&s));
        assert_eq!(c.y().eval(&t).unwrap() * c.y().eval(&s).unwrap(), int(1));
    }

    #[test]
    fn kernel_matches_base_case_construction() {
        for t1 in [frac(1, 2), frac(-3, 7), int(5)] {
            assert_eq!(Kernel.at(&t1), Kernel.from_base_cases(&t1));
        }
    }

    #[test]
    fn w01_closed_form() {
        let expect = RationalFn::new(Poly::from_ints(&[0, -8]), Poly::from_ints(&[1, -1]).pow(3).mul(&Poly::from_ints(&[1, 1]))).unwrap();
        assert_eq!(w01(), expect);
    }

    #[test]
    fn physical_sheet_has_small_y() {
        let c = CurveChart;
        for z in [3.0, -3.0, 10.0] {
            let t = c.t_of_z(z);
            let y = (1.0 + t) / (1.0 - t);
            assert!(y.abs() < 1.0, "z = {z}, y = {y}");
            assert!((y * y + z * y + 1.0).abs() < 1e-12);
        }
    }
}
