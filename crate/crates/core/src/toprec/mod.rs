//! Eynard–Orantin recursion on `y² + z y + 1 = 0` in the rational chart
//! `t = (y - 1)/(y + 1)`, in exact rational arithmetic.

mod curve;
mod expansion;
mod laurent;
mod poly;
mod recursion;

pub use curve::{w01, CurveChart, Kernel};
pub use expansion::{
    chart_series, expansion_coeffs, genus_expansion, moments, sample_points, to_json, write_csv, write_json, MAX_ORDER,
};
pub use laurent::Laurent;
pub use poly::{frac, int, q_to_f64, q_to_string, Point, Poly, RationalFn, Q, MAX_POLE_ORDER};
pub use recursion::{
    base_cases, evaluate_by_residues, integrand_residues, pole_orders, recursion_step, seeded_cache, Body, Cache,
    MultiDiff, TopRec, MAX_GENUS, MAX_POINTS,
};

/// `Res_{t=a} f(t) dt`.
pub fn residue(f: &RationalFn, a: &Point) -> crate::Result<Q> {
    f.residue(a)
}
