use kpzlab::rmt::{semicircle_stieltjes, wick_trace_moment};
use kpzlab::toprec::{
    base_cases, expansion_coeffs, frac, genus_expansion, int, integrand_residues, moments, pole_orders,
    recursion_step, residue, seeded_cache, to_json, write_csv, Body, CurveChart, MultiDiff, Point, Poly, RationalFn,
    TopRec, Q,
};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn full() -> &'static TopRec {
    static TR: OnceLock<TopRec> = OnceLock::new();
    TR.get_or_init(|| {
        let mut tr = TopRec::new();
        for g in 0..=2 {
            for k in 1..=3 {
                tr.get(g, k).unwrap();
            }
        }
        tr
    })
}

fn w(g: usize, k: usize) -> &'static MultiDiff {
    &full().cache()[&(g, k)]
}

fn stable() -> Vec<(usize, usize)> {
    (0..=2usize)
        .flat_map(|g| (1..=3usize).map(move |k| (g, k)))
        .filter(|&(g, k)| 2 * g + k > 2)
        .collect()
}

fn catalan_oracle(k: usize) -> Vec<u64> {
    let mut c = vec![1u64];
    for m in 0..k {
        c.push((0..=m).map(|i| c[i] * c[m - i]).sum());
    }
    c
}

#[test]
fn w01_expands_to_catalan_numbers() {
    let (w01, _) = base_cases();
    let m = moments(&w01, 20).unwrap();
    let c = catalan_oracle(10);
    for (k, mk) in m.iter().enumerate() {
        let expect = if k % 2 == 0 { int(c[k / 2] as i64) } else { int(0) };
        assert_eq!(*mk, expect, "m_{k}");
    }
    assert_eq!(&m[..9], &[1, 0, 1, 0, 2, 0, 5, 0, 14].map(int)[..]);
}

#[test]
fn w01_is_the_semicircle_stieltjes_transform() {
    let (w01, _) = base_cases();
    let Body::OneForm(f) = &w01.body else { panic!() };
    let chart = CurveChart;
    let z = 3.0;
    let t = chart.t_of_z(z);
    let value = f.eval_f64(t) / chart.dz().eval_f64(t);
    let s = semicircle_stieltjes(Complex64::new(z, 1e-9)).unwrap();
    assert!((value - s.re).abs() < 1e-12, "{value} vs {}", s.re);
}

#[test]
fn bergman_is_symmetric() {
    let (_, w02) = base_cases();
    let (a, b) = (frac(1, 3), frac(-5, 2));
    assert_eq!(w02.eval(&[a.clone(), b.clone()]).unwrap(), w02.eval(&[b, a]).unwrap());
}

#[test]
fn residue_examples() {
    let inv_t = RationalFn::new(Poly::from_ints(&[1]), Poly::from_ints(&[0, 1])).unwrap();
    assert_eq!(residue(&inv_t, &Point::Zero).unwrap(), int(1));
    assert_eq!(residue(&inv_t, &Point::Infinity).unwrap(), int(-1));
    let f = RationalFn::new(Poly::from_ints(&[0, 1]), Poly::from_ints(&[-4, 0, 1])).unwrap();
    assert_eq!(residue(&f, &Point::Zero).unwrap(), int(0));
}

#[test]
fn base_cases_are_not_recursion_outputs() {
    let cache = seeded_cache();
    assert!(recursion_step(0, 1, &cache).is_err());
    assert!(recursion_step(0, 2, &cache).is_err());
}

#[test]
fn w11_genus_one_quartic_coefficient() {
    let m = moments(w(1, 1), 4).unwrap();
    assert_eq!(m[4], int(1));
    // E[Tr M⁴] = 2n³ + n splits as (c₀, c₁) = (2, 1).
    let mut tr = full().clone();
    assert_eq!(genus_expansion(&mut tr, 2).unwrap()[..2], [int(2), int(1)]);
}

#[test]
fn odd_coefficients_vanish_through_genus_two() {
    for g in 0..=2 {
        let m = moments(w(g, 1), 20).unwrap();
        for (k, c) in m.iter().enumerate().filter(|(k, _)| k % 2 == 1) {
            assert_eq!(*c, int(0), "g = {g}, m_{k}");
        }
    }
}

/// `Σ_g n^{j+1-2g} m_{g,2j}` must be `E[Tr M^{2j}]` as a polynomial in `n`.
#[test]
fn genus_expansion_matches_wick_counts() {
    let mut tr = full().clone();
    for j in 1..=4usize {
        let per_genus = genus_expansion(&mut tr, j).unwrap();
        for n in 1..=6u64 {
            let mut total = int(0);
            for (g, c) in per_genus.iter().enumerate() {
                let power = j as i64 + 1 - 2 * g as i64;
                if power < 0 {
                    assert_eq!(*c, int(0));
                    continue;
                }
                total += c * int((n as i64).pow(power as u32));
            }
            let wick = wick_trace_moment(n, 2 * j as u32);
            assert_eq!(total, int(wick as i64), "j = {j}, n = {n}");
        }
    }
}

/// Connected third cumulant of `Tr M²`: diagonal entries contribute
/// `κ₃(χ²₁) = 8` each, off-diagonal pairs `κ₃(2 Exp(1)) = 16` each, so
/// `κ₃ = 8n + 8n(n-1) = 8n²`, i.e. 8 at genus zero after `M → M/√n`.
#[test]
fn w03_gives_the_connected_cubic_cumulant() {
    let c1 = expansion_coeffs(w(0, 3), 0, 2).unwrap();
    let w2 = MultiDiff { g: 0, k: 2, body: Body::Laurent(c1[2].clone()) };
    let c2 = expansion_coeffs(&w2, 0, 2).unwrap();
    let w1 = MultiDiff { g: 0, k: 1, body: Body::Laurent(c2[2].clone()) };
    assert_eq!(moments(&w1, 2).unwrap()[2], int(8));
}

#[test]
fn stable_terms_have_poles_only_at_branch_points() {
    let others = [frac(2, 7), frac(-3, 5)];
    for (g, k) in stable() {
        let wgk = w(g, k);
        let Body::Laurent(p) = &wgk.body else { panic!("({g},{k}) not Laurent") };
        assert!(pole_orders(wgk).is_some());
        for var in 0..k {
            let f = p.restrict(var, &others[..k - 1]);
            // Reduced denominator is a pure power of t: no anti-diagonal poles.
            let den = f.den().coeffs();
            assert!(den[..den.len() - 1].iter().all(|c| *c == int(0)), "({g},{k}) var {var}");
        }
    }
}

#[test]
fn integrand_residues_sum_to_zero() {
    let cache = full().cache();
    let points = [frac(1, 3), frac(-2, 7), frac(5, 4)];
    for (g, k) in stable() {
        let residues = integrand_residues(g, k, cache, &points[..k]).unwrap();
        let sum: Q = residues.iter().map(|(_, r)| r.clone()).sum();
        assert_eq!(sum, int(0), "({g},{k})");
    }
}

#[test]
fn expansions_are_exact_rationals() {
    let m = moments(w(2, 1), 20).unwrap();
    assert_eq!(m.len(), 21);
    // E[Tr M^{20}] genus-two coefficient is an integer map count.
    assert!(m.iter().all(|c| c.is_integer()));
    assert!(moments(w(2, 1), 21).is_err());
}

#[test]
fn exports() {
    let json = to_json(w(1, 2));
    assert_eq!(json["g"], 1);
    assert_eq!(json["body"]["kind"], "laurent");
    let terms = json["body"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), w(1, 2).laurent().unwrap().len());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w11.csv");
    write_csv(w(1, 1), &path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 9);
}

fn rational() -> impl Strategy<Value = Q> {
    (prop_oneof![-9i64..=-1, 1i64..=9], 1i64..=9).prop_map(|(a, b)| frac(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(20) })]

    #[test]
    fn every_term_is_symmetric(t in proptest::collection::vec(rational(), 3)) {
        prop_assume!(t[0] != t[1] && t[1] != t[2] && t[0] != t[2]);
        let perms: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for (g, k) in stable().into_iter().chain([(0, 2)]) {
            if k == 1 {
                continue;
            }
            let wgk = w(g, k);
            let base = wgk.eval(&t[..k]).unwrap();
            for p in perms {
                let args: Vec<Q> = p.iter().filter(|&&i| i < k).map(|&i| t[i].clone()).collect();
                prop_assert_eq!(wgk.eval(&args).unwrap(), base.clone(), "({},{})", g, k);
            }
        }
    }
}
