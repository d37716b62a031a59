use kpzlab::asep::Rates;
use kpzlab::exact::{
    delta, generator_segment, master_evolve, spectrum_coverage, transition_probability,
    transition_probability_detailed, ContourSpec,
};
use proptest::prelude::*;

/// Uniformization on a segment wide enough that the walls are never felt.
fn oracle(y: &[i64], x: &[i64], t: f64, rates: Rates) -> f64 {
    let lo = y.iter().chain(x).min().unwrap() - 14;
    let hi = y.iter().chain(x).max().unwrap() + 15;
    let g = generator_segment(y.len(), lo, hi, rates).unwrap();
    let pi = master_evolve(&g, &delta(&g, y).unwrap(), t).unwrap();
    pi[g.index_of(x).unwrap()]
}

fn ordered(n: usize, span: i64) -> impl Strategy<Value = Vec<i64>> {
    proptest::sample::subsequence((-span..=span).collect::<Vec<_>>(), n)
}

fn mirror(v: &[i64]) -> Vec<i64> {
    v.iter().rev().map(|x| -x).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(24) })]

    #[test]
    fn contour_matches_uniformization(
        n in 1usize..=2,
        y in ordered(2, 3),
        shift in proptest::collection::vec(-3i64..=3, 2),
        t in 0.05f64..2.0,
        pi in 0usize..3,
    ) {
        let p = [0.0, 0.25, 0.5][pi];
        let rates = Rates::new(p).unwrap();
        let y = y[..n].to_vec();
        let mut x: Vec<i64> = y.iter().zip(&shift).map(|(a, s)| a + s).collect();
        x.sort_unstable();
        x.dedup();
        prop_assume!(x.len() == n);
        let c = transition_probability(&y, &x, t, rates, ContourSpec::default()).unwrap();
        let o = oracle(&y, &x, t, rates);
        prop_assert!((c - o).abs() < 1e-8, "{y:?} -> {x:?}: {c} vs {o}");
    }

    #[test]
    fn reflection_and_time_reversal(
        y in ordered(2, 3),
        x in ordered(2, 4),
        t in 0.1f64..1.5,
        p in 0.0f64..1.0,
    ) {
        let rates = Rates::new(p).unwrap();
        let c = ContourSpec::default();
        let base = transition_probability(&y, &x, t, rates, c).unwrap();
        let reflected = transition_probability(&mirror(&y), &mirror(&x), t, rates.reflected(), c).unwrap();
        let reversed = transition_probability(&x, &y, t, rates.reflected(), c).unwrap();
        prop_assert!((base - reflected).abs() < 1e-9);
        prop_assert!((base - reversed).abs() < 1e-9);
    }
}

#[test]
fn three_particles_match_uniformization() {
    let cases: [(&[i64], &[i64], f64, f64); 4] = [
        (&[0, 1, 2], &[1, 2, 4], 1.3, 0.0),
        (&[-1, 0, 3], &[-2, 1, 3], 0.8, 0.25),
        (&[0, 2, 4], &[-1, 2, 5], 2.0, 0.5),
        (&[0, 1, 2], &[-2, 0, 1], 1.0, 0.75),
    ];
    for (y, x, t, p) in cases {
        let rates = Rates::new(p).unwrap();
        let c = transition_probability(y, x, t, rates, ContourSpec::default()).unwrap();
        let o = oracle(y, x, t, rates);
        assert!((c - o).abs() < 1e-8, "{y:?} -> {x:?}: {c} vs {o}");
    }
}

#[test]
fn quadrature_is_stable_under_refinement() {
    let v = transition_probability_detailed(&[0, 1], &[2, 4], 1.5, Rates::new(0.25).unwrap(), ContourSpec::default())
        .unwrap();
    assert!(v.change < 1e-9);
    assert!(v.imag.abs() < 1e-9);
}

#[test]
fn symmetric_exclusion_is_reflection_invariant() {
    let r = Rates::new(0.5).unwrap();
    let c = ContourSpec::default();
    let a = transition_probability(&[0, 1], &[-1, 3], 1.2, r, c).unwrap();
    let b = transition_probability(&[-1, 0], &[-3, 1], 1.2, r, c).unwrap();
    assert!((a - b).abs() < 1e-10);
}

#[test]
fn bethe_coverage_is_consistent() {
    for l in 4..=6 {
        let cov = spectrum_coverage(2, l, Rates::new(0.45).unwrap()).unwrap();
        assert_eq!(cov.unmatched, 0, "{cov:?}");
        assert!(cov.fraction > 0.0 && cov.fraction <= 1.0);
        println!("N = 2, L = {l}: coverage {:.3} ({} of {})", cov.fraction, cov.matched, cov.dim);
    }
}

#[test]
fn deep_left_tails_are_resolved() {
    let c = ContourSpec::default();
    for (p, y, x) in [
        (0.5, vec![0i64, 1], vec![-6i64, -4]),
        (0.25, vec![0, 1], vec![-5, -3]),
        (0.75, vec![0, 2], vec![5, 7]),
        (0.0, vec![0, 1], vec![-1, 3]),
    ] {
        let rates = Rates::new(p).unwrap();
        let v = transition_probability(&y, &x, 2.0, rates, c).unwrap();
        let o = oracle(&y, &x, 2.0, rates);
        assert!((v - o).abs() < 1e-12, "p = {p}, {x:?}: {v} vs {o}");
    }
}

#[test]
fn nearly_one_sided_rates_against_the_drift() {
    let c = ContourSpec::default();
    for (p, y, x, t) in [
        (0.951_117_586, vec![-2i64, -1], vec![1i64, 2], 0.1),
        (0.99, vec![0, 1], vec![2, 4], 1.0),
        (0.001, vec![0, 1, 2], vec![-3, -2, 0], 1.5),
    ] {
        let rates = Rates::new(p).unwrap();
        let v = transition_probability_detailed(&y, &x, t, rates, c).unwrap();
        let o = oracle(&y, &x, t, rates);
        assert!(v.radius < c.radius);
        assert!((v.value - o).abs() < 1e-12, "p = {p}, {x:?}: {} vs {o}", v.value);
    }
}

#[test]
fn three_particle_window_sums_to_one() {
    use kpzlab::exact::transition_table;
    let c = ContourSpec::new(0.5, 64).unwrap();
    for p in [0.0, 0.25, 0.5] {
        let y = [0i64, 1, 3];
        let table = transition_table(&y, 2.0, Rates::new(p).unwrap(), c).unwrap();
        let d = 20;
        let mut total = 0.0;
        for a in -d..=d {
            for b in (a + 1)..=(1 + d) {
                for e in (b + 1)..=(3 + d) {
                    let x = [a, b, e];
                    if (b - 1i64).abs() > d || (e - 3i64).abs() > d {
                        continue;
                    }
                    total += table.get(&x).unwrap();
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-6, "p = {p}: {total}");
    }
}
