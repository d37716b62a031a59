use num_traits::Zero;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Check, Experiment, ExperimentConfig, Report, Table};
use crate::asep::{
    build_initial, height_of_config, one_point_ensemble, simulate_substream, step_window,
    InitialCondition, Rates,
};
use crate::exact::{
    bethe_eigenpair, bethe_solve_all, delta, generator, generator_segment, master_evolve,
    transition_probability, transition_table, uniform, ContourSpec,
};
use crate::rmt::{
    catalan, edge_ensemble, esd, genus_counts, metropolis_sample, sample_gue,
    sample_gue_substream, semicircle_cdf, semicircle_moment, trace_moment, wick_trace_moment,
    MetropolisConfig, SpectralSample,
};
use crate::stats::{ks_distance, ks_two_sample, mean_std};
use crate::toprec::{genus_expansion, moments, q_to_f64, q_to_string, TopRec, Q};
use crate::tracy_widom::{
    f2_moments, hastings_mcleod, PainleveGrid, TWDistribution, TW_MEAN, TW_STD, TW_VAR,
};
use crate::{rng, Context, Error, Result};

/// Reference numbers quoted for F₂: the mean and a spread of 0.8131947928329,
/// which is the variance (the standard deviation is its square root).
const QUOTED_MEAN: f64 = -1.771_086_807_411;
const QUOTED_SPREAD: f64 = 0.813_194_792_832_9;

pub(super) fn dispatch(which: Experiment, cfg: &ExperimentConfig) -> Result<Report> {
    let run = match which {
        Experiment::SemicircleKs => semicircle_ks,
        Experiment::TwEdge => tw_edge,
        Experiment::PainleveMoments => painleve_moments,
        Experiment::AsepExact => asep_exact,
        Experiment::BetheSpectrum => bethe_spectrum,
        Experiment::Stationarity => stationarity,
        Experiment::LimitShape => limit_shape,
        Experiment::OnePointF2 => one_point_f2,
        Experiment::CatalanBridge => catalan_bridge,
        Experiment::GenusWick => genus_wick,
        Experiment::CoulombGas => coulomb_gas,
    };
    run(cfg).map_err(|e| match e {
        Error::Schema(_) => e,
        other => Error::Context {
            context: format!("experiment {which}"),
            source: Box::new(other),
        },
    })
}

fn start<P: Serialize + for<'de> Deserialize<'de>>(which: Experiment, cfg: &ExperimentConfig) -> Result<(P, Report)> {
    let p: P = cfg.params()?;
    let report = Report::new(which, cfg, serde_json::to_value(&p)?);
    Ok((p, report))
}

fn tw() -> Result<TWDistribution> {
    TWDistribution::new(hastings_mcleod(PainleveGrid::default())?)
}

fn f(x: f64) -> String {
    x.to_string()
}

fn positions(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SemicircleParams {
    n: usize,
}

impl Default for SemicircleParams {
    fn default() -> Self {
        Self { n: 500 }
    }
}

fn semicircle_ks(cfg: &ExperimentConfig) -> Result<Report> {
    let (p, mut r): (SemicircleParams, _) = start(Experiment::SemicircleKs, cfg)?;
    r.root_stream("gue draw", cfg.seed);
    let s = SpectralSample::of(&sample_gue(p.n, cfg.seed)?)?;
    let mu = esd(&s);
    let ks = ks_distance(&mu.atoms, semicircle_cdf)?;
    r.check(Check::below("ks_distance", ks.d, 0.05));
    r.measure("second_moment", mu.moment(2));
    r.measure("fourth_moment", mu.moment(4));
    let m = mu.atoms.len() as f64;
    let mut t = Table::new(&["x", "esd_cdf", "semicircle_cdf"]);
    for (i, &x) in mu.atoms.iter().enumerate() {
        t.push(vec![f(x), f((i + 1) as f64 / m), f(semicircle_cdf(x))]);
    }
    r.table = t;
    Ok(r)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EdgeParams {
    n: usize,
    samples: usize,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self { n: 100, samples: 4000 }
    }
}

fn tw_edge(cfg: &ExperimentConfig) -> Result<Report> {
    let (p, mut r): (EdgeParams, _) = start(Experiment::TwEdge, cfg)?;
    r.substream_range("gue draws", cfg.seed, p.samples as u64);
    let values = edge_ensemble(p.n, p.samples, cfg.seed)?;
    let (mean, std) = mean_std(&values)?;
    r.check(Check::below("mean_gap", (mean - QUOTED_MEAN).abs(), 0.1));
    r.check(Check::below("std_gap", (std - QUOTED_SPREAD).abs(), 0.1));
    r.measure("mean", mean);
    r.measure("std", std);
    r.measure("std_gap_to_f2_std", (std - TW_STD).abs());
    let dist = tw()?;
    r.measure("ks_to_f2", ks_distance(&values, |s| dist.cdf_clamped(s))?.d);
    r.note(format!(
        "the std reference {QUOTED_SPREAD} equals the F2 variance; the F2 standard deviation is {TW_STD:.10}"
    ));
    let mut t = Table::new(&["draw", "rescaled_max"]);
    for (i, v) in values.iter().enumerate() {
        t.push(vec![i.to_string(), f(*v)]);
    }
    r.table = t;
    Ok(r)
}

fn painleve_moments(cfg: &ExperimentConfig) -> Result<Report> {
    let (grid, mut r): (PainleveGrid, _) = start(Experiment::PainleveMoments, cfg)?;
    let sol = hastings_mcleod(grid)?;
    r.measure("ode_residual", sol.ode_residual());
    let dist = TWDistribution::new(sol)?;
    let (mean, std) = f2_moments(&dist);
    r.check(Check::below("mean_gap", (mean - QUOTED_MEAN).abs(), 1e-4));
    r.check(Check::below("variance_gap", (std * std - QUOTED_SPREAD).abs(), 1e-4));
    r.check(Check::below("std_gap", (std - TW_STD).abs(), 1e-4));
    r.measure("mean", mean);
    r.measure("std", std);
    r.measure("variance", std * std);
    r.measure("std_vs_quoted_spread", (std - QUOTED_SPREAD).abs());
    r.note(format!(
        "the quoted spread {QUOTED_SPREAD} is checked as the variance (reference {TW_VAR}); \
         read as a standard deviation it differs from the computed {std:.7} by {:.4}",
        (std - QUOTED_SPREAD).abs()
    ));
    let mut t = Table::new(&["s", "q", "f2_cdf", "f2_pdf"]);
    for (s, q, c, d) in dist.table() {
        t.push(vec![f(s), f(q), f(c), f(d)]);
    }
    r.table = t;
    Ok(r)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ExactParams {
    /// Random cases per particle number.
    cases: usize,
    t_max: f64,
    ps: Vec<f64>,
    nodes: usize,
    /// Window normalization: largest displacement per particle, and time.
    window: i64,
    window_t: f64,
    window_nodes: usize,
}

impl Default for ExactParams {
    fn default() -> Self {
        Self {
            cases: 20,
            t_max: 2.0,
            ps: vec![0.0, 0.25, 0.5],
            nodes: 128,
            window: 20,
            window_t: 2.0,
            window_nodes: 64,
        }
    }
}

struct ExactCase {
    y: Vec<i64>,
    x: Vec<i64>,
    t: f64,
    p: f64,
}

fn exact_case(n: usize, p: &ExactParams, rng: &mut rng::Rng) -> ExactCase {
    let mut sites: Vec<i64> = (-3..=3).collect();
    let mut y: Vec<i64> = (0..n).map(|_| sites.remove(rng.random_range(0..sites.len()))).collect();
    y.sort_unstable();
    let x = loop {
        let mut x: Vec<i64> = y.iter().map(|v| v + rng.random_range(-3..=3)).collect();
        x.sort_unstable();
        x.dedup();
        if x.len() == n {
            break x;
        }
    };
    let t = p.t_max * (1.0 - rng.random::<f64>());
    let rate = p.ps[rng.random_range(0..p.ps.len())];
    ExactCase { y, x, t, p: rate }
}

/// Uniformization on a segment padded far beyond any reachable displacement.
fn exact_oracle(c: &ExactCase, rates: Rates) -> Result<f64> {
    let lo = c.y.iter().chain(&c.x).min().expect("nonempty") - 18;
    let hi = c.y.iter().chain(&c.x).max().expect("nonempty") + 19;
    let g = generator_segment(c.y.len(), lo, hi, rates)?;
    let pi = master_evolve(&g, &delta(&g, &c.y)?, c.t)?;
    Ok(pi[g.index_of(&c.x).expect("inside the segment")])
}

fn ordered_tuples(y: &[i64], d: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for &yk in y {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                let floor = prefix.last().map_or(i64::MIN, |v| v + 1);
                ((yk - d).max(floor)..=yk + d).map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

fn asep_exact(cfg: &ExperimentConfig) -> Result<Report> {
    let (p, mut r): (ExactParams, _) = start(Experiment::AsepExact, cfg)?;
    if p.ps.is_empty() || !(p.t_max > 0.0) {
        return Err(Error::Schema("asep-exact: need a nonempty `ps` and t_max > 0".into()));
    }
    let contour = ContourSpec::new(0.5, p.nodes)?;
    let total = 3 * p.cases;
    r.substream_range("random cases", cfg.seed, total as u64);
    let rows: Vec<(usize, ExactCase, f64, f64)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let n = i / p.cases + 1;
            let c = exact_case(n, &p, &mut rng::substream(cfg.seed, i as u64));
            let rates = Rates::new(c.p)?;
            let v = transition_probability(&c.y, &c.x, c.t, rates, contour)
                .context(|| format!("contour {:?} -> {:?}", c.y, c.x))?;
            let o = exact_oracle(&c, rates)?;
            Ok((n, c, v, o))
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["kind", "n", "p", "t", "y", "x", "contour", "oracle", "abs_error"]);
    let mut worst: f64 = 0.0;
    for (n, c, v, o) in &rows {
        worst = worst.max((v - o).abs());
        t.push(vec![
            "case".into(),
            n.to_string(),
            f(c.p),
            f(c.t),
            positions(&c.y),
            positions(&c.x),
            f(*v),
            f(*o),
            f((v - o).abs()),
        ]);
    }
    r.check(Check::below("max_contour_error", worst, 1e-8));

    let wc = ContourSpec::new(0.5, p.window_nodes)?;
    if 2 * p.window >= p.window_nodes as i64 {
        return Err(Error::Schema("asep-exact: window must stay below window_nodes / 2".into()));
    }
    let starts: [&[i64]; 3] = [&[0], &[0, 1], &[0, 1, 3]];
    let mut mass_gap: f64 = 0.0;
    for y in starts {
        for &rate in &p.ps {
            let table = transition_table(y, p.window_t, Rates::new(rate)?, wc)?;
            let mut sum = 0.0;
            for x in ordered_tuples(y, p.window) {
                sum += table.get(&x)?;
            }
            mass_gap = mass_gap.max((sum - 1.0).abs());
            t.push(vec![
                "window".into(),
                y.len().to_string(),
                f(rate),
                f(p.window_t),
                positions(y),
                format!("+-{}", p.window),
                f(sum),
                "1".into(),
                f((sum - 1.0).abs()),
            ]);
        }
    }
    r.check(Check::below("window_mass_gap", mass_gap, 1e-6));
    r.table = t;
    Ok(r)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BetheParams {
    n: usize,
    ls: Vec<usize>,
    ps: Vec<f64>,
}

impl Default for BetheParams {
    fn default() -> Self {
        Self {
            n: 2,
            ls: vec![4, 5, 6],
            ps: vec![0.3, 0.5],
        }
    }
}

fn bethe_spectrum(cfg: &ExperimentConfig) -> Result<Report> {
    let (p, mut r): (BetheParams, _) = start(Experiment::BetheSpectrum, cfg)?;
    let mut t = Table::new(&["l", "p", "energy_re", "energy_im", "residual", "spectrum_distance"]);
    let (mut worst_residual, mut worst_match, mut empty, mut null, mut accepted): (f64, f64, usize, usize, usize) =
        (0.0, 0.0, 0, 0, 0);
    for &l in &p.ls {
        for &rate in &p.ps {
            let rates = Rates::new(rate)?;
            let g = generator(p.n, l, rates)?;
            let spectrum = g.spectrum();
            let sweep = bethe_solve_all(p.n, l, rates);
            let mut here = 0;
            for sol in &sweep.solutions {
                let (e, v) = match bethe_eigenpair(sol) {
                    Err(Error::NullVector) => {
                        null += 1;
                        continue;
                    }
                    other => other?,
                };
                let av = g.apply_complex(&v);
                let vmax = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
                let res = av.iter().zip(&v).map(|(a, b)| (a - e * b).norm()).fold(0.0, f64::max) / vmax;
                let dist = spectrum.iter().map(|s| (s - e).norm()).fold(f64::INFINITY, f64::min);
                worst_residual = worst_residual.max(res);
                worst_match = worst_match.max(dist);
                here += 1;
                t.push(vec![l.to_string(), f(rate), f(e.re), f(e.im), f(res), f(dist)]);
            }
            if here == 0 {
                empty += 1;
            }
            accepted += here;
            r.measure(&format!("accepted_l{l}_p{rate}"), here as f64);
            r.measure(&format!("dim_l{l}_p{rate}"), g.dim() as f64);
        }
    }
    r.check(Check::below("max_residual", worst_residual, 1e-8));
    r.check(Check::below("max_spectrum_distance", worst_match, 1e-9));
    r.check(Check::equal("systems_without_eigenpairs", empty as f64, 0.0));
    r.measure("accepted", accepted as f64);
    r.measure("null_vectors", null as f64);
    r.table = t;
    Ok(r)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct StationarityParams {
    systems: Vec<(usize, usize)>,
    ps: Vec<f64>,
}

impl Default for StationarityParams {
    fn default() -> Self {
        Self {
            systems: vec![(2, 5), (3, 7)],
            ps: vec![0.0, 0.3, 0.5],
        }
    }
}

fn stationarity(cfg: &ExperimentConfig) -> Result<Report> {
    let (p, mut r): (StationarityParams, _) = start(Experiment::Stationarity, cfg)?;
    let mut t = Table::new(&["n", "l", "p", "max_abs"]);
    let mut worst: f64 = 0.0;
    for &(n, l) in &p.systems {
        for &rate in &p.ps {
            let g = generator(n, l, Rates::new(rate)?)?;
            let out = g.apply_transpose(&uniform(&g));
            let m = out.iter().map(|v| v.abs()).fold(0.0, f64::max);
            worst = worst.max(m);
            t.push(vec![n.to_string(), l.to_string(), f(rate), f(m)]);
        }
    }
    r.check(Check::below("max_abs_uniform_drift", worst, 1e-12));
    r.table = t;
    Ok(r)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ShapeParams {
    t: f64,
    samples: usize,
    max_slope: f64,
}

impl Default for ShapeParams {
    fn default() -> Self {
        Self {
            t: 200.0,
            samples: 500,
            max_slope: 0.8,
        }
    }
}

fn limit_shape(cfg: &ExperimentConfig) -> Result<Report> {
    let (p, mut r): (ShapeParams, _) = start(Experiment::LimitShape, cfg)?;
    if p.samples == 0 || !(p.t > 0.0) || !(0.0..1.0).contains(&p.max_slope) {
        return Err(Error::Schema("limit-shape: need samples > 0, t > 0, 0 <= max_slope < 1".into()));
    }
    let reach = (p.max_slope * p.t).floor() as i64;
    let cfg0 = build_initial(step_window(p.t), &InitialCondition::Step)?;
    r.substream_range("trajectories", cfg.seed, p.samples as u64);
    let profiles: Vec<Vec<i64>> = (0..p.samples as u64)
        .into_par_iter()
        .map(|i| {
            let traj = simulate_substream(&cfg0, Rates::tasep(), p.t, cfg.seed, i)?;
            let h = height_of_config(&traj.final_config, p.t);
            (-reach..=reach)
                .map(|x| h.at(x).ok_or_else(|| Error::GridCoverage(format!("x = {x}"))))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["x", "mean_height", "limit_shape", "relative_error"]);
    let mut worst: f64 = 0.0;
    let mut at_origin = 0.0;
    for (k, x) in (-reach..=reach).enumerate() {
        let mean = profiles.iter().map(|h| h[k] as f64).sum::<f64>() / p.samples as f64;
        let shape = p.t / 2.0 + (x * x) as f64 / (2.0 * p.t);
        let rel = (mean - shape).abs() / shape;
        worst = worst.max(rel);
        if x == 0 {
            at_origin = mean;
        }
        t.push(vec![x.to_string(), f(mean), f(shape), f(rel)]);
    }
    r.check(Check::below("max_relative_error", worst, 0.02));
    // E h(t, 0) - t/2 → 2 · 2^{-4/3} t^{1/3} |E χ₂| at large t.
    let predicted = 2.0 * 2f64.powf(-4.0 / 3.0) * p.t.cbrt() * TW_MEAN.abs();
    r.measure("excess_at_origin", at_origin - p.t / 2.0);
    r.measure("predicted_fluctuation_excess_at_origin", predicted);
    r.note(format!(
        "the mean height exceeds the deterministic shape by the Tracy-Widom mean shift, \
         about {predicted:.2} at x = 0 ({:.1}% of t/2); the relative error decays like t^(-2/3)",
        100.0 * predicted / (p.t / 2.0)
    ));
    r.table = t;
    Ok(r)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OnePointParams {
    t: f64,
    samples: usize,
    p: f64,
}

impl Default for OnePointParams {
    fn default() -> Self {
        Self {
            t: 1000.0,
            samples: 5000,
            p: 0.0,
        }
    }
}

fn one_point_f2(cfg: &ExperimentConfig) -> Result<Report> {
    let (p, mut r): (OnePointParams, _) = start(Experiment::OnePointF2, cfg)?;
    r.substream_range("trajectories", cfg.seed, p.samples as u64);
    let stat = one_point_ensemble(Rates::new(p.p)?, p.t, p.samples, cfg.seed)?;
    // P(stat ≥ -s) → F₂(s), so -stat is compared with F₂.
    let chi: Vec<f64> = stat.iter().map(|v| -v).collect();
    let dist = tw()?;
    let ks = ks_distance(&chi, |s| dist.cdf_clamped(s))?;
    r.check(Check::below("ks_distance", ks.d, 0.06));
    let (mean, std) = mean_std(&chi)?;
    r.measure("mean", mean);
    r.measure("std", std);
    // The statistic lives on a lattice of spacing 1/(2^{-4/3} t^{1/3}), which
    // alone puts a floor under the distance to a continuous law. Spreading
    // each value uniformly over its cell shows how much of the distance is
    // discreteness and how much is the t^{-1/3} shift.
    let step = 1.0 / (2f64.powf(-4.0 / 3.0) * p.t.cbrt());
    let key = r.child_key("lattice jitter key", cfg.seed, 1);
    r.substream_range("lattice jitter", key, p.samples as u64);
    let smooth: Vec<f64> = chi
        .iter()
        .enumerate()
        .map(|(i, v)| v + step * (rng::substream(key, i as u64).random::<f64>() - 0.5))
        .collect();
    r.measure("lattice_step", step);
    r.measure("ks_distance_lattice_smoothed", ks_distance(&smooth, |s| dist.cdf_clamped(s))?.d);
    r.measure("mean_shift", mean - TW_MEAN);
    r.note(
        "the rescaled current is lattice valued and carries a t^(-1/3) mean shift; \
         ks_distance_lattice_smoothed is diagnostic only",
    );
    let mut t = Table::new(&["trajectory", "rescaled", "minus_rescaled"]);
    for (i, v) in stat.iter().enumerate() {
        t.push(vec![i.to_string(), f(*v), f(-v)]);
    }
    r.table = t;
    Ok(r)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CatalanParams {
    /// Even coefficients `m_0, m_2, …, m_{2k}` with `2k ≤ order`.
    order: usize,
}

impl Default for CatalanParams {
    fn default() -> Self {
        Self { order: 10 }
    }
}

fn catalan_bridge(cfg: &ExperimentConfig) -> Result<Report> {
    let (p, mut r): (CatalanParams, _) = start(Experiment::CatalanBridge, cfg)?;
    let mut tr = TopRec::new();
    let m = moments(tr.get(0, 1)?, p.order)?;
    let cat = catalan(p.order / 2);
    let mut t = Table::new(&["k", "coefficient", "catalan", "semicircle_moment"]);
    let (mut mismatches, mut worst) = (0usize, 0f64);
    for (k, c) in m.iter().enumerate() {
        let expect = if k % 2 == 0 { Q::from_integer(cat[k / 2].into()) } else { Q::zero() };
        if *c != expect {
            mismatches += 1;
        }
        let sc = semicircle_moment(k as u32);
        worst = worst.max((q_to_f64(c) - sc).abs());
        t.push(vec![k.to_string(), q_to_string(c), q_to_string(&expect), f(sc)]);
    }
    r.check(Check::equal("catalan_mismatches", mismatches as f64, 0.0));
    r.check(Check::below("max_semicircle_moment_gap", worst, 1e-8));
    r.table = t;
    Ok(r)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct WickParams {
    ns: Vec<usize>,
    max_j: u32,
    samples: usize,
    /// The polynomial identity is checked for `j ≤ exact_j`.
    exact_j: usize,
}

impl Default for WickParams {
    fn default() -> Self {
        Self {
            ns: vec![2, 4, 8],
            max_j: 4,
            samples: 20_000,
            exact_j: 4,
        }
    }
}

fn genus_wick(cfg: &ExperimentConfig) -> Result<Report> {
    let (p, mut r): (WickParams, _) = start(Experiment::GenusWick, cfg)?;
    let mut t = Table::new(&["kind", "n", "j", "estimate", "stderr", "exact", "z"]);
    let mut worst_z: f64 = 0.0;
    let mut label = 0;
    for &n in &p.ns {
        for j in 0..=p.max_j {
            label += 1;
            let key = r.child_key(&format!("key n={n} j={j}"), cfg.seed, label);
            if j > 0 {
                r.substream_range(&format!("gue draws n={n} j={j}"), key, p.samples as u64);
            }
            let est = trace_moment(n, j, p.samples, key)?;
            let exact = wick_trace_moment(n as u64, j) as f64;
            let z = if est.stderr > 0.0 {
                (est.mean - exact).abs() / est.stderr
            } else if est.mean == exact {
                0.0
            } else {
                f64::INFINITY
            };
            worst_z = worst_z.max(z);
            t.push(vec!["monte_carlo".into(), n.to_string(), j.to_string(), f(est.mean), f(est.stderr), f(exact), f(z)]);
        }
    }
    r.check(Check::below("max_sigma_deviation", worst_z, 3.0));

    let mut tr = TopRec::new();
    let mut mismatches = 0usize;
    for j in 0..=p.exact_j {
        let per_genus = genus_expansion(&mut tr, j)?;
        // Pairing counts by genus, padded to the same length.
        let counts = genus_counts(j);
        for (g, c) in per_genus.iter().enumerate() {
            let expect = Q::from_integer(counts.get(g).copied().unwrap_or(0).into());
            if *c != expect {
                mismatches += 1;
            }
            t.push(vec![
                "genus_coefficient".into(),
                "".into(),
                j.to_string(),
                q_to_string(c),
                "".into(),
                q_to_string(&expect),
                "".into(),
            ]);
        }
        if counts.len() > per_genus.len() && counts[per_genus.len()..].iter().any(|&c| c != 0) {
            mismatches += 1;
        }
    }
    r.check(Check::equal("genus_identity_mismatches", mismatches as f64, 0.0));
    r.table = t;
    Ok(r)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CoulombParams {
    n: usize,
    chains: usize,
    /// Single-coordinate proposals per chain, burn-in included.
    steps: usize,
    burn_in: f64,
    matrices: usize,
}

impl Default for CoulombParams {
    fn default() -> Self {
        Self {
            n: 20,
            chains: 4,
            steps: 1_000_000,
            burn_in: 0.2,
            matrices: 2000,
        }
    }
}

fn coulomb_gas(cfg: &ExperimentConfig) -> Result<Report> {
    let (p, mut r): (CoulombParams, _) = start(Experiment::CoulombGas, cfg)?;
    if p.chains == 0 || p.matrices == 0 {
        return Err(Error::Schema("coulomb-gas: need chains > 0 and matrices > 0".into()));
    }
    let keys: Vec<u64> = (0..p.chains as u64)
        .map(|c| {
            let key = r.child_key(&format!("metropolis key {c}"), cfg.seed, 100 + c);
            r.root_stream(&format!("metropolis chain {c}"), key);
            key
        })
        .collect();
    let runs = keys
        .par_iter()
        .map(|&key| {
            let mut mc = MetropolisConfig::new(p.n, p.steps, key);
            mc.burn_in = p.burn_in;
            metropolis_sample(mc)
        })
        .collect::<Result<Vec<_>>>()?;
    let chain: Vec<f64> = runs.iter().flat_map(|run| run.pooled_scaled()).collect();
    let key = r.child_key("matrix key", cfg.seed, 1);
    r.substream_range("gue draws", key, p.matrices as u64);
    let spectra: Vec<Vec<f64>> = (0..p.matrices as u64)
        .into_par_iter()
        .map(|i| Ok(esd(&SpectralSample::of(&sample_gue_substream(p.n, key, i)?)?).atoms))
        .collect::<Result<_>>()?;
    let matrix: Vec<f64> = spectra.into_iter().flatten().collect();
    let d = ks_two_sample(&chain, &matrix)?;
    r.check(Check::below("two_sample_ks", d, 0.05));
    let acceptance = runs.iter().map(|x| x.acceptance).sum::<f64>() / runs.len() as f64;
    r.measure("acceptance", acceptance);
    r.measure("chain_values", chain.len() as f64);
    r.measure("matrix_values", matrix.len() as f64);
    // Both samples at common quantile levels.
    let mut a = chain.clone();
    let mut b = matrix.clone();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let mut t = Table::new(&["level", "metropolis_quantile", "matrix_quantile"]);
    for k in 1..100 {
        let u = k as f64 / 100.0;
        let qa = a[((u * a.len() as f64) as usize).min(a.len() - 1)];
        let qb = b[((u * b.len() as f64) as usize).min(b.len() - 1)];
        t.push(vec![f(u), f(qa), f(qb)]);
    }
    r.table = t;
    Ok(r)
}
