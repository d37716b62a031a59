use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::Args;
use rayon::prelude::*;
use serde_json::{json, Value};

use kpzlab::asep::{
    build_initial, height, one_point_rescaled, simulate_substream, step_window, InitialCondition, LatticeKind,
    Rates,
};
use kpzlab::exact::{
    bethe_eigenpair, bethe_solve_all, delta, generator, generator_segment, master_evolve,
    transition_probability_detailed, ContourSpec,
};
use kpzlab::experiment::{run_experiment as run_named, ExperimentConfig};
use kpzlab::rmt::{
    edge_rescale, esd, metropolis_sample, sample_gue_substream, semicircle, semicircle_cdf, trace_moment,
    wick_trace_moment, EmpiricalMeasure, MetropolisConfig, SpectralSample,
};
use kpzlab::stats::ks_distance;
use kpzlab::toprec::{expansion_coeffs, moments, q_to_string, to_json, write_csv, TopRec};
use kpzlab::tracy_widom::{hastings_mcleod, PainleveGrid, TWDistribution};

use crate::{schema, Outcome, Settings};

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| kpzlab::Error::Io { path: dir.to_path_buf(), source })?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf> {
    create_dir(dir)?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(&path, text).map_err(|source| kpzlab::Error::Io { path: path.clone(), source })?;
    Ok(path)
}

fn csv_writer(dir: &Path, name: &str) -> Result<(csv::Writer<std::fs::File>, PathBuf)> {
    create_dir(dir)?;
    let path = dir.join(name);
    let w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((w, path))
}

fn parse_sites(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|v| v.trim().parse::<i64>().map_err(|e| schema(format!("bad site `{v}`: {e}"))))
        .collect()
}

fn manifest(settings: &Settings, body: Value) -> Value {
    let mut m = json!({
        "seed_root": settings.seed,
        "workers": settings.workers,
        "build": kpzlab::BUILD,
        "version": env!("CARGO_PKG_VERSION"),
    });
    if let (Some(m), Value::Object(b)) = (m.as_object_mut(), body) {
        m.extend(b);
    }
    m
}

#[derive(Debug, Args)]
pub struct SimulateAsep {
    /// Left-jump probability; the right one is 1 - p.
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Final time.
    #[arg(long, default_value_t = 100.0)]
    t: f64,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    /// Run on a ring of this many sites instead of the infinite line.
    #[arg(long)]
    ring: Option<usize>,
    /// Bernoulli initial condition of this density instead of the step.
    #[arg(long)]
    bernoulli: Option<f64>,
    /// Snapshot times for the height profile (default: the final time).
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
    /// Export the rescaled one-point statistic at the origin instead of
    /// height profiles (step initial condition only).
    #[arg(long)]
    one_point: bool,
}

impl SimulateAsep {
    pub fn run(self, s: &Settings) -> Result<Outcome> {
        let rates = Rates::new(self.p)?;
        let ic = match self.bernoulli {
            Some(b) => InitialCondition::Bernoulli { b, seed: s.seed },
            None => InitialCondition::Step,
        };
        if self.one_point && (self.ring.is_some() || self.bernoulli.is_some()) {
            bail!(schema("--one-point needs the step initial condition on the line".into()));
        }
        let gap = rates.q() - rates.p();
        // The one-point statistic reads the height at t/(q - p).
        let t_end = if self.one_point {
            if gap <= 0.0 {
                bail!(schema("--one-point needs p < 1/2".into()));
            }
            self.t / gap
        } else {
            self.t
        };
        let lattice = match self.ring {
            Some(len) => LatticeKind::Ring { len },
            None => step_window(t_end),
        };
        let cfg = build_initial(lattice, &ic)?;
        let times = if self.times.is_empty() { vec![self.t] } else { self.times.clone() };
        let rows: Vec<Vec<(f64, i64, f64)>> = (0..self.samples as u64)
            .into_par_iter()
            .map(|i| -> kpzlab::Result<_> {
                let traj = simulate_substream(&cfg, rates, t_end, s.seed, i)?;
                if self.one_point {
                    return Ok(vec![(self.t, 0, one_point_rescaled(&traj, self.t)?)]);
                }
                let mut out = Vec::new();
                for &t in &times {
                    let h = height(&traj, t)?;
                    for (k, v) in h.values.iter().enumerate() {
                        out.push((t, h.x_start + k as i64, *v as f64));
                    }
                }
                Ok(out)
            })
            .collect::<kpzlab::Result<_>>()?;
        let (mut w, path) = csv_writer(&s.out, "simulate-asep.csv")?;
        w.write_record(["seed", "t", "x", "value"])?;
        for (i, traj) in rows.iter().enumerate() {
            for (t, x, v) in traj {
                w.write_record([i.to_string(), t.to_string(), x.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        let m = manifest(
            s,
            json!({
                "command": "simulate-asep",
                "rates": rates,
                "lattice": lattice,
                "initial_condition": ic,
                "t_end": t_end,
                "samples": self.samples,
                "value": if self.one_point { "one-point statistic" } else { "height" },
                "seed_column": "substream index under seed_root",
                "csv": path,
            }),
        );
        write_json(&s.out, "simulate-asep.json", &m)?;
        println!("wrote {} rows for {} trajectories to {}", rows.iter().map(Vec::len).sum::<usize>(), self.samples, path.display());
        Ok(Outcome::Pass)
    }
}

#[derive(Debug, Args)]
pub struct ExactProb {
    /// Start positions, comma separated and increasing.
    #[arg(long, allow_hyphen_values = true)]
    y: String,
    /// End positions.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Quadrature nodes per variable.
    #[arg(long, default_value_t = 128)]
    nodes: usize,
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    /// Compare with the uniformization oracle; fails above 1e-8.
    #[arg(long)]
    oracle: bool,
}

impl ExactProb {
    pub fn run(self, s: &Settings) -> Result<Outcome> {
        let (y, x) = (parse_sites(&self.y)?, parse_sites(&self.x)?);
        let rates = Rates::new(self.p)?;
        let v = transition_probability_detailed(&y, &x, self.t, rates, ContourSpec::new(self.radius, self.nodes)?)?;
        let mut record = json!({
            "N": y.len(),
            "window": Value::Null,
            "p": self.p,
            "t": self.t,
            "y": y,
            "x": x,
            "value": v.value,
            "M": v.nodes,
            "r": v.radius,
            "residuals": { "quadrature_change": v.change, "imag": v.imag },
        });
        let mut outcome = Outcome::Pass;
        if self.oracle {
            let lo = y.iter().chain(&x).min().copied().unwrap_or(0) - 18;
            let hi = y.iter().chain(&x).max().copied().unwrap_or(0) + 19;
            let g = generator_segment(y.len(), lo, hi, rates)?;
            let pi = master_evolve(&g, &delta(&g, &y)?, self.t)?;
            let o = pi[g.index_of(&x).context("end point outside the oracle segment")?];
            record["window"] = json!([lo, hi]);
            record["oracle"] = json!(o);
            record["residuals"]["oracle_diff"] = json!((v.value - o).abs());
            if (v.value - o).abs() >= 1e-8 {
                outcome = Outcome::Fail;
            }
        }
        write_json(&s.out, "exact-prob.json", &record)?;
        println!("{}", serde_json::to_string_pretty(&record)?);
        Ok(outcome)
    }
}

#[derive(Debug, Args)]
pub struct Bethe {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long)]
    l: usize,
    #[arg(long, default_value_t = 0.3)]
    p: f64,
}

impl Bethe {
    pub fn run(self, s: &Settings) -> Result<Outcome> {
        let rates = Rates::new(self.p)?;
        let g = generator(self.n, self.l, rates)?;
        let spectrum = g.spectrum();
        let sweep = bethe_solve_all(self.n, self.l, rates);
        let mut records = Vec::new();
        let (mut worst_res, mut worst_dist, mut null) = (0f64, 0f64, 0usize);
        for sol in &sweep.solutions {
            let (e, v) = match bethe_eigenpair(sol) {
                Err(kpzlab::Error::NullVector) => {
                    null += 1;
                    continue;
                }
                other => other?,
            };
            let av = g.apply_complex(&v);
            let vmax = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let res = av.iter().zip(&v).map(|(a, b)| (a - e * b).norm()).fold(0.0, f64::max) / vmax;
            let dist = spectrum.iter().map(|z| (z - e).norm()).fold(f64::INFINITY, f64::min);
            worst_res = worst_res.max(res);
            worst_dist = worst_dist.max(dist);
            records.push(json!({
                "N": self.n,
                "L": self.l,
                "p": self.p,
                "roots": sol.roots.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "energy": [e.re, e.im],
                "residuals": { "bethe": sol.residual, "eigen": res, "spectrum_distance": dist },
            }));
        }
        let out = json!({
            "generator_dim": g.dim(),
            "solutions": records,
            "null_vectors": null,
            "failed_starts": sweep.failures,
        });
        write_json(&s.out, "bethe.json", &out)?;
        println!(
            "N = {}, L = {}, p = {}: {} eigenpairs (dim {}), {} null vectors, max residual {:.2e}, max spectrum distance {:.2e}",
            self.n,
            self.l,
            self.p,
            records.len(),
            g.dim(),
            null,
            worst_res,
            worst_dist
        );
        Ok(if worst_res < 1e-8 && worst_dist < 1e-9 { Outcome::Pass } else { Outcome::Fail })
    }
}

#[derive(Debug, Args)]
pub struct GueSpectrum {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    /// Histogram cells over [-2.5, 2.5].
    #[arg(long, default_value_t = 50)]
    bins: usize,
}

impl GueSpectrum {
    pub fn run(self, s: &Settings) -> Result<Outcome> {
        if self.samples == 0 || self.bins == 0 {
            bail!(schema("--samples and --bins must be positive".into()));
        }
        let spectra: Vec<SpectralSample> = (0..self.samples as u64)
            .into_par_iter()
            .map(|i| SpectralSample::of(&sample_gue_substream(self.n, s.seed, i)?))
            .collect::<kpzlab::Result<_>>()?;
        let (mut w, spectrum_path) = csv_writer(&s.out, "gue-spectrum.csv")?;
        w.write_record(["sample", "index", "eigenvalue", "scaled"])?;
        let scale = (self.n as f64).sqrt();
        for (i, sp) in spectra.iter().enumerate() {
            for (k, y) in sp.eigenvalues.iter().enumerate() {
                w.write_record([i.to_string(), k.to_string(), y.to_string(), (y / scale).to_string()])?;
            }
        }
        w.flush()?;
        let pooled = EmpiricalMeasure::from_atoms(spectra.iter().flat_map(|sp| esd(sp).atoms).collect())?;
        let (mut w, esd_path) = csv_writer(&s.out, "gue-esd.csv")?;
        w.write_record(["x", "density", "semicircle"])?;
        for (x, d) in pooled.histogram(-2.5, 2.5, self.bins) {
            w.write_record([x.to_string(), d.to_string(), semicircle(x).to_string()])?;
        }
        w.flush()?;
        let mut edge_path = None;
        if self.n >= 2 {
            let (mut w, path) = csv_writer(&s.out, "gue-edge.csv")?;
            w.write_record(["sample", "rescaled_max"])?;
            for (i, sp) in spectra.iter().enumerate() {
                w.write_record([i.to_string(), edge_rescale(sp)?.to_string()])?;
            }
            w.flush()?;
            edge_path = Some(path);
        }
        let ks = ks_distance(&pooled.atoms, semicircle_cdf)?;
        let m = manifest(
            s,
            json!({
                "command": "gue-spectrum",
                "n": self.n,
                "samples": self.samples,
                "substreams": [1, self.samples],
                "ks_to_semicircle": ks.d,
                "csv": [spectrum_path, esd_path],
                "edge_csv": edge_path,
            }),
        );
        write_json(&s.out, "gue-spectrum.json", &m)?;
        println!("n = {}, {} draws: KS distance of the ESD to the semicircle {:.4}", self.n, self.samples, ks.d);
        Ok(Outcome::Pass)
    }
}

#[derive(Debug, Args)]
pub struct CoulombMcmc {
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Single-coordinate proposals, burn-in included.
    #[arg(long, default_value_t = 200_000)]
    steps: usize,
    #[arg(long, default_value_t = 0.2)]
    burn_in: f64,
    /// Record every `thin` sweeps.
    #[arg(long, default_value_t = 1)]
    thin: usize,
}

impl CoulombMcmc {
    pub fn run(self, s: &Settings) -> Result<Outcome> {
        let mut cfg = MetropolisConfig::new(self.n, self.steps, s.seed);
        cfg.burn_in = self.burn_in;
        cfg.thin = self.thin;
        let run = metropolis_sample(cfg)?;
        let (mut w, path) = csv_writer(&s.out, "coulomb-mcmc.csv")?;
        w.write_record(["record", "index", "value"])?;
        for (r, state) in run.states.iter().enumerate() {
            for (k, y) in state.iter().enumerate() {
                w.write_record([r.to_string(), k.to_string(), y.to_string()])?;
            }
        }
        w.flush()?;
        let m = manifest(
            s,
            json!({
                "command": "coulomb-mcmc",
                "config": cfg,
                "records": run.states.len(),
                "acceptance": run.acceptance,
                "sigma": run.sigma,
                "final_log_density": run.final_log_density,
                "csv": path,
            }),
        );
        write_json(&s.out, "coulomb-mcmc.json", &m)?;
        println!("{} recorded states, acceptance {:.3}", run.states.len(), run.acceptance);
        Ok(Outcome::Pass)
    }
}

#[derive(Debug, Args)]
pub struct TraceMoments {
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Powers j of E[Tr M^j].
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    j: Vec<u32>,
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    /// Allowed deviation in standard errors.
    #[arg(long, default_value_t = 3.0)]
    sigma: f64,
}

impl TraceMoments {
    pub fn run(self, s: &Settings) -> Result<Outcome> {
        let (mut w, path) = csv_writer(&s.out, "trace-moments.csv")?;
        w.write_record(["n", "j", "estimate", "stderr", "exact", "z"])?;
        let mut worst: f64 = 0.0;
        for (k, &j) in self.j.iter().enumerate() {
            let key = kpzlab::rng::child_seed(s.seed, k as u64 + 1);
            let est = trace_moment(self.n, j, self.samples, key)?;
            let exact = wick_trace_moment(self.n as u64, j) as f64;
            let z = if est.stderr > 0.0 { (est.mean - exact).abs() / est.stderr } else { (est.mean - exact).abs() };
            worst = worst.max(z);
            w.write_record([self.n.to_string(), j.to_string(), est.mean.to_string(), est.stderr.to_string(), exact.to_string(), z.to_string()])?;
            println!("E[Tr M^{j}] = {:.4} ± {:.4}, exact {exact}", est.mean, est.stderr);
        }
        w.flush()?;
        let m = manifest(
            s,
            json!({
                "command": "trace-moments",
                "n": self.n,
                "j": self.j,
                "samples": self.samples,
                "max_z": worst,
                "tolerance_sigma": self.sigma,
                "csv": path,
            }),
        );
        write_json(&s.out, "trace-moments.json", &m)?;
        Ok(if worst < self.sigma { Outcome::Pass } else { Outcome::Fail })
    }
}

#[derive(Debug, Args)]
pub struct TwCdf {
    /// Points at which to print F2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    s: Vec<f64>,
}

impl TwCdf {
    pub fn run(self, s: &Settings) -> Result<Outcome> {
        let dist = TWDistribution::new(hastings_mcleod(PainleveGrid::default())?)?;
        create_dir(&s.out)?;
        let path = s.out.join("tw-cdf.csv");
        dist.write_csv(&path)?;
        for &x in &self.s {
            println!("F2({x}) = {:.12}", dist.cdf_at(x)?);
        }
        let m = manifest(
            s,
            json!({ "command": "tw-cdf", "mean": dist.mean, "std": dist.std, "grid": PainleveGrid::default(), "csv": path }),
        );
        write_json(&s.out, "tw-cdf.json", &m)?;
        println!("mean {:.10}, std {:.10}, table in {}", dist.mean, dist.std, path.display());
        Ok(Outcome::Pass)
    }
}

#[derive(Debug, Args)]
pub struct Toprec {
    #[arg(long)]
    g: usize,
    #[arg(long)]
    k: usize,
    /// Expand near z = ∞ in the first variable up to this order.
    #[arg(long)]
    expand_order: Option<usize>,
}

impl Toprec {
    pub fn run(self, s: &Settings) -> Result<Outcome> {
        let mut tr = TopRec::new();
        let w = tr.get(self.g, self.k)?.clone();
        let mut doc = to_json(&w);
        if let Some(order) = self.expand_order {
            doc["expansion"] = if w.k == 1 {
                json!(moments(&w, order)?.iter().map(q_to_string).collect::<Vec<_>>())
            } else {
                json!(expansion_coeffs(&w, 0, order)?
                    .iter()
                    .map(|c| c
                        .terms()
                        .map(|(e, q)| json!({ "exponents": e, "coeff": q_to_string(q) }))
                        .collect::<Vec<_>>())
                    .collect::<Vec<_>>())
            };
        }
        let stem = format!("toprec_g{}_k{}", self.g, self.k);
        let json_path = write_json(&s.out, &format!("{stem}.json"), &doc)?;
        let csv_path = s.out.join(format!("{stem}.csv"));
        write_csv(&w, &csv_path)?;
        if let Some(e) = doc.get("expansion") {
            println!("expansion coefficients m_0..: {e}");
        }
        println!("W_{{{},{}}} written to {} and {}", self.g, self.k, json_path.display(), csv_path.display());
        Ok(Outcome::Pass)
    }
}

pub fn run_experiment(
    s: &Settings,
    from_file: Option<ExperimentConfig>,
    id: Option<String>,
    params: &[String],
) -> Result<Outcome> {
    let mut cfg = match (from_file, id) {
        (Some(mut cfg), Some(id)) => {
            cfg.experiment = id;
            cfg
        }
        (Some(cfg), None) => cfg,
        (None, Some(id)) => ExperimentConfig::new(id.parse()?),
        (None, None) => bail!(schema("run-experiment needs an id or --config".into())),
    };
    for kv in params {
        let (k, v) = kv.split_once('=').ok_or_else(|| schema(format!("--param `{kv}` is not key=value")))?;
        let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        cfg.params.insert(k.to_string(), v);
    }
    cfg.seed = s.seed;
    cfg.workers = s.workers;
    cfg.out = Some(s.out.clone());
    let report = run_named(&cfg)?;
    for c in &report.checks {
        println!("{c}");
    }
    for (k, v) in &report.measurements {
        println!("  {k} = {v}");
    }
    for n in &report.notes {
        println!("  note: {n}");
    }
    println!(
        "{} {} in {:.1} s; artifacts in {}",
        report.experiment,
        if report.passed() { "passed" } else { "FAILED" },
        report.elapsed_seconds,
        s.out.display()
    );
    Ok(if report.passed() { Outcome::Pass } else { Outcome::Fail })
}
