//! Named, reproducible experiments. Each one runs a fixed computation from a
//! JSON config, compares measured statistics against tolerances and writes a
//! CSV table with a JSON manifest next to it.

mod runs;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SemicircleKs,
    TwEdge,
    PainleveMoments,
    AsepExact,
    BetheSpectrum,
    Stationarity,
    LimitShape,
    OnePointF2,
    CatalanBridge,
    GenusWick,
    CoulombGas,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::SemicircleKs,
        Experiment::TwEdge,
        Experiment::PainleveMoments,
        Experiment::AsepExact,
        Experiment::BetheSpectrum,
        Experiment::Stationarity,
        Experiment::LimitShape,
        Experiment::OnePointF2,
        Experiment::CatalanBridge,
        Experiment::GenusWick,
        Experiment::CoulombGas,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::SemicircleKs => "semicircle-ks",
            Experiment::TwEdge => "tw-edge",
            Experiment::PainleveMoments => "painleve-moments",
            Experiment::AsepExact => "asep-exact",
            Experiment::BetheSpectrum => "bethe-spectrum",
            Experiment::Stationarity => "stationarity",
            Experiment::LimitShape => "limit-shape",
            Experiment::OnePointF2 => "one-point-f2",
            Experiment::CatalanBridge => "catalan-bridge",
            Experiment::GenusWick => "genus-wick",
            Experiment::CoulombGas => "coulomb-gas",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Experiment::ALL.iter().map(|e| e.id()).collect();
                Error::Schema(format!("unknown experiment `{s}` (known: {})", known.join(", ")))
            })
    }
}

fn default_seed() -> u64 {
    1
}

fn default_workers() -> usize {
    1
}

/// Everything that determines an experiment's output. With `workers = 1`
/// reruns are byte-identical; other worker counts give the same numbers
/// because every random draw is tied to a fixed substream index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment: experiment.id().to_string(),
            params: Map::new(),
            seed: default_seed(),
            workers: default_workers(),
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn with_param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn validate(&self) -> Result<Experiment> {
        if self.workers == 0 {
            return Err(Error::Schema("workers must be at least 1".into()));
        }
        self.experiment.parse()
    }

    fn params<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(Value::Object(self.params.clone()))
            .map_err(|e| Error::Schema(format!("{}: params: {e}", self.experiment)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `measured < tolerance`.
    Below,
    /// `measured == tolerance`, for exact counts.
    Equal,
}

/// One gated comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            comparison: Comparison::Below,
            pass: measured < tolerance,
        }
    }

    pub fn equal(name: &str, measured: f64, expected: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance: expected,
            comparison: Comparison::Equal,
            pass: measured == expected,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.comparison {
            Comparison::Below => "<",
            Comparison::Equal => "==",
        };
        write!(
            f,
            "{} {} = {:.6e} {op} {:e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

/// ChaCha stream ids `first..first + count` under the key `seed`. Stream 0 is
/// the root stream and substream `i` is stream `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstreamRange {
    pub consumer: String,
    pub seed: u64,
    pub first: u64,
    pub count: u64,
}

/// Plain string table written as CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Error::Io {
            path: PathBuf::from("<memory>"),
            source: e.into_error(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub seed: u64,
    pub workers: usize,
    /// Parameters after defaults were filled in.
    pub params: Value,
    pub checks: Vec<Check>,
    /// Ungated values worth looking at next to the checks.
    pub measurements: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub substreams: Vec<SubstreamRange>,
    pub elapsed_seconds: f64,
    pub artifacts: Vec<PathBuf>,
    #[serde(skip)]
    pub table: Table,
}

impl Report {
    fn new(experiment: Experiment, cfg: &ExperimentConfig, params: Value) -> Self {
        Self {
            experiment,
            seed: cfg.seed,
            workers: cfg.workers,
            params,
            checks: Vec::new(),
            measurements: BTreeMap::new(),
            notes: Vec::new(),
            substreams: Vec::new(),
            elapsed_seconds: 0.0,
            artifacts: Vec::new(),
            table: Table::default(),
        }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn measure(&mut self, name: &str, v: f64) {
        self.measurements.insert(name.to_string(), v);
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn streams(&mut self, consumer: &str, seed: u64, first: u64, count: u64) {
        self.substreams.push(SubstreamRange {
            consumer: consumer.into(),
            seed,
            first,
            count,
        });
    }

    fn root_stream(&mut self, consumer: &str, seed: u64) {
        self.streams(consumer, seed, 0, 1);
    }

    /// Substreams `0..count`, i.e. stream ids `1..=count`.
    fn substream_range(&mut self, consumer: &str, seed: u64, count: u64) {
        self.streams(consumer, seed, 1, count);
    }

    /// The stream that produced [`rng::child_seed`]`(seed, label)`.
    fn child_key(&mut self, consumer: &str, seed: u64, label: u64) -> u64 {
        self.streams(consumer, seed, (1 << 63) | label, 1);
        crate::rng::child_seed(seed, label)
    }

    /// Every substream index is handed to exactly one consumer.
    pub fn substreams_disjoint(&self) -> bool {
        let s = &self.substreams;
        (0..s.len()).all(|i| {
            (i + 1..s.len()).all(|j| {
                s[i].seed != s[j].seed
                    || s[i].first + s[i].count <= s[j].first
                    || s[j].first + s[j].count <= s[i].first
            })
        })
    }

    pub fn manifest(&self) -> Value {
        json!({
            "experiment": self.experiment,
            "seed": self.seed,
            "workers": self.workers,
            "params": self.params,
            "passed": self.passed(),
            "checks": self.checks,
            "measurements": self.measurements,
            "notes": self.notes,
            "substreams": self.substreams,
            "substreams_disjoint": self.substreams_disjoint(),
            "elapsed_seconds": self.elapsed_seconds,
            "csv": format!("{}.csv", self.experiment),
            "rows": self.table.rows.len(),
            "version": env!("CARGO_PKG_VERSION"),
            "build": crate::BUILD,
        })
    }

    /// Writes `<id>.csv` and `<id>.json` into `dir`.
    pub fn write(&mut self, dir: &Path) -> Result<()> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| Error::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        let json_path = dir.join(format!("{}.json", self.experiment));
        std::fs::write(&csv_path, self.table.to_csv()?).map_err(io(&csv_path))?;
        self.artifacts = vec![csv_path, json_path.clone()];
        let text = serde_json::to_string_pretty(&self.manifest())?;
        std::fs::write(&json_path, text).map_err(io(&json_path))?;
        Ok(())
    }
}

/// Runs the configured experiment on a pool of `workers` threads and writes
/// its artifacts when an output directory is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let which = cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let mut report = pool.install(|| runs::dispatch(which, cfg))?;
    report.elapsed_seconds = start.elapsed().as_secs_f64();
    if !report.substreams_disjoint() {
        return Err(Error::InvalidParameter(format!(
            "{which}: substream ranges overlap: {:?}",
            report.substreams
        )));
    }
    if let Some(dir) = &cfg.out {
        report.write(dir)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.id().parse::<Experiment>().unwrap(), e);
            assert_eq!(serde_json::to_value(e).unwrap(), json!(e.id()));
        }
        assert!(matches!("nope".parse::<Experiment>(), Err(Error::Schema(_))));
    }

    #[test]
    fn config_schema_is_strict() {
        let ok = ExperimentConfig::from_json(r#"{"experiment": "stationarity", "seed": 4}"#).unwrap();
        assert_eq!(ok.workers, 1);
        assert_eq!(ok.seed, 4);
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"experiment": "stationarity", "sede": 4}"#),
            Err(Error::Schema(_))
        ));
        let bad = ExperimentConfig::new(Experiment::Stationarity).with_param("nn", json!(3));
        assert!(matches!(run_experiment(&bad), Err(Error::Schema(_))));
        let zero = ExperimentConfig { workers: 0, ..ok };
        assert!(matches!(zero.validate(), Err(Error::Schema(_))));
    }

    #[test]
    fn overlapping_substreams_are_detected() {
        let cfg = ExperimentConfig::new(Experiment::TwEdge);
        let mut r = Report::new(Experiment::TwEdge, &cfg, Value::Null);
        r.substream_range("a", 1, 10);
        r.root_stream("b", 1);
        r.substream_range("c", 2, 10);
        let k = r.child_key("d", 1, 3);
        r.substream_range("e", k, 10);
        assert!(r.substreams_disjoint());
        r.streams("f", 1, 10, 2);
        assert!(!r.substreams_disjoint());
    }

    #[test]
    fn check_semantics() {
        assert!(Check::below("d", 0.01, 0.05).pass);
        assert!(!Check::below("d", 0.05, 0.05).pass);
        assert!(Check::equal("n", 0.0, 0.0).pass);
        assert!(!Report::new(Experiment::TwEdge, &ExperimentConfig::new(Experiment::TwEdge), Value::Null).passed());
    }
}
