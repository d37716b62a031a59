//! Python module `kpzlab`.

use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use kpzlab::asep::{build_initial, height, one_point_ensemble, simulate_substream, step_window, InitialCondition, Rates};
use kpzlab::exact::{
    bethe_eigenpair, bethe_solve_all, delta, generator, generator_segment, master_evolve,
    transition_probability_detailed, ContourSpec,
};
use kpzlab::experiment::{run_experiment as run_named, ExperimentConfig};
use kpzlab::rmt::{edge_ensemble, hermitian_eigenvalues, sample_gue_substream, trace_moment as mc_moment, wick_trace_moment};
use kpzlab::toprec::{moments, q_to_string, to_json, TopRec};
use kpzlab::tracy_widom::{hastings_mcleod, PainleveGrid, TWDistribution};

fn py_err(e: kpzlab::Error) -> PyErr {
    use kpzlab::Error::*;
    match e {
        OutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        Schema(_) | InvalidParameter(_) | InvalidOrdering(_) | WindowTooSmall { .. } | StateSpaceTooLarge { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for kpzlab::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// The Tracy-Widom GUE distribution on a Painlevé II grid.
#[pyclass(name = "TracyWidom", frozen)]
struct PyTracyWidom {
    dist: TWDistribution,
}

#[pymethods]
impl PyTracyWidom {
    #[new]
    #[pyo3(signature = (lo=None, hi=None, step=None))]
    fn new(lo: Option<f64>, hi: Option<f64>, step: Option<f64>) -> PyResult<Self> {
        let mut grid = PainleveGrid::default();
        if let Some(v) = lo {
            grid.lo = v;
        }
        if let Some(v) = hi {
            grid.hi = v;
        }
        if let Some(v) = step {
            grid.step = v;
        }
        let dist = TWDistribution::new(hastings_mcleod(grid).py()?).py()?;
        Ok(Self { dist })
    }

    fn cdf(&self, s: f64) -> PyResult<f64> {
        self.dist.cdf_at(s).py()
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.dist.mean
    }

    #[getter]
    fn std(&self) -> f64 {
        self.dist.std
    }

    fn median(&self) -> f64 {
        self.dist.median()
    }

    /// Rows `(s, q, F2, density)`.
    fn table(&self) -> Vec<(f64, f64, f64, f64)> {
        self.dist.table()
    }
}

/// Cached topological recursion on `y² + zy + 1 = 0`.
#[pyclass(name = "TopRec")]
struct PyTopRec {
    inner: TopRec,
}

#[pymethods]
impl PyTopRec {
    #[new]
    fn new() -> Self {
        Self { inner: TopRec::new() }
    }

    /// `W_{g,k}` as a JSON document.
    fn correlator(&mut self, g: usize, k: usize) -> PyResult<String> {
        Ok(to_json(self.inner.get(g, k).py()?).to_string())
    }

    /// Moments of `W_{g,1}` at infinity, as exact rationals in string form.
    fn moments(&mut self, g: usize, order: usize) -> PyResult<Vec<String>> {
        let w = self.inner.get(g, 1).py()?.clone();
        Ok(moments(&w, order).py()?.iter().map(q_to_string).collect())
    }
}

/// Contour-integral transition probability `P(y -> x; t)`.
#[pyfunction]
#[pyo3(signature = (y, x, t, p, nodes=128, radius=0.5))]
fn transition_probability(y: Vec<i64>, x: Vec<i64>, t: f64, p: f64, nodes: usize, radius: f64) -> PyResult<f64> {
    let spec = ContourSpec::new(radius, nodes).py()?;
    Ok(transition_probability_detailed(&y, &x, t, Rates::new(p).py()?, spec).py()?.value)
}

/// The same probability by uniformization on the segment `[lo, hi]`.
#[pyfunction]
fn master_equation_probability(y: Vec<i64>, x: Vec<i64>, t: f64, p: f64, lo: i64, hi: i64) -> PyResult<f64> {
    let g = generator_segment(y.len(), lo, hi, Rates::new(p).py()?).py()?;
    let pi = master_evolve(&g, &delta(&g, &y).py()?, t).py()?;
    g.index_of(&x)
        .map(|i| pi[i])
        .ok_or_else(|| PyValueError::new_err("end point outside [lo, hi]"))
}

/// Height profile `(x_start, heights)` at time `t` from step initial data.
#[pyfunction]
#[pyo3(signature = (p, t, seed, index=0))]
fn simulate_height(p: f64, t: f64, seed: u64, index: u64) -> PyResult<(i64, Vec<i64>)> {
    let cfg = build_initial(step_window(t), &InitialCondition::Step).py()?;
    let traj = simulate_substream(&cfg, Rates::new(p).py()?, t, seed, index).py()?;
    let h = height(&traj, t).py()?;
    Ok((h.x_start, h.values))
}

/// Rescaled one-point statistics at the origin, one per substream.
#[pyfunction]
fn one_point_samples(py: Python<'_>, p: f64, t: f64, samples: usize, seed: u64) -> PyResult<Vec<f64>> {
    let rates = Rates::new(p).py()?;
    py.detach(|| one_point_ensemble(rates, t, samples, seed)).py()
}

/// Eigenvalues of GUE draw number `index`, ascending.
#[pyfunction]
#[pyo3(signature = (n, seed, index=0))]
fn gue_eigenvalues(n: usize, seed: u64, index: u64) -> PyResult<Vec<f64>> {
    hermitian_eigenvalues(&sample_gue_substream(n, seed, index).py()?).py()
}

/// Edge-rescaled largest eigenvalues.
#[pyfunction]
fn gue_edge_samples(py: Python<'_>, n: usize, samples: usize, seed: u64) -> PyResult<Vec<f64>> {
    py.detach(|| edge_ensemble(n, samples, seed)).py()
}

/// Monte Carlo `E[Tr M^j]` as `(mean, stderr)`.
#[pyfunction]
fn trace_moment(n: usize, j: u32, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let est = mc_moment(n, j, samples, seed).py()?;
    Ok((est.mean, est.stderr))
}

/// Exact `E[Tr M^j]` by Wick's theorem.
#[pyfunction]
fn wick_moment(n: u64, j: u32) -> u128 {
    wick_trace_moment(n, j)
}

/// Bethe energies `(re, im)` on a ring of `l` sites with `n` particles.
#[pyfunction]
fn bethe_energies(n: usize, l: usize, p: f64) -> PyResult<Vec<(f64, f64)>> {
    let sweep = bethe_solve_all(n, l, Rates::new(p).py()?);
    let mut out = Vec::new();
    for sol in &sweep.solutions {
        match bethe_eigenpair(sol) {
            Ok((e, _)) => out.push((e.re, e.im)),
            Err(kpzlab::Error::NullVector) => {}
            Err(e) => return Err(py_err(e)),
        }
    }
    Ok(out)
}

/// Spectrum of the ring generator by dense diagonalization.
#[pyfunction]
fn generator_spectrum(n: usize, l: usize, p: f64) -> PyResult<Vec<(f64, f64)>> {
    let g = generator(n, l, Rates::new(p).py()?).py()?;
    Ok(g.spectrum().iter().map(|z| (z.re, z.im)).collect())
}

/// Runs a named experiment; `params` is a JSON object. Returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (experiment, params=None, seed=1, workers=1, out=None))]
fn run_experiment(
    py: Python<'_>,
    experiment: &str,
    params: Option<&str>,
    seed: u64,
    workers: usize,
    out: Option<std::path::PathBuf>,
) -> PyResult<String> {
    let mut cfg = ExperimentConfig::new(experiment.parse().py()?);
    if let Some(text) = params {
        let map: serde_json::Map<String, serde_json::Value> =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("params: {e}")))?;
        cfg.params = map;
    }
    cfg.seed = seed;
    cfg.workers = workers;
    cfg.out = out;
    let report = py.detach(|| run_named(&cfg)).py()?;
    serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn kpzlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTracyWidom>()?;
    m.add_class::<PyTopRec>()?;
    m.add_function(wrap_pyfunction!(transition_probability, m)?)?;
    m.add_function(wrap_pyfunction!(master_equation_probability, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_height, m)?)?;
    m.add_function(wrap_pyfunction!(one_point_samples, m)?)?;
    m.add_function(wrap_pyfunction!(gue_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(gue_edge_samples, m)?)?;
    m.add_function(wrap_pyfunction!(trace_moment, m)?)?;
    m.add_function(wrap_pyfunction!(wick_moment, m)?)?;
    m.add_function(wrap_pyfunction!(bethe_energies, m)?)?;
    m.add_function(wrap_pyfunction!(generator_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("BUILD", kpzlab::BUILD)?;
    Ok(())
}
