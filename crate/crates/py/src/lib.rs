//! Python bindings for the tugemm simulator.

use pyo3::exceptions::{PyIndexError, PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tugemm::dump::Tensor;
use tugemm::error::SimError;
use tugemm::{format, latency, oracle, parallel, problem, profiler, serial, sim, verify as verification};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sim_err(e: SimError) -> PyErr {
    match e {
        SimError::Overflow { .. } => PyOverflowError::new_err(e.to_string()),
        SimError::CellOutOfBounds { .. } => PyIndexError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn width(bits: u32) -> PyResult<problem::BitWidth> {
    problem::BitWidth::new(bits).map_err(value_err)
}

fn variant(name: &str) -> PyResult<sim::Variant> {
    match name {
        "serial" => Ok(sim::Variant::Serial),
        "parallel" => Ok(sim::Variant::Parallel),
        other => Err(PyValueError::new_err(format!(
            "variant must be 'serial' or 'parallel', got {other:?}"
        ))),
    }
}

fn policy(output_bits: Option<u32>) -> sim::OutputWidthPolicy {
    output_bits.map_or(sim::OutputWidthPolicy::Unbounded, sim::OutputWidthPolicy::Fixed)
}

/// A validated `Y = A·B + C` problem.
#[pyclass(name = "GemmProblem", module = "tugemm_py", frozen)]
struct PyGemmProblem {
    inner: problem::GemmProblem,
}

#[pymethods]
impl PyGemmProblem {
    #[new]
    #[pyo3(signature = (a, b, c = None, w = 4))]
    fn new(a: Vec<Vec<i64>>, b: Vec<Vec<i64>>, c: Option<Vec<Vec<i64>>>, w: u32) -> PyResult<Self> {
        let a = problem::Matrix::from_rows(&a).map_err(value_err)?;
        let b = problem::Matrix::from_rows(&b).map_err(value_err)?;
        let c = match c {
            Some(c) => problem::Matrix::from_rows(&c).map_err(value_err)?,
            None => problem::Matrix::zeros(a.rows(), b.cols()),
        };
        let inner = problem::GemmProblem::new(a, b, c, width(w)?).map_err(value_err)?;
        Ok(PyGemmProblem { inner })
    }

    #[staticmethod]
    fn random(m: usize, n: usize, p: usize, w: u32, seed: u64) -> PyResult<Self> {
        let inner = problem::random_problem(m, n, p, width(w)?, seed).map_err(value_err)?;
        Ok(PyGemmProblem { inner })
    }

    /// Parses the text or JSON problem format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = format::parse_problem(text).map_err(value_err)?;
        Ok(PyGemmProblem { inner })
    }

    fn to_text(&self) -> String {
        format::to_text(&self.inner)
    }

    fn to_json(&self) -> String {
        format::to_json(&self.inner)
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn w(&self) -> u32 {
        self.inner.width.bits()
    }

    #[getter]
    fn a(&self) -> Vec<Vec<i64>> {
        self.inner.a.to_rows()
    }

    #[getter]
    fn b(&self) -> Vec<Vec<i64>> {
        self.inner.b.to_rows()
    }

    #[getter]
    fn c(&self) -> Vec<Vec<i64>> {
        self.inner.c.to_rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "GemmProblem(m={}, n={}, p={}, w={})",
            self.inner.m(),
            self.inner.n(),
            self.inner.p(),
            self.inner.width
        )
    }
}

#[pyclass(name = "SimResult", module = "tugemm_py", frozen)]
struct PySimResult {
    inner: sim::SimResult,
}

#[pymethods]
impl PySimResult {
    #[getter]
    fn y(&self) -> Vec<Vec<i64>> {
        self.inner.y.to_rows()
    }

    #[getter]
    fn cycles(&self) -> u64 {
        self.inner.cycles
    }

    #[getter]
    fn output_cell_updates(&self) -> u64 {
        self.inner.activity.output_cell_updates
    }

    #[getter]
    fn unary_signal_transitions(&self) -> u64 {
        self.inner.activity.unary_signal_transitions
    }

    #[getter]
    fn counter_loads(&self) -> u64 {
        self.inner.activity.counter_loads
    }

    fn transition_bound_holds(&self) -> bool {
        self.inner.instrumentation.transition_bound_holds()
    }

    fn __repr__(&self) -> String {
        format!(
            "SimResult(cycles={}, y={:?})",
            self.inner.cycles,
            self.inner.y.to_rows()
        )
    }
}

#[pyclass(name = "LatencyBreakdown", module = "tugemm_py", frozen, get_all)]
struct PyLatencyBreakdown {
    per_step: Vec<u64>,
    serial_total: u64,
    parallel_total: u64,
}

impl From<latency::LatencyBreakdown> for PyLatencyBreakdown {
    fn from(l: latency::LatencyBreakdown) -> Self {
        PyLatencyBreakdown {
            per_step: l.per_step,
            serial_total: l.serial_total,
            parallel_total: l.parallel_total,
        }
    }
}

#[pymethods]
impl PyLatencyBreakdown {
    fn __repr__(&self) -> String {
        format!(
            "LatencyBreakdown(per_step={:?}, serial_total={}, parallel_total={})",
            self.per_step, self.serial_total, self.parallel_total
        )
    }
}

#[pyclass(name = "WorkloadStats", module = "tugemm_py", frozen)]
struct PyWorkloadStats {
    inner: profiler::WorkloadStats,
}

#[pymethods]
impl PyWorkloadStats {
    #[getter]
    fn histogram(&self) -> Vec<u64> {
        self.inner.histogram.clone()
    }

    #[getter]
    fn cdf(&self) -> Vec<f64> {
        self.inner.cdf()
    }

    #[getter]
    fn mean_max(&self) -> f64 {
        self.inner.mean_max()
    }

    #[getter]
    fn n_operations(&self) -> u64 {
        self.inner.n_operations
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.inner.write_csv(&mut buf).map_err(value_err)?;
        String::from_utf8(buf).map_err(value_err)
    }
}

#[pyfunction]
fn gemm_exact(problem: &PyGemmProblem) -> PyResult<Vec<Vec<i64>>> {
    Ok(oracle::gemm_exact(&problem.inner).map_err(value_err)?.to_rows())
}

#[pyfunction]
fn max_abs_output(problem: &PyGemmProblem) -> PyResult<u64> {
    oracle::max_abs_output(&problem.inner).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (problem, output_bits = None))]
fn serial_run(py: Python<'_>, problem: &PyGemmProblem, output_bits: Option<u32>) -> PyResult<PySimResult> {
    let inner = py
        .detach(|| serial::serial_run(&problem.inner, policy(output_bits)))
        .map_err(sim_err)?;
    Ok(PySimResult { inner })
}

#[pyfunction]
#[pyo3(signature = (problem, output_bits = None))]
fn parallel_run(py: Python<'_>, problem: &PyGemmProblem, output_bits: Option<u32>) -> PyResult<PySimResult> {
    let inner = py
        .detach(|| parallel::parallel_run(&problem.inner, policy(output_bits)))
        .map_err(sim_err)?;
    Ok(PySimResult { inner })
}

#[pyfunction]
fn serial_step_trace(problem: &PyGemmProblem) -> PyResult<PyLatencyBreakdown> {
    Ok(serial::serial_step_trace(&problem.inner).map_err(sim_err)?.into())
}

#[pyfunction]
fn parallel_cell_trace(problem: &PyGemmProblem, m: usize, q: usize) -> PyResult<Vec<i64>> {
    parallel::parallel_cell_trace(&problem.inner, m, q).map_err(sim_err)
}

#[pyfunction]
fn analytic_latency(problem: &PyGemmProblem) -> PyResult<PyLatencyBreakdown> {
    Ok(latency::analytic_latency(&problem.inner).map_err(value_err)?.into())
}

#[pyfunction]
#[pyo3(signature = (n, w, variant = "serial"))]
fn worst_case_latency(n: usize, w: u32, variant: &str) -> PyResult<u64> {
    Ok(latency::worst_case_latency(n, width(w)?, self::variant(variant)?))
}

#[pyfunction]
#[pyo3(signature = (max_value, n, variant = "serial"))]
fn avg_latency_from_max(max_value: u64, n: usize, variant: &str) -> PyResult<u64> {
    Ok(latency::avg_latency_from_max(max_value, n, self::variant(variant)?))
}

/// Profiles flat integer sequences, one operation per sequence.
#[pyfunction]
fn profile_maxima(tensors: Vec<Vec<i64>>, w: u32) -> PyResult<PyWorkloadStats> {
    let tensors: Vec<Tensor> = tensors.into_iter().map(|d| Tensor::new(vec![d.len()], d)).collect();
    let inner = profiler::profile_maxima(&tensors, width(w)?).map_err(value_err)?;
    Ok(PyWorkloadStats { inner })
}

#[pyfunction]
#[pyo3(signature = (stats, n, variant = "serial"))]
fn estimate_workload_latency<'py>(
    py: Python<'py>,
    stats: &PyWorkloadStats,
    n: usize,
    variant: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let s = profiler::estimate_workload_latency(&stats.inner, n, self::variant(variant)?);
    let d = PyDict::new(py);
    d.set_item("variant", s.variant.to_string())?;
    d.set_item("n", s.n)?;
    d.set_item("n_operations", s.n_operations)?;
    d.set_item("mean_max", s.mean_max)?;
    d.set_item("worst_case", s.worst_case)?;
    d.set_item("latency_at_mean_max", s.latency_at_mean_max)?;
    d.set_item("worst_case_ratio", s.worst_case_ratio)?;
    d.set_item("mean_latency", s.mean_latency)?;
    d.set_item("mean_latency_ratio", s.mean_latency_ratio)?;
    Ok(d)
}

/// Randomized serial/parallel/oracle equivalence check; returns
/// `(trials, failed)`.
#[pyfunction]
#[pyo3(signature = (trials = 1000, max_dim = 8, seed = 0, large_trials = 0))]
fn verify(py: Python<'_>, trials: usize, max_dim: usize, seed: u64, large_trials: usize) -> (usize, usize) {
    let cfg = verification::VerifyConfig {
        trials,
        max_dim,
        seed,
        large_trials,
        ..verification::VerifyConfig::default()
    };
    let summary = py.detach(|| verification::run_verify(&cfg));
    (summary.trials, summary.failed)
}

#[pymodule]
fn tugemm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGemmProblem>()?;
    m.add_class::<PySimResult>()?;
    m.add_class::<PyLatencyBreakdown>()?;
    m.add_class::<PyWorkloadStats>()?;
    m.add_function(wrap_pyfunction!(gemm_exact, m)?)?;
    m.add_function(wrap_pyfunction!(max_abs_output, m)?)?;
    m.add_function(wrap_pyfunction!(serial_run, m)?)?;
    m.add_function(wrap_pyfunction!(parallel_run, m)?)?;
    m.add_function(wrap_pyfunction!(serial_step_trace, m)?)?;
    m.add_function(wrap_pyfunction!(parallel_cell_trace, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_latency, m)?)?;
    m.add_function(wrap_pyfunction!(worst_case_latency, m)?)?;
    m.add_function(wrap_pyfunction!(avg_latency_from_max, m)?)?;
    m.add_function(wrap_pyfunction!(profile_maxima, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_workload_latency, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
