//! Python bindings for `bfoseg`.
//!
//! Images cross the boundary as `GrayImage` objects (row-major `bytes`), edge maps as
//! `EdgeMap` objects and histograms as plain lists of 256 counts.

// pyo3 0.22 macros trip this lint on PyResult returns
#![allow(clippy::useless_conversion)]

use bfoseg::bfo::{BfoConfig as CoreConfig, StepSize, SwarmCoefficients};
use bfoseg::eval::{self, LogBase};
use bfoseg::imagecore::{self, Histogram};
use bfoseg::otsu::{self, ThresholdSet};
use bfoseg::pipeline::{self, PostProcess};
use bfoseg::segment::{self, Connectivity};
use bfoseg::synth::{self, SynthKind};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "GrayImage", module = "pybfoseg")]
#[derive(Clone)]
struct PyGrayImage(imagecore::GrayImage);

#[pymethods]
impl PyGrayImage {
    #[new]
    fn new(width: usize, height: usize, pixels: Vec<u8>) -> PyResult<Self> {
        imagecore::GrayImage::new(width, height, pixels).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        imagecore::load_image(path).map(Self).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    /// Writes PNG for a `.png` path and binary PGM otherwise.
    fn save(&self, path: &str) -> PyResult<()> {
        imagecore::save_image(&self.0, path).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    #[getter]
    fn pixels<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new_bound(py, self.0.pixels())
    }

    fn get(&self, x: usize, y: usize) -> PyResult<u8> {
        if x >= self.0.width() || y >= self.0.height() {
            return Err(value_err(format!("({x}, {y}) is outside the image")));
        }
        Ok(self.0.get(x, y))
    }

    fn histogram(&self) -> Vec<u64> {
        imagecore::compute_histogram(&self.0).counts().to_vec()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("GrayImage({}x{})", self.0.width(), self.0.height())
    }
}

#[pyclass(name = "EdgeMap", module = "pybfoseg")]
#[derive(Clone)]
struct PyEdgeMap(imagecore::EdgeMap);

#[pymethods]
impl PyEdgeMap {
    #[new]
    fn new(width: usize, height: usize, mask: Vec<bool>) -> PyResult<Self> {
        imagecore::EdgeMap::new(width, height, mask).map(Self).map_err(value_err)
    }

    /// Non-zero pixels are edges.
    #[staticmethod]
    fn from_image(img: &PyGrayImage) -> Self {
        Self(imagecore::EdgeMap::from_image(&img.0))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        PyGrayImage::load(path).map(|img| Self::from_image(&img))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.to_image().save(path)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    #[getter]
    fn mask(&self) -> Vec<bool> {
        self.0.mask().to_vec()
    }

    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    /// Edges as 255, background as 0.
    fn to_image(&self) -> PyGrayImage {
        PyGrayImage(self.0.to_image())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("EdgeMap({}x{}, {} edges)", self.0.width(), self.0.height(), self.0.edge_count())
    }
}

#[pyclass(name = "BfoConfig", module = "pybfoseg")]
#[derive(Clone)]
struct PyBfoConfig(CoreConfig);

#[pymethods]
impl PyBfoConfig {
    #[new]
    #[pyo3(signature = (
        *, population=20, chemotactic_steps=50, swim_length=4, reproduction_steps=4,
        dispersal_events=2, dispersal_probability=0.25, step_size=2.0, step_sizes=None,
        attract_depth=0.1, attract_width=0.2, repel_height=0.1, repel_width=10.0, seed=0
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        population: usize,
        chemotactic_steps: usize,
        swim_length: usize,
        reproduction_steps: usize,
        dispersal_events: usize,
        dispersal_probability: f64,
        step_size: f64,
        step_sizes: Option<Vec<f64>>,
        attract_depth: f64,
        attract_width: f64,
        repel_height: f64,
        repel_width: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let cfg = CoreConfig {
            population,
            chemotactic_steps,
            swim_length,
            reproduction_steps,
            dispersal_events,
            dispersal_probability,
            step_size: step_sizes.map_or(StepSize::Uniform(step_size), StepSize::PerBacterium),
            swarm: SwarmCoefficients { attract_depth, attract_width, repel_height, repel_width },
            seed,
        };
        cfg.validate().map_err(value_err)?;
        Ok(Self(cfg))
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("config serializes")
    }

    fn __repr__(&self) -> String {
        format!("BfoConfig({})", self.to_json())
    }
}

fn histogram(counts: Vec<u64>) -> PyResult<Histogram> {
    Histogram::from_slice(&counts)
        .ok_or_else(|| value_err("histogram needs 256 counts with a positive total"))
}

fn thresholds(ts: Vec<u8>) -> PyResult<ThresholdSet> {
    ThresholdSet::new(ts).map_err(value_err)
}

fn config(cfg: Option<PyBfoConfig>) -> CoreConfig {
    cfg.map_or_else(CoreConfig::default, |c| c.0)
}

fn connectivity(c: u8) -> PyResult<Connectivity> {
    Connectivity::try_from(c).map_err(value_err)
}

fn log_base(base: &str) -> PyResult<LogBase> {
    match base {
        "nats" => Ok(LogBase::Nats),
        "bits" => Ok(LogBase::Bits),
        other => Err(value_err(format!("log base must be 'nats' or 'bits', got '{other}'"))),
    }
}

#[pyfunction]
fn compute_histogram(img: &PyGrayImage) -> Vec<u64> {
    img.histogram()
}

#[pyfunction]
fn between_class_variance(counts: Vec<u64>, ts: Vec<u8>) -> PyResult<f64> {
    Ok(otsu::between_class_variance(&histogram(counts)?, &thresholds(ts)?))
}

/// Exact optimum for up to four thresholds: `(thresholds, objective)`.
#[pyfunction]
fn exhaustive_search(counts: Vec<u64>, m: usize) -> PyResult<(Vec<u8>, f64)> {
    let (ts, j) = otsu::exhaustive_search(&histogram(counts)?, m).map_err(value_err)?;
    Ok((ts.as_slice().to_vec(), j))
}

/// Returns a dict with `thresholds`, `objective`, `trace` and `evaluations`.
#[pyfunction]
#[pyo3(signature = (counts, m, config=None))]
fn optimize_thresholds(
    py: Python<'_>,
    counts: Vec<u64>,
    m: usize,
    config: Option<PyBfoConfig>,
) -> PyResult<PyObject> {
    let hist = histogram(counts)?;
    let cfg = self::config(config);
    let search = py.allow_threads(|| pipeline::optimize_thresholds(&hist, m, &cfg)).map_err(value_err)?;
    let d = PyDict::new_bound(py);
    d.set_item("thresholds", search.thresholds.as_slice().to_vec())?;
    d.set_item("objective", search.objective)?;
    d.set_item("trace", search.run.trace)?;
    d.set_item("evaluations", search.run.evaluations)?;
    Ok(d.into())
}

/// Returns `(labels, thresholded)` with labels as a flat row-major list.
#[pyfunction]
fn apply_thresholds(img: &PyGrayImage, ts: Vec<u8>) -> PyResult<(Vec<u32>, PyGrayImage)> {
    let (labels, out) = segment::apply_thresholds(&img.0, &thresholds(ts)?);
    Ok((labels.labels().to_vec(), PyGrayImage(out)))
}

#[pyfunction]
fn detect_edges(img: &PyGrayImage) -> PyEdgeMap {
    PyEdgeMap(segment::detect_edges(&img.0))
}

#[pyfunction]
#[pyo3(signature = (edges, min_size=10, connectivity=8))]
fn area_open(edges: &PyEdgeMap, min_size: usize, connectivity: u8) -> PyResult<PyEdgeMap> {
    if min_size == 0 {
        return Err(value_err("min_size must be at least 1"));
    }
    Ok(PyEdgeMap(segment::area_open(&edges.0, min_size, self::connectivity(connectivity)?)))
}

#[pyfunction]
#[pyo3(signature = (candidate, reference, alpha=eval::DEFAULT_ALPHA))]
fn figure_of_merit(candidate: &PyEdgeMap, reference: &PyEdgeMap, alpha: f64) -> PyResult<f64> {
    eval::figure_of_merit(&candidate.0, &reference.0, alpha).map_err(value_err)
}

#[pyfunction]
fn rand_index(a: &PyEdgeMap, b: &PyEdgeMap) -> PyResult<f64> {
    eval::rand_index(&a.0, &b.0).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (a, b, base="nats"))]
fn variation_of_information(a: &PyEdgeMap, b: &PyEdgeMap, base: &str) -> PyResult<f64> {
    eval::variation_of_information_in(&a.0, &b.0, log_base(base)?).map_err(value_err)
}

/// All metrics at once, as a dict shaped like `metrics.json`.
#[pyfunction]
#[pyo3(signature = (candidate, reference, alpha=eval::DEFAULT_ALPHA, base="nats"))]
fn evaluate(
    py: Python<'_>,
    candidate: &PyEdgeMap,
    reference: &PyEdgeMap,
    alpha: f64,
    base: &str,
) -> PyResult<PyObject> {
    let report = eval::evaluate_edges(&candidate.0, &reference.0, alpha, log_base(base)?).map_err(value_err)?;
    let d = PyDict::new_bound(py);
    d.set_item("fom", report.fom)?;
    d.set_item("rand_index", report.rand_index)?;
    d.set_item("vi", report.vi)?;
    d.set_item("candidate_edges", report.counts.candidate_edges)?;
    d.set_item("reference_edges", report.counts.reference_edges)?;
    Ok(d.into())
}

#[pyfunction]
fn sobel_baseline(img: &PyGrayImage, threshold: f64) -> PyEdgeMap {
    PyEdgeMap(eval::sobel_baseline(&img.0, threshold))
}

/// Synthetic test image; returns a dict with `image`, `labels`, `reference_edges` and `region_means`.
#[pyfunction]
#[pyo3(name = "synth", signature = (kind="phantom", width=128, height=128, noise=8.0, seed=0))]
fn synth_image(py: Python<'_>, kind: &str, width: usize, height: usize, noise: f64, seed: u64) -> PyResult<PyObject> {
    let kind: SynthKind = kind.parse().map_err(value_err)?;
    let s = synth::generate(kind, width, height, noise, seed).map_err(value_err)?;
    let d = PyDict::new_bound(py);
    d.set_item("image", PyGrayImage(s.image).into_py(py))?;
    d.set_item("labels", s.labels.labels().to_vec())?;
    d.set_item("reference_edges", PyEdgeMap(s.reference_edges).into_py(py))?;
    d.set_item("region_means", s.region_means)?;
    Ok(d.into())
}

/// Full pipeline; returns a dict with `thresholds`, `objective`, `thresholded`,
/// `raw_edges`, `edges` and `trace`.
#[pyfunction]
#[pyo3(name = "segment", signature = (img, m=3, config=None, min_component=10, connectivity=8))]
fn segment_image(
    py: Python<'_>,
    img: &PyGrayImage,
    m: usize,
    config: Option<PyBfoConfig>,
    min_component: usize,
    connectivity: u8,
) -> PyResult<PyObject> {
    if min_component == 0 {
        return Err(value_err("min_component must be at least 1"));
    }
    let post = PostProcess { min_component, connectivity: self::connectivity(connectivity)? };
    let cfg = self::config(config);
    let image = img.0.clone();
    let seg = py.allow_threads(|| pipeline::segment_image(&image, m, &cfg, post)).map_err(value_err)?;
    let d = PyDict::new_bound(py);
    d.set_item("thresholds", seg.search.thresholds.as_slice().to_vec())?;
    d.set_item("objective", seg.search.objective)?;
    d.set_item("trace", seg.search.run.trace)?;
    d.set_item("thresholded", PyGrayImage(seg.thresholded).into_py(py))?;
    d.set_item("raw_edges", PyEdgeMap(seg.raw_edges).into_py(py))?;
    d.set_item("edges", PyEdgeMap(seg.edges).into_py(py))?;
    Ok(d.into())
}

#[pymodule]
fn pybfoseg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGrayImage>()?;
    m.add_class::<PyEdgeMap>()?;
    m.add_class::<PyBfoConfig>()?;
    m.add_function(wrap_pyfunction!(compute_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(between_class_variance, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_search, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(apply_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(detect_edges, m)?)?;
    m.add_function(wrap_pyfunction!(area_open, m)?)?;
    m.add_function(wrap_pyfunction!(figure_of_merit, m)?)?;
    m.add_function(wrap_pyfunction!(rand_index, m)?)?;
    m.add_function(wrap_pyfunction!(variation_of_information, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(sobel_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(synth_image, m)?)?;
    m.add_function(wrap_pyfunction!(segment_image, m)?)?;
    Ok(())
}
