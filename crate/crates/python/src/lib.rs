//! Python bindings: configuration, runs, snapshots and the observables
//! that reduce them to numbers.
//!
//! Fields cross the boundary as flat lists in ring-major order
//! (`index = i * ntheta + j`), matching the snapshot layout.

use std::path::PathBuf;

use abflux::config::OutputFormat;
use abflux::render::{rasterize, Colormap};
use abflux::snapshot::SnapshotRecord;
use abflux::{Band, Error, Grid, SimConfig};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(abflux, ConfigError, PyValueError, "Invalid configuration.");
create_exception!(abflux, SimulationError, PyRuntimeError, "A run or observable failed.");

fn to_py(err: Error) -> PyErr {
    if err.is_config_error() {
        ConfigError::new_err(err.to_string())
    } else {
        SimulationError::new_err(err.to_string())
    }
}

fn grid(nr: usize, ntheta: usize, r_max: f64) -> PyResult<Grid> {
    Grid::new(nr, ntheta, r_max).map_err(to_py)
}

/// A validated simulation configuration.
#[pyclass(name = "Config", module = "abflux")]
pub struct PyConfig {
    inner: SimConfig,
}

#[pymethods]
impl PyConfig {
    /// The built-in desk-scale configuration (adiabatic, alpha = 1/2).
    #[staticmethod]
    fn default() -> Self {
        PyConfig {
            inner: SimConfig::default(),
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        abflux::parse_config(text).map(|inner| PyConfig { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn from_path(path: PathBuf) -> PyResult<Self> {
        SimConfig::from_path(path).map(|inner| PyConfig { inner }).map_err(to_py)
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    #[getter]
    fn model(&self) -> &'static str {
        self.inner.tag().name()
    }

    #[getter]
    fn hash(&self) -> String {
        self.inner.hash_hex()
    }

    /// Overrides the grid; the result is validated before any run.
    fn with_grid(&self, nr: usize, ntheta: usize, r_max: f64) -> Self {
        let mut inner = self.inner.clone();
        inner.grid.nr = nr;
        inner.grid.ntheta = ntheta;
        inner.grid.r_max = r_max;
        PyConfig { inner }
    }

    fn with_t_final(&self, t_final: f64) -> Self {
        let mut inner = self.inner.clone();
        inner.run.t_final = Some(t_final);
        PyConfig { inner }
    }

    fn with_snapshot_stride(&self, stride: u64) -> Self {
        let mut inner = self.inner.clone();
        inner.run.snapshot_stride = stride;
        PyConfig { inner }
    }

    /// Dimensionless parameters the solver would use.
    fn dimensionless<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let dp = self.inner.dimensionless().map_err(to_py)?;
        let band = self.inner.band();
        let d = PyDict::new(py);
        d.set_item("kappa", dp.kappa)?;
        d.set_item("alpha", dp.alpha)?;
        d.set_item("k0", dp.k0)?;
        d.set_item("sigma", dp.sigma)?;
        d.set_item("x0", dp.x0)?;
        d.set_item("r_max", dp.r_max)?;
        d.set_item("t_final", dp.t_final)?;
        d.set_item("band", (band.inner, band.outer))?;
        Ok(d)
    }

    /// Problems that would stop a run, as `key.path: message` strings.
    fn violations(&self) -> Vec<String> {
        self.inner.violations()
    }

    /// Runs to completion in memory and returns every snapshot. Releases
    /// the interpreter lock while stepping.
    fn run(&self, py: Python<'_>) -> PyResult<Vec<PySnapshot>> {
        let mut config = self.inner.clone();
        config.output.formats = vec![OutputFormat::Abfx];
        let records = py.detach(|| abflux::run(&config)).map_err(to_py)?;
        Ok(records.into_iter().map(|inner| PySnapshot { inner }).collect())
    }

    fn __repr__(&self) -> String {
        let g = &self.inner.grid;
        format!("Config(model={:?}, grid={}x{}, r_max={})", self.model(), g.nr, g.ntheta, g.r_max)
    }
}

/// One stored time slice of a run.
#[pyclass(name = "Snapshot", module = "abflux")]
pub struct PySnapshot {
    inner: SnapshotRecord,
}

#[pymethods]
impl PySnapshot {
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        abflux::read_snapshot(path).map(|inner| PySnapshot { inner }).map_err(to_py)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        abflux::write_snapshot(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn model(&self) -> &'static str {
        self.inner.tag.name()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time
    }

    #[getter]
    fn step(&self) -> u64 {
        self.inner.step
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.nr, self.inner.ntheta)
    }

    #[getter]
    fn r_max(&self) -> f64 {
        self.inner.r_max
    }

    #[getter]
    fn config_hash(&self) -> String {
        self.inner.config_hash_hex()
    }

    #[getter]
    fn band(&self) -> (f64, f64) {
        (self.inner.band.inner, self.inner.band.outer)
    }

    /// Stored value; NaN when the band held no density.
    #[getter]
    fn forward_visibility(&self) -> f64 {
        self.inner.forward_visibility
    }

    #[getter]
    fn forward_centroid(&self) -> f64 {
        self.inner.forward_centroid
    }

    #[getter]
    fn guard(&self) -> bool {
        self.inner.guard
    }

    #[getter]
    fn norms(&self) -> Vec<f64> {
        self.inner.norms.clone()
    }

    /// One of `density`, `spin`, `nplus`, `nminus`.
    fn field(&self, name: &str) -> PyResult<Vec<f64>> {
        Ok(self.field_ref(name)?.clone())
    }

    /// Visibility recomputed from the stored density.
    fn recompute_visibility(&self) -> PyResult<f64> {
        let g = self.inner.grid().map_err(to_py)?;
        self.inner.recompute_visibility(&g).map_err(to_py)
    }

    /// `(spin, n_plus, n_minus)` integrated over the band on the forward side.
    fn spin_balance(&self) -> PyResult<(f64, f64, f64)> {
        let g = self.inner.grid().map_err(to_py)?;
        let b = self.inner.spin_balance(&g).map_err(to_py)?;
        Ok((b.spin, b.plus, b.minus))
    }

    /// Writes a PPM heatmap of `field` over `[-view, view]²`.
    #[pyo3(signature = (path, field = "density", size = 512, view = None))]
    fn render(&self, path: PathBuf, field: &str, size: usize, view: Option<f64>) -> PyResult<()> {
        let values = self.field_ref(field)?;
        let g = self.inner.grid().map_err(to_py)?;
        let cm = if field == "spin" { Colormap::Diverging } else { Colormap::Sequential };
        let img = rasterize(values, &g, cm, size, view.unwrap_or(g.r_max)).map_err(to_py)?;
        std::fs::write(&path, img.to_ppm()).map_err(|e| to_py(Error::Io { path, source: e }))
    }

    fn __repr__(&self) -> String {
        format!(
            "Snapshot(model={:?}, s={:.4}, step={}, V={:.4})",
            self.model(),
            self.inner.time,
            self.inner.step,
            self.inner.forward_visibility
        )
    }
}

impl PySnapshot {
    fn field_ref(&self, name: &str) -> PyResult<&Vec<f64>> {
        match name {
            "density" => Ok(&self.inner.density),
            "spin" => Ok(&self.inner.spin_density),
            "nplus" => Ok(&self.inner.plus),
            "nminus" => Ok(&self.inner.minus),
            other => Err(PyValueError::new_err(format!(
                "unknown field {other:?}; expected density, spin, nplus or nminus"
            ))),
        }
    }
}

/// Dimensionless coupling for a wire current (A) and radius (m), other
/// parameters at their defaults.
#[pyfunction]
#[pyo3(signature = (wire_current = 0.01, wire_radius = 1e-5))]
fn kappa(wire_current: f64, wire_radius: f64) -> PyResult<f64> {
    let p = abflux::PhysicalParams {
        wire_current,
        wire_radius,
        ..Default::default()
    };
    abflux::units::kappa(&p).map_err(to_py)
}

/// `1 - P(0) / max P` over `±window_deg` of the angular profile in the band.
#[pyfunction]
#[pyo3(signature = (density, nr, ntheta, r_max, band = (2.0, 4.0), window_deg = 30.0))]
fn forward_visibility(
    density: Vec<f64>,
    nr: usize,
    ntheta: usize,
    r_max: f64,
    band: (f64, f64),
    window_deg: f64,
) -> PyResult<f64> {
    let g = grid(nr, ntheta, r_max)?;
    let profile = abflux::angular_profile(&density, &g, Band::new(band.0, band.1)).map_err(to_py)?;
    abflux::forward_visibility(&profile, &g, window_deg.to_radians()).map_err(to_py)
}

/// Total-variation distance between two densities on the same grid.
#[pyfunction]
fn adiabaticity_distance(a: Vec<f64>, b: Vec<f64>, nr: usize, ntheta: usize, r_max: f64) -> PyResult<f64> {
    let g = grid(nr, ntheta, r_max)?;
    abflux::adiabaticity_distance(&a, &b, &g).map_err(to_py)
}

type DenseSbp = (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Norm weights and dense first and second derivative matrices.
#[pyfunction]
fn sbp_operators(n: usize, h: f64) -> PyResult<DenseSbp> {
    let ops = abflux::build_sbp(n, h).map_err(to_py)?;
    Ok((ops.norm_weights.clone(), ops.d1.to_dense(), ops.d2.to_dense()))
}

#[pymodule(name = "abflux")]
fn abflux_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("ConfigError", m.py().get_type::<ConfigError>())?;
    m.add("SimulationError", m.py().get_type::<SimulationError>())?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PySnapshot>()?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(forward_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(adiabaticity_distance, m)?)?;
    m.add_function(wrap_pyfunction!(sbp_operators, m)?)?;
    Ok(())
}
