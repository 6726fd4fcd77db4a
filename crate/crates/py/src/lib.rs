//! Python bindings: circuit simulation, the surrogate-oracle dataset
//! pipeline, and trained-model inference.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use fss_core::data::{write_dataset, Dataset, Geometry, SweepSpec};
use fss_core::em::{f_phys, CircuitParams, FrequencyGrid, SResponse, Topology, Z0_FREE_SPACE};
use fss_core::grad::finite_diff_check;
use fss_core::neural::{
    read_checkpoint, train_phase1, train_phase2, write_checkpoint, ModelBased, TrainingConfig,
};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn io_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyIOError::new_err(e.to_string())
}

type ResponseTuple = (Vec<f64>, Vec<(f64, f64)>, Vec<(f64, f64)>);

fn response_tuple(r: &SResponse) -> ResponseTuple {
    let freqs = r.grid.points_hz().collect();
    let s11 = r.points.iter().map(|p| (p.s11.re, p.s11.im)).collect();
    let s21 = r.points.iter().map(|p| (p.s21.re, p.s21.im)).collect();
    (freqs, s11, s21)
}

fn grid(f_start_hz: f64, f_stop_hz: f64, n_points: usize) -> PyResult<FrequencyGrid> {
    FrequencyGrid::new(f_start_hz, f_stop_hz, n_points).map_err(value_err)
}

fn geometry(g: [f64; 3]) -> PyResult<Geometry> {
    Geometry::from_vector(&g).map_err(value_err)
}

/// S-parameters of a cascade of parallel-LC screens separated by an air
/// spacer, from flat [L1, C1, L2, C2, ...] circuit values (SI units).
/// Returns (frequencies_hz, s11, s21) with S-entries as (re, im) tuples.
#[pyfunction]
#[pyo3(signature = (circuit, separation_mm, f_start_hz=6e9, f_stop_hz=16e9, n_points=201))]
fn simulate(
    circuit: Vec<f64>,
    separation_mm: f64,
    f_start_hz: f64,
    f_stop_hz: f64,
    n_points: usize,
) -> PyResult<ResponseTuple> {
    let c = CircuitParams::from_flat(circuit).map_err(value_err)?;
    let topo = Topology::two_screen_air(separation_mm * 1e-3).map_err(value_err)?;
    let grid = grid(f_start_hz, f_stop_hz, n_points)?;
    let r = f_phys(&c, &topo, &grid, Z0_FREE_SPACE).map_err(value_err)?;
    Ok(response_tuple(&r))
}

/// Worst |s11|^2 + |s21|^2 - 1 deviation of a simulated response.
#[pyfunction]
#[pyo3(signature = (circuit, separation_mm, f_start_hz=6e9, f_stop_hz=16e9, n_points=201))]
fn power_residual(
    circuit: Vec<f64>,
    separation_mm: f64,
    f_start_hz: f64,
    f_stop_hz: f64,
    n_points: usize,
) -> PyResult<f64> {
    let c = CircuitParams::from_flat(circuit).map_err(value_err)?;
    let topo = Topology::two_screen_air(separation_mm * 1e-3).map_err(value_err)?;
    let grid = grid(f_start_hz, f_stop_hz, n_points)?;
    let r = f_phys(&c, &topo, &grid, Z0_FREE_SPACE).map_err(value_err)?;
    Ok(r.power_residual())
}

/// Finite-difference verification of the dual-number physics Jacobian;
/// returns the worst relative deviation.
#[pyfunction]
#[pyo3(signature = (circuit, separation_mm, step=1e-6))]
fn gradient_check(circuit: Vec<f64>, separation_mm: f64, step: f64) -> PyResult<f64> {
    let c = CircuitParams::from_flat(circuit).map_err(value_err)?;
    let topo = Topology::two_screen_air(separation_mm * 1e-3).map_err(value_err)?;
    let grid = FrequencyGrid::default_band();
    finite_diff_check(&c, &topo, &grid, Z0_FREE_SPACE, step).map_err(value_err)
}

/// Surrogate "full-wave" response for a geometry (slot mm, separation mm,
/// second slot mm) under the default sweep spec.
#[pyfunction]
fn oracle_simulate(geometry_mm: [f64; 3]) -> PyResult<ResponseTuple> {
    let g = geometry(geometry_mm)?;
    let spec = SweepSpec::default();
    let r = fss_core::data::oracle_simulate(&g, &spec).map_err(value_err)?;
    Ok(response_tuple(&r))
}

/// Generate a sweep dataset (oracle + circuit extraction) and write it as
/// JSON. Returns (sample_count, mean_extraction_residual).
#[pyfunction]
#[pyo3(signature = (path, levels=None, seed=None))]
fn generate_dataset(
    path: &str,
    levels: Option<[usize; 3]>,
    seed: Option<u64>,
) -> PyResult<(usize, f64)> {
    let mut spec = SweepSpec::default();
    if let Some(levels) = levels {
        for (dim, n) in spec.dims.iter_mut().zip(levels) {
            dim.n_levels = n;
        }
    }
    if let Some(seed) = seed {
        spec.oracle_seed = seed;
    }
    spec.validate().map_err(value_err)?;
    let ds = Dataset::generate(&spec).map_err(value_err)?;
    write_dataset(&ds, std::path::Path::new(path)).map_err(io_err)?;
    Ok((ds.samples.len(), ds.mean_extraction_residual()))
}

/// A trained geometry-to-circuit model.
#[pyclass]
struct Model {
    inner: ModelBased,
}

#[pymethods]
impl Model {
    /// Load a checkpoint written by training.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let (inner, _) = read_checkpoint(std::path::Path::new(path)).map_err(io_err)?;
        Ok(Self { inner })
    }

    /// Predicted circuit values [L1, C1, L2, C2] for a geometry in mm.
    fn predict_circuit(&self, geometry_mm: [f64; 3]) -> PyResult<Vec<f64>> {
        let g = geometry(geometry_mm)?;
        let c = self.inner.predict_circuit(&g).map_err(value_err)?;
        Ok(c.as_slice().to_vec())
    }

    /// Predicted S-parameters over the default 6-16 GHz grid.
    fn predict_response(&self, geometry_mm: [f64; 3]) -> PyResult<ResponseTuple> {
        let g = geometry(geometry_mm)?;
        let r = self
            .inner
            .predict_response(&g, Z0_FREE_SPACE)
            .map_err(value_err)?;
        Ok(response_tuple(&r))
    }

    fn count_params(&self) -> usize {
        self.inner.count_params()
    }
}

/// Two-phase training on a dataset file; writes a checkpoint and returns
/// the final (phase1_test_loss, phase2_test_loss).
#[pyfunction]
#[pyo3(signature = (dataset_path, out_path, epochs_phase1=None, epochs_phase2=None, seed=None))]
fn train(
    dataset_path: &str,
    out_path: &str,
    epochs_phase1: Option<usize>,
    epochs_phase2: Option<usize>,
    seed: Option<u64>,
) -> PyResult<(f64, f64)> {
    let ds = fss_core::data::read_dataset(std::path::Path::new(dataset_path)).map_err(io_err)?;
    let mut config = TrainingConfig::default();
    if let Some(e) = epochs_phase1 {
        config.epochs_phase1 = e;
    }
    if let Some(e) = epochs_phase2 {
        config.epochs_phase2 = e;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    let (tr, te) =
        fss_core::data::split_indices(ds.samples.len(), 0.8, config.seed).map_err(value_err)?;
    let train = fss_core::data::select_samples(&ds, &tr);
    let test = fss_core::data::select_samples(&ds, &te);
    let (m1, h1) = train_phase1(&train, &test, &config).map_err(value_err)?;
    let (m2, h2) = train_phase2(&train, &test, &m1, ds.z0_free, &config).map_err(value_err)?;
    write_checkpoint(std::path::Path::new(out_path), &m2, &config).map_err(io_err)?;
    let p1 = h1.last().map(|h| h.test).unwrap_or(f64::NAN);
    let p2 = h2.last().map(|h| h.test).unwrap_or(f64::NAN);
    Ok((p1, p2))
}

#[pymodule]
fn fss_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(power_residual, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_check, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_simulate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_class::<Model>()?;
    m.add("Z0_FREE_SPACE", Z0_FREE_SPACE)?;
    Ok(())
}
