//! Dataset construction: the geometry sweep, the surrogate full-wave
//! oracle, circuit-parameter extraction for phase-1 labels, splits, and the
//! persistence formats (Touchstone .s2p and versioned dataset JSON).

mod dataset;
mod extract;
mod oracle;
mod sweep;
mod touchstone;

pub use dataset::{
    read_dataset, select_samples, split_indices, write_dataset, Dataset, Sample,
    DATASET_FORMAT_VERSION,
};
pub use extract::{extract_circuit_params, initial_guess, ExtractionResult};
pub use oracle::{oracle_circuit, oracle_simulate};
pub use sweep::{generate_sweep, topology_for_geometry, Geometry, SweepDim, SweepSpec};
pub use touchstone::{read_touchstone, write_touchstone};

use thiserror::Error;

use crate::em::EmError;
use crate::grad::GradError;

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Em(#[from] EmError),
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
