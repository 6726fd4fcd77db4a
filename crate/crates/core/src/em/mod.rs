//! Equivalent-circuit physics: element ABCD matrices, cascading, and
//! ABCD-to-S conversion over a frequency grid. Everything here is pure and
//! lossless; the map from circuit parameters to S-parameters is `f_phys`.

mod abcd;
mod complex;
mod grid;
mod physics;
mod scalar;
mod topology;

pub use abcd::{Abcd, AbcdMatrix};
pub use complex::{Complex, ComplexScalar};
pub use grid::FrequencyGrid;
pub use physics::{
    abcd_line, abcd_shunt, abcd_to_s, admittance, cascade, eval_point, f_phys, SPoint, SPointOf,
    SResponse, SResponseData, C0, Z0_FREE_SPACE,
};
pub use scalar::Scalar;
pub use topology::{CircuitParams, ResonatorKind, Screen, Spacer, Topology};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmError {
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("invalid circuit parameters: {0}")]
    InvalidCircuit(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("series-LC admittance pole at resonance")]
    AdmittancePole,
    #[error("cascade of zero elements")]
    EmptyCascade,
    #[error("singular network: ABCD-to-S denominator is zero")]
    SingularNetwork,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
