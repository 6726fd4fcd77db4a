//! Model-based learning toolkit for frequency selective surfaces.
//!
//! The pipeline predicts equivalent-circuit parameters from FSS geometry with
//! a small network, then computes S-parameters analytically through a
//! differentiable circuit model. Modules:
//!
//! - [`em`]: exact circuit physics (ABCD matrices, cascades, S-parameters)
//! - [`grad`]: forward-mode derivatives of the physics and of the losses
//! - [`data`]: geometry sweeps, the surrogate full-wave oracle, parameter
//!   extraction, splits, and file formats (Touchstone, dataset JSON)
//! - [`neural`]: the geometry-to-circuit MLP, direct baselines (DNN, RBFN),
//!   losses, Adam, and the two-phase training procedures
//! - [`evalkit`]: metrics and the model-comparison harness

pub mod data;
pub mod em;
pub mod evalkit;
pub mod grad;
pub mod neural;
