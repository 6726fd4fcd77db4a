//! Networks and training: the small geometry-to-circuit MLP with its two
//! training phases (circuit labels, then end-to-end through the physics),
//! plus the direct DNN and RBFN baselines, losses, and checkpoints.

mod adam;
mod checkpoint;
mod losses;
mod mlp;
mod rbfn;
mod train;

pub use adam::{AdamHyper, AdamState};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_FORMAT_VERSION};
pub use losses::{
    batch_mean, loss_eq1, loss_eq2, loss_eq3, loss_eq5, Eq2Variant, Normalization, LOG_SHIFT,
};
pub use mlp::{Activation, ForwardCache, Mlp, OutputKind};
pub use rbfn::{k_means, Rbfn};
pub use train::{
    flatten_response, train_direct, train_phase1, train_phase2, unflatten_response, DirectKind,
    DirectModel, EpochLoss, ModelBased, PhaseLoss, TrainingConfig,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("invalid usage: {0}")]
    Usage(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Em(#[from] crate::em::EmError),
    #[error(transparent)]
    Grad(#[from] crate::grad::GradError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
