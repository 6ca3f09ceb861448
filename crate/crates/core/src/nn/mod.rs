//! From-scratch sequential CNN in double precision: dense NHWC tensors,
//! same-padding convolution, 2×2 max pooling, a linear dense head trained
//! with hinge-family losses, SGD/Adam, and a fully seeded training loop.

mod checkpoint;
mod loss;
mod model;
mod network;
mod optim;
mod tensor;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use loss::{loss_and_grad, LossKind};
pub use model::{
    count_params, infer_shapes, table3_reference_spec, Activation, LayerSpec, ModelSpec,
    ParamCounts, Shape,
};
pub use network::{ForwardCache, Network};
pub use optim::{optimizer_step, OptimizerKind, OptimizerState};
pub use tensor::Tensor;
pub use train::{train, EpochMetrics, Example, TrainOutcome, TrainingConfig};

use thiserror::Error;

/// Errors from model validation, the compute engine and training.
#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("label {0} outside {{-1, +1}}")]
    InvalidLabel(f64),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("training set contains a single class")]
    SingleClass,
    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },
    #[error("checkpoint format error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
