//! Relational graph neural classifier over transformation graphs, trained
//! from scratch with hand-written gradients.

pub mod checkpoint;
pub mod gradcheck;
pub mod model;
pub mod skipgram;
pub mod tensor;
pub mod train;
pub mod vocab;

use thiserror::Error;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use gradcheck::grad_check;
pub use model::{
    attention_by_triple, loss_bce, readout, rgat_forward, rgcn_forward, AttentionWeights, Direction,
    GraphInput, HyperParams, JitVdModel, LayerKind, LayerParams, MessageGraph, MlpParams, Params,
    Prediction, Readout, Verdict,
};
pub use skipgram::{skipgram_pretrain, SkipGramConfig};
pub use tensor::Mat;
pub use train::{train, EpochStats, History, TrainConfig};
pub use vocab::{build_vocab, content_token, token_stream, Vocab, UNK, UNK_INDEX};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("training set is empty")]
    EmptyDataset,
    #[error("non-finite loss at epoch {epoch}, example {example}: loss={loss}, probability={probability}")]
    NonFiniteLoss {
        epoch: usize,
        example: usize,
        loss: f64,
        probability: f64,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
