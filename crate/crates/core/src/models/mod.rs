//! The four paragraph-model variants, their losses, training, and greedy
//! generation.

pub mod config;
pub mod generate;
pub mod losses;
pub mod model;
pub mod train;

pub use config::{ModelConfig, Variant, ALPHA_GRID};
pub use generate::{generate_middles, BridgeContext};
pub use losses::{LossNodes, TrainItem};
pub use model::{expected_param_count, Checkpoint, Model};
pub use train::{train, EpochLog, TrainOutcome, TrainSet};

use crate::corpus::CorpusError;
use crate::crf::CrfError;
use crate::seqmodel::gradcheck::GradCheckError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("bad config: {0}")]
    Config(String),
    #[error("label sequence misaligned: {0}")]
    Label(String),
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },
    #[error("checkpoint was built for vocabulary {expected}, got {got}")]
    VocabMismatch { expected: String, got: String },
    #[error("checkpoint variant {found} does not match requested {requested}")]
    VariantMismatch { found: String, requested: String },
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Crf(#[from] CrfError),
    #[error(transparent)]
    GradCheck(#[from] GradCheckError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}
