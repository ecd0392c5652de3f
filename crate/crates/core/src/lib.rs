//! Paragraph-flow language modeling toolkit.
//!
//! Implements a pipeline for studying how consecutive sentences in a
//! paragraph relate: corpus filtering and splitting, discourse-tree
//! ingestion and flattening, four recurrent language-model variants
//! (attentional seq2seq, hierarchical seq2seq, a CRF multi-task model over
//! discourse relations, and a latent sentence-delta model), a bridging
//! task that infills the middle sentences of a paragraph, and generation
//! metrics.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! pipeline binaries use `f64`.

pub mod bridging;
pub mod corpus;
pub mod crf;
pub mod discourse;
pub mod metrics;
pub mod models;
pub mod reference;
pub mod scalar;
pub mod seqmodel;

pub use scalar::Scalar;

/// Double-precision model, the concrete type the pipeline binaries train.
pub type Model64 = models::Model<f64>;
/// Double-precision embedding table paired with [`Model64`].
pub type EmbeddingTable64 = corpus::EmbeddingTable<f64>;
