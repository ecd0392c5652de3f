//! Variant wiring: parameter registration, counts, and checkpoint io.

use crate::corpus::EmbeddingTable;
use crate::models::config::{ModelConfig, Variant};
use crate::models::ModelError;
use crate::scalar::Scalar;
use crate::seqmodel::cells::{AttentionCell, DeltaKind, DeltaOp, Embedding, LstmCell, OutputLayer};
use crate::seqmodel::store::{Init, ParamId, ParamStore};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

/// Checkpoint file format revision.
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy)]
pub(crate) struct S2sParts {
    pub emb: Embedding,
    pub enc: LstmCell,
    pub dec: LstmCell,
    pub attn: AttentionCell,
    pub out: OutputLayer,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Hs2sParts {
    pub emb: Embedding,
    pub word: LstmCell,
    pub sent: LstmCell,
    pub dec: LstmCell,
    pub out: OutputLayer,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CrfHead {
    pub w: ParamId,
    pub b: ParamId,
    pub unary: Option<ParamId>,
    pub n_labels: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct FlowDiscParts {
    pub s2s: S2sParts,
    pub crf: CrfHead,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct FlowDeltaParts {
    pub emb: Embedding,
    pub word: LstmCell,
    pub sent: LstmCell,
    pub delta_enc: LstmCell,
    pub delta: DeltaOp,
    pub dec: LstmCell,
    pub out: OutputLayer,
    pub init_s_h: ParamId,
    pub init_s_c: ParamId,
    pub init_d_h: ParamId,
    pub init_d_c: ParamId,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Parts {
    S2s(S2sParts),
    Hs2s(Hs2sParts),
    FlowDisc(FlowDiscParts),
    FlowDelta(FlowDeltaParts),
}

/// A built model variant: config, parameter store, and wiring.
pub struct Model<F: Scalar> {
    pub config: ModelConfig,
    pub vocab_size: usize,
    /// Label inventory size (0 for variants without the tagging head).
    pub n_labels: usize,
    pub store: ParamStore<F>,
    pub(crate) parts: Parts,
}

/// Scalar parameter count for one gated recurrent cell.
fn lstm_params(input: usize, hidden: usize) -> usize {
    4 * hidden * input + 4 * hidden * hidden + 4 * hidden
}

/// Closed-form total parameter count for a config; the constructor asserts
/// the registered store matches this exactly.
pub fn expected_param_count(config: &ModelConfig, vocab_size: usize, n_labels: usize) -> usize {
    let (e, h, v) = (config.embed, config.hidden, vocab_size);
    let emb = v * e;
    let out = v * h + v;
    let attn = h * h + h * h + h;
    match config.variant {
        Variant::S2s => emb + lstm_params(e, h) + lstm_params(e + h, h) + attn + out,
        Variant::Hs2s => {
            emb + lstm_params(e, h) + lstm_params(h, h) + lstm_params(e, h) + out
        }
        Variant::FlowDisc => {
            let l = n_labels;
            let crf = l * l * h + l * l + if config.crf_unary { l * h } else { 0 };
            emb + lstm_params(e, h) + lstm_params(e + h, h) + attn + out + crf
        }
        Variant::FlowDelta => {
            let mlp = if config.delta_kind == DeltaKind::Mlp { h * 2 * h + h } else { 0 };
            emb + lstm_params(e, h)
                + lstm_params(h, h)
                + lstm_params(h, h)
                + mlp
                + lstm_params(e + 2 * h, h)
                + 4 * h
                + out
        }
    }
}

impl<F: Scalar> Model<F> {
    /// Builds a fresh model. `n_labels` is required (≥ 1) for flow_disc and
    /// ignored otherwise; `pretrained` seeds the embedding table when given.
    pub fn new(
        config: ModelConfig,
        vocab_size: usize,
        n_labels: usize,
        pretrained: Option<&EmbeddingTable<F>>,
    ) -> Result<Model<F>, ModelError> {
        config.validate()?;
        if vocab_size == 0 {
            return Err(ModelError::Config("vocab_size must be positive".into()));
        }
        let n_labels = if config.variant == Variant::FlowDisc {
            if n_labels == 0 {
                return Err(ModelError::Config(
                    "flow_disc needs a label inventory (n_labels >= 1)".into(),
                ));
            }
            n_labels
        } else {
            0
        };
        let mut store = ParamStore::new(config.seed);
        let emb = match pretrained {
            Some(table) => {
                if table.dim() != config.embed || table.len() != vocab_size {
                    return Err(ModelError::Config(format!(
                        "pretrained embeddings are {}x{}, model wants {}x{}",
                        table.len(),
                        table.dim(),
                        vocab_size,
                        config.embed
                    )));
                }
                let rows: Vec<F> =
                    (0..table.len()).flat_map(|id| table.get(id).iter().copied()).collect();
                Embedding::from_rows(&mut store, "emb", vocab_size, config.embed, rows)
            }
            None => Embedding::new(&mut store, "emb", vocab_size, config.embed),
        };
        let (e, h) = (config.embed, config.hidden);
        let parts = match config.variant {
            Variant::S2s => Parts::S2s(build_s2s(&mut store, emb, e, h, vocab_size)),
            Variant::Hs2s => {
                let word = LstmCell::new(&mut store, "word", e, h);
                let sent = LstmCell::new(&mut store, "sent", h, h);
                let dec = LstmCell::new(&mut store, "dec", e, h);
                let out = OutputLayer::new(&mut store, "out", h, vocab_size);
                Parts::Hs2s(Hs2sParts { emb, word, sent, dec, out })
            }
            Variant::FlowDisc => {
                let s2s = build_s2s(&mut store, emb, e, h, vocab_size);
                let u = Init::Uniform(-0.5, 0.5);
                let w = store.add("crf.w", &[n_labels * n_labels, h], u);
                let b = store.add("crf.b", &[n_labels, n_labels], Init::Zeros);
                let unary = config
                    .crf_unary
                    .then(|| store.add("crf.u", &[n_labels, h], Init::Uniform(-0.5, 0.5)));
                Parts::FlowDisc(FlowDiscParts { s2s, crf: CrfHead { w, b, unary, n_labels } })
            }
            Variant::FlowDelta => {
                let word = LstmCell::new(&mut store, "word", e, h);
                let sent = LstmCell::new(&mut store, "sent", h, h);
                let delta_enc = LstmCell::new(&mut store, "delta_enc", h, h);
                let delta = DeltaOp::new(&mut store, "delta", config.delta_kind, h);
                let dec = LstmCell::new(&mut store, "dec", e + 2 * h, h);
                let u = || Init::Uniform(-0.1, 0.1);
                let init_s_h = store.add("init.s_h", &[h], u());
                let init_s_c = store.add("init.s_c", &[h], u());
                let init_d_h = store.add("init.d_h", &[h], u());
                let init_d_c = store.add("init.d_c", &[h], u());
                let out = OutputLayer::new(&mut store, "out", h, vocab_size);
                Parts::FlowDelta(FlowDeltaParts {
                    emb,
                    word,
                    sent,
                    delta_enc,
                    delta,
                    dec,
                    out,
                    init_s_h,
                    init_s_c,
                    init_d_h,
                    init_d_c,
                })
            }
        };
        let expected = expected_param_count(&config, vocab_size, n_labels);
        assert_eq!(
            store.n_params(),
            expected,
            "registered parameters disagree with the closed-form count"
        );
        Ok(Model { config, vocab_size, n_labels, store, parts })
    }

    /// Serializes parameters with the config echo and vocabulary hash.
    pub fn save(&self, path: &Path, vocab_hash: &str) -> Result<(), ModelError> {
        let params = self
            .store
            .names()
            .iter()
            .map(|name| {
                let id = self.store.id(name);
                ParamEntry {
                    name: name.clone(),
                    shape: self.store.shape(id).to_vec(),
                    data: self.store.data(id).iter().map(|v| v.to_f64_lossy()).collect(),
                }
            })
            .collect();
        let checkpoint = Checkpoint {
            format_version: CHECKPOINT_VERSION,
            variant: self.config.variant,
            config: self.config.clone(),
            vocab_hash: vocab_hash.to_string(),
            vocab_size: self.vocab_size,
            n_labels: self.n_labels,
            params,
        };
        fs::write(path, serde_json::to_string(&checkpoint)?)?;
        Ok(())
    }

    /// Rebuilds a model from a checkpoint; returns it with the stored
    /// vocabulary hash so callers can verify against their vocabulary.
    pub fn load(path: &Path) -> Result<(Model<F>, String), ModelError> {
        let checkpoint: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
        if checkpoint.format_version != CHECKPOINT_VERSION {
            return Err(ModelError::Checkpoint(format!(
                "format version {} unsupported (expected {CHECKPOINT_VERSION})",
                checkpoint.format_version
            )));
        }
        let mut model =
            Model::new(checkpoint.config.clone(), checkpoint.vocab_size, checkpoint.n_labels, None)?;
        if checkpoint.params.len() != model.store.names().len() {
            return Err(ModelError::Checkpoint(format!(
                "expected {} parameter tensors, found {}",
                model.store.names().len(),
                checkpoint.params.len()
            )));
        }
        for entry in &checkpoint.params {
            if !model.store.contains(&entry.name) {
                return Err(ModelError::Checkpoint(format!(
                    "unexpected parameter {:?}",
                    entry.name
                )));
            }
            let id = model.store.id(&entry.name);
            if model.store.shape(id) != entry.shape.as_slice() {
                return Err(ModelError::Checkpoint(format!(
                    "parameter {:?} has shape {:?}, expected {:?}",
                    entry.name,
                    entry.shape,
                    model.store.shape(id)
                )));
            }
            let n: usize = entry.shape.iter().product();
            if entry.data.len() != n {
                return Err(ModelError::Checkpoint(format!(
                    "parameter {:?} carries {} values for shape {:?}",
                    entry.name,
                    entry.data.len(),
                    entry.shape
                )));
            }
            for (slot, &value) in model.store.data_mut(id).iter_mut().zip(&entry.data) {
                *slot = F::c(value);
            }
        }
        Ok((model, checkpoint.vocab_hash))
    }
}

fn build_s2s<F: Scalar>(
    store: &mut ParamStore<F>,
    emb: Embedding,
    e: usize,
    h: usize,
    vocab_size: usize,
) -> S2sParts {
    let enc = LstmCell::new(store, "enc", e, h);
    let dec = LstmCell::new(store, "dec", e + h, h);
    let attn = AttentionCell::new(store, "attn", h, h, h);
    let out = OutputLayer::new(store, "out", h, vocab_size);
    S2sParts { emb, enc, dec, attn, out }
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamEntry {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// On-disk model archive: versioned parameters plus config echo.
#[derive(Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub variant: Variant,
    pub config: ModelConfig,
    pub vocab_hash: String,
    pub vocab_size: usize,
    pub n_labels: usize,
    params: Vec<ParamEntry>,
}
