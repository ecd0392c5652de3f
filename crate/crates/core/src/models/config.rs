//! Model/training configuration and its flat key=value file format.

use crate::models::ModelError;
use crate::seqmodel::cells::DeltaKind;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Grid of auxiliary-objective weights to sweep when tuning.
pub const ALPHA_GRID: [f64; 3] = [0.1, 0.5, 1.0];

/// The four model variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    S2s,
    Hs2s,
    FlowDisc,
    FlowDelta,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::S2s, Variant::Hs2s, Variant::FlowDisc, Variant::FlowDelta];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::S2s => "s2s",
            Variant::Hs2s => "hs2s",
            Variant::FlowDisc => "flow_disc",
            Variant::FlowDelta => "flow_delta",
        }
    }

    /// Whether training consumes boundary-relation label sequences.
    pub fn needs_labels(&self) -> bool {
        matches!(self, Variant::FlowDisc)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Variant, String> {
        match s {
            "s2s" => Ok(Variant::S2s),
            "hs2s" => Ok(Variant::Hs2s),
            "flow_disc" => Ok(Variant::FlowDisc),
            "flow_delta" => Ok(Variant::FlowDelta),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

/// Hyperparameters for building and training a model.
///
/// Defaults follow the full-scale recipe; small corpora (memorization,
/// smoke runs) override the size-related fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: Variant,
    pub batch: usize,
    pub max_sentence_len: usize,
    pub embed: usize,
    pub hidden: usize,
    pub layers: usize,
    pub clip: f64,
    pub lr: f64,
    pub lr_decay: f64,
    /// Maximum vocabulary size (reserved tokens excluded) when building.
    pub vocab: usize,
    /// Weight of the auxiliary labeling objective (flow_disc only).
    pub alpha: f64,
    /// How consecutive sentence vectors combine (flow_delta only).
    pub delta_kind: DeltaKind,
    pub seed: u64,
    pub epochs: usize,
    /// Adds per-position label emissions to the chain tagger (ablation).
    pub crf_unary: bool,
    /// Reserved: condition generation on predicted boundary relations.
    /// Not implemented; must stay false.
    pub predicted_relations: bool,
}

impl Default for ModelConfig {
    fn default() -> ModelConfig {
        ModelConfig {
            variant: Variant::S2s,
            batch: 32,
            max_sentence_len: 25,
            embed: 300,
            hidden: 512,
            layers: 1,
            clip: 0.25,
            lr: 0.2,
            lr_decay: 0.5,
            vocab: 50_000,
            alpha: 0.5,
            delta_kind: DeltaKind::Subtract,
            seed: 0,
            epochs: 10,
            crf_unary: false,
            predicted_relations: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive: [(&str, f64); 8] = [
            ("batch", self.batch as f64),
            ("max_sentence_len", self.max_sentence_len as f64),
            ("embed", self.embed as f64),
            ("hidden", self.hidden as f64),
            ("clip", self.clip),
            ("lr", self.lr),
            ("lr_decay", self.lr_decay),
            ("vocab", self.vocab as f64),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(ModelError::Config(format!("{name} must be positive")));
            }
        }
        if self.layers != 1 {
            return Err(ModelError::Config(
                "layers must be 1 (multi-layer stacks are unsupported)".into(),
            ));
        }
        if self.alpha < 0.0 {
            return Err(ModelError::Config("alpha must be nonnegative".into()));
        }
        if self.predicted_relations {
            return Err(ModelError::Config(
                "predicted_relations is reserved and not implemented".into(),
            ));
        }
        Ok(())
    }

    /// Parses the flat `key = value` format (one pair per line; `#` comments).
    pub fn from_kv_text(text: &str) -> Result<ModelConfig, ModelError> {
        let mut config = ModelConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ModelError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| ModelError::Config(format!("line {}: bad {what} value {value:?}", lineno + 1));
            match key {
                "variant" => config.variant = value.parse().map_err(ModelError::Config)?,
                "batch" => config.batch = value.parse().map_err(|_| bad("batch"))?,
                "max_sentence_len" => {
                    config.max_sentence_len = value.parse().map_err(|_| bad("max_sentence_len"))?
                }
                "embed" => config.embed = value.parse().map_err(|_| bad("embed"))?,
                "hidden" => config.hidden = value.parse().map_err(|_| bad("hidden"))?,
                "layers" => config.layers = value.parse().map_err(|_| bad("layers"))?,
                "clip" => config.clip = value.parse().map_err(|_| bad("clip"))?,
                "lr" => config.lr = value.parse().map_err(|_| bad("lr"))?,
                "lr_decay" => config.lr_decay = value.parse().map_err(|_| bad("lr_decay"))?,
                "vocab" => config.vocab = value.parse().map_err(|_| bad("vocab"))?,
                "alpha" => config.alpha = value.parse().map_err(|_| bad("alpha"))?,
                "delta_kind" => config.delta_kind = value.parse().map_err(ModelError::Config)?,
                "seed" => config.seed = value.parse().map_err(|_| bad("seed"))?,
                "epochs" => config.epochs = value.parse().map_err(|_| bad("epochs"))?,
                "crf_unary" => config.crf_unary = value.parse().map_err(|_| bad("crf_unary"))?,
                "predicted_relations" => {
                    config.predicted_relations =
                        value.parse().map_err(|_| bad("predicted_relations"))?
                }
                other => {
                    return Err(ModelError::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Renders the config in the same flat format `from_kv_text` reads.
    pub fn to_kv_text(&self) -> String {
        format!(
            "variant = {}\nbatch = {}\nmax_sentence_len = {}\nembed = {}\nhidden = {}\n\
             layers = {}\nclip = {}\nlr = {}\nlr_decay = {}\nvocab = {}\nalpha = {}\n\
             delta_kind = {}\nseed = {}\nepochs = {}\ncrf_unary = {}\npredicted_relations = {}\n",
            self.variant,
            self.batch,
            self.max_sentence_len,
            self.embed,
            self.hidden,
            self.layers,
            self.clip,
            self.lr,
            self.lr_decay,
            self.vocab,
            self.alpha,
            self.delta_kind,
            self.seed,
            self.epochs,
            self.crf_unary,
            self.predicted_relations,
        )
    }
}
