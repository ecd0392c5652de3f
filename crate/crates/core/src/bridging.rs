//! Bridging task: hide a paragraph's middle sentences, condition a model on
//! the first and last, and collect the generated replacements.
//!
//! Examples serialize as JSON lines `{id, domain, first, last, middle_ref}`;
//! generations as `{id, hypothesis}` where the hypothesis holds one token
//! list per regenerated sentence.

use crate::corpus::{Domain, Paragraph, Vocab};
use crate::models::{generate_middles, BridgeContext, Model, ModelError, Variant};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

/// Errors from example construction and bridging file I/O.
#[derive(Debug, Error)]
pub enum BridgingError {
    #[error("invalid bridging example: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One infilling instance: regenerate the sentences between `first` and `last`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ExampleRecord", into = "ExampleRecord")]
pub struct BridgingExample {
    pub id: String,
    pub domain: Domain,
    pub first: Vec<String>,
    pub last: Vec<String>,
    pub middle_ref: Vec<Vec<String>>,
    /// Number of hidden sentences; always `middle_ref.len()`.
    pub n_middle: usize,
}

/// Wire form of an example; `n_middle` is derived, not stored.
#[derive(Serialize, Deserialize)]
struct ExampleRecord {
    id: String,
    domain: Domain,
    first: Vec<String>,
    last: Vec<String>,
    middle_ref: Vec<Vec<String>>,
}

impl TryFrom<ExampleRecord> for BridgingExample {
    type Error = BridgingError;

    fn try_from(r: ExampleRecord) -> Result<Self, BridgingError> {
        BridgingExample::new(r.id, r.domain, r.first, r.last, r.middle_ref)
    }
}

impl From<BridgingExample> for ExampleRecord {
    fn from(e: BridgingExample) -> ExampleRecord {
        ExampleRecord {
            id: e.id,
            domain: e.domain,
            first: e.first,
            last: e.last,
            middle_ref: e.middle_ref,
        }
    }
}

impl BridgingExample {
    /// Builds an example, enforcing nonempty context sentences and at least
    /// two hidden middle sentences.
    pub fn new(
        id: String,
        domain: Domain,
        first: Vec<String>,
        last: Vec<String>,
        middle_ref: Vec<Vec<String>>,
    ) -> Result<Self, BridgingError> {
        if first.is_empty() || last.is_empty() {
            return Err(BridgingError::Invalid(format!(
                "example {id}: first/last sentences must be nonempty"
            )));
        }
        if middle_ref.len() < 2 {
            return Err(BridgingError::Invalid(format!(
                "example {id}: needs at least 2 middle sentences, got {}",
                middle_ref.len()
            )));
        }
        if middle_ref.iter().any(|s| s.is_empty()) {
            return Err(BridgingError::Invalid(format!(
                "example {id}: middle sentences must be nonempty"
            )));
        }
        let n_middle = middle_ref.len();
        Ok(BridgingExample {
            id,
            domain,
            first,
            last,
            middle_ref,
            n_middle,
        })
    }

    /// Original paragraph length in sentences (middles plus the two shown).
    pub fn paragraph_len(&self) -> usize {
        self.n_middle + 2
    }
}

/// Turns each paragraph into one example: first and last sentences shown,
/// interior hidden. Panics if a paragraph violates corpus length invariants.
pub fn make_examples(paragraphs: &[Paragraph]) -> Vec<BridgingExample> {
    paragraphs
        .iter()
        .map(|p| {
            let m = p.sentences.len();
            BridgingExample::new(
                p.id.clone(),
                p.domain,
                p.sentences[0].clone(),
                p.sentences[m - 1].clone(),
                p.sentences[1..m - 1].to_vec(),
            )
            .expect("filtered paragraphs have 4..=7 nonempty sentences")
        })
        .collect()
}

/// One model output: generated middle sentences for an example id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedBridge {
    pub id: String,
    pub hypothesis: Vec<Vec<String>>,
}

/// Loads a checkpoint and generates middles for every example in order.
///
/// The vocabulary must hash to the checkpoint's recorded hash, and when
/// `requested` is given the checkpoint variant must match it.
pub fn run_bridging<F: Scalar>(
    checkpoint: &Path,
    vocab: &Vocab,
    requested: Option<Variant>,
    examples: &[BridgingExample],
    max_len: usize,
) -> Result<Vec<GeneratedBridge>, ModelError> {
    let (mut model, vocab_hash) = Model::<F>::load(checkpoint)?;
    if let Some(want) = requested {
        if want != model.config.variant {
            return Err(ModelError::VariantMismatch {
                found: model.config.variant.to_string(),
                requested: want.to_string(),
            });
        }
    }
    let got = vocab.hash_hex();
    if got != vocab_hash {
        return Err(ModelError::VocabMismatch {
            expected: vocab_hash,
            got,
        });
    }
    examples
        .iter()
        .map(|ex| {
            let context = BridgeContext {
                first: vocab.encode(&ex.first),
                last: vocab.encode(&ex.last),
            };
            let middles = generate_middles(&mut model, &context, ex.n_middle, max_len)?;
            Ok(GeneratedBridge {
                id: ex.id.clone(),
                hypothesis: middles.iter().map(|s| vocab.decode(s)).collect(),
            })
        })
        .collect()
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), BridgingError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut w, row).map_err(|e| BridgingError::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, BridgingError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| BridgingError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Writes examples as JSON lines.
pub fn write_examples(path: &Path, examples: &[BridgingExample]) -> Result<(), BridgingError> {
    write_jsonl(path, examples)
}

/// Reads examples from JSON lines, revalidating invariants.
pub fn read_examples(path: &Path) -> Result<Vec<BridgingExample>, BridgingError> {
    read_jsonl(path)
}

/// Writes generations as JSON lines.
pub fn write_generations(path: &Path, rows: &[GeneratedBridge]) -> Result<(), BridgingError> {
    write_jsonl(path, rows)
}

/// Reads generations from JSON lines.
pub fn read_generations(path: &Path) -> Result<Vec<GeneratedBridge>, BridgingError> {
    read_jsonl(path)
}
