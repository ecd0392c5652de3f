//! Corpus records, filtering, splitting, vocabulary, and embeddings.
//!
//! A corpus is a list of [`Paragraph`]s: ordered tokenized sentences with a
//! domain tag. Raw text enters through [`filter_paragraph`], which enforces
//! the corpus construction rules; everything downstream may assume the
//! [`Paragraph`] invariants hold.

mod embed;
mod filter;
mod io;
mod split;
mod tokenizer;
mod vocab;

pub use embed::{load_embeddings, EmbeddingTable};
pub use filter::{
    filter_paragraph, RejectReason, END_MARKS, MAX_SENTENCES, MAX_TOKENS, MIN_SENTENCES,
    MIN_TOKENS,
};
pub use io::{
    read_corpus, read_raw_paragraphs, read_split_manifest, write_corpus, write_split_manifest,
    SplitManifest,
};
pub use split::{split_corpus, SplitSpec};
pub use tokenizer::{DefaultTokenizer, Tokenize, TokenizeError};
pub use vocab::{build_vocab, Vocab, BOS, EOP, EOS, PAD, RESERVED, SEP, UNK};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Source corpus a paragraph came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Papers,
    Scifi,
    Fantasy,
    Synthetic,
}

impl Domain {
    pub const ALL: [Domain; 4] = [
        Domain::Papers,
        Domain::Scifi,
        Domain::Fantasy,
        Domain::Synthetic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Papers => "papers",
            Domain::Scifi => "scifi",
            Domain::Fantasy => "fantasy",
            Domain::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Domain::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| CorpusError::UnknownDomain(s.to_string()))
    }
}

/// One filtered paragraph: 4 to 7 tokenized sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub id: String,
    pub domain: Domain,
    pub sentences: Vec<Vec<String>>,
}

impl Paragraph {
    /// Checks the structural invariants every filtered paragraph satisfies.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let n = self.sentences.len();
        if !(MIN_SENTENCES..=MAX_SENTENCES).contains(&n) {
            return Err(CorpusError::Invalid(format!(
                "paragraph {}: {} sentences",
                self.id, n
            )));
        }
        for (i, s) in self.sentences.iter().enumerate() {
            if !(MIN_TOKENS..=MAX_TOKENS).contains(&s.len()) {
                return Err(CorpusError::Invalid(format!(
                    "paragraph {}: sentence {} has {} tokens",
                    self.id,
                    i,
                    s.len()
                )));
            }
        }
        for w in self.sentences.windows(2) {
            if w[0] == w[1] {
                return Err(CorpusError::Invalid(format!(
                    "paragraph {}: adjacent duplicate sentences",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Errors from corpus construction and I/O.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("embedding line {line}: expected {expected} values, got {got}")]
    BadDim {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("need at least 20 paragraphs to split, got {0}")]
    TooSmall(usize),
    #[error("empty corpus")]
    Empty,
    #[error("split ratios must sum to 1, got {0}")]
    BadRatios(f64),
    #[error("unknown domain {0:?}")]
    UnknownDomain(String),
    #[error("invalid paragraph: {0}")]
    Invalid(String),
}
