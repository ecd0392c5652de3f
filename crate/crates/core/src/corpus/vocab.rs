//! Vocabulary with reserved control tokens.

use super::{CorpusError, Paragraph};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::Path;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const BOS: usize = 2;
pub const EOS: usize = 3;
pub const SEP: usize = 4;
pub const EOP: usize = 5;

/// Reserved token strings, in id order.
pub const RESERVED: [&str; 6] = ["<pad>", "<unk>", "<bos>", "<eos>", "<sep>", "<eop>"];

/// Token table mapping ids 0..len to strings; ids below `RESERVED.len()`
/// are control tokens and every out-of-vocabulary token encodes to UNK.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    tokens: Vec<String>,
}

impl Vocab {
    /// Builds a vocabulary from non-reserved tokens; reserved tokens are
    /// prepended automatically and duplicates are ignored.
    pub fn from_tokens(non_reserved: impl IntoIterator<Item = String>) -> Vocab {
        let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        let mut index: HashMap<String, usize> =
            tokens.iter().cloned().zip(0..).collect();
        for t in non_reserved {
            if !index.contains_key(&t) {
                index.insert(t.clone(), tokens.len());
                tokens.push(t);
            }
        }
        Vocab { tokens, index }
    }

    /// Total size including reserved tokens; never zero.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_reserved(id: usize) -> bool {
        id < RESERVED.len()
    }

    /// Token string for an id; panics on out-of-range ids.
    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    /// Id for a token, UNK when absent.
    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn lookup(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.tokens[i].clone()).collect()
    }

    /// Content hash used to bind checkpoints to the vocabulary they were
    /// trained with.
    pub fn hash_hex(&self) -> String {
        let mut hasher = Sha256::new();
        for t in &self.tokens {
            hasher.update(t.as_bytes());
            hasher.update([0u8]);
        }
        format!("{:x}", hasher.finalize())
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let file = VocabFile {
            tokens: self.tokens.clone(),
        };
        let json = serde_json::to_string_pretty(&file).expect("vocab serializes");
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Vocab, CorpusError> {
        let text = std::fs::read_to_string(path)?;
        let file: VocabFile = serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
            line: 0,
            msg: format!("vocab file: {e}"),
        })?;
        for (i, r) in RESERVED.iter().enumerate() {
            if file.tokens.get(i).map(String::as_str) != Some(*r) {
                return Err(CorpusError::Parse {
                    line: 0,
                    msg: format!("vocab file missing reserved token {r} at id {i}"),
                });
            }
        }
        Ok(Vocab::from_tokens(
            file.tokens[RESERVED.len()..].iter().cloned(),
        ))
    }
}

/// Counts tokens over training paragraphs and keeps the `max_size` most
/// frequent, breaking frequency ties lexicographically.
pub fn build_vocab(paragraphs: &[Paragraph], max_size: usize) -> Result<Vocab, CorpusError> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for p in paragraphs {
        for s in &p.sentences {
            for t in s {
                *counts.entry(t.as_str()).or_insert(0) += 1;
            }
        }
    }
    if counts.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut ranked: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|(t, _)| !RESERVED.contains(t))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_size);
    Ok(Vocab::from_tokens(
        ranked.into_iter().map(|(t, _)| t.to_string()),
    ))
}

#[cfg(test)]
mod tests {
    use super::super::Domain;
    use super::*;

    fn para(sentences: &[&[&str]]) -> Paragraph {
        Paragraph {
            id: "p".into(),
            domain: Domain::Synthetic,
            sentences: sentences
                .iter()
                .map(|s| s.iter().map(|t| t.to_string()).collect())
                .collect(),
        }
    }

    #[test]
    fn five_tokens_plus_reserved() {
        let p = para(&[&["a", "b", "c", "d", "e"]]);
        let v = build_vocab(&[p], 50_000).unwrap();
        assert_eq!(v.len(), 5 + RESERVED.len());
    }

    #[test]
    fn truncates_to_max_size_by_frequency() {
        let p = para(&[&["x", "x", "x", "y", "y", "z"]]);
        let v = build_vocab(&[p], 2).unwrap();
        assert_eq!(v.len(), 2 + RESERVED.len());
        assert_ne!(v.id("x"), UNK);
        assert_ne!(v.id("y"), UNK);
        assert_eq!(v.id("z"), UNK);
    }

    #[test]
    fn frequency_ties_break_lexicographically() {
        let p = para(&[&["ab", "aa", "ab", "aa", "zz"]]);
        let v = build_vocab(&[p], 1).unwrap();
        assert_ne!(v.id("aa"), UNK);
        assert_eq!(v.id("ab"), UNK);
    }

    #[test]
    fn empty_corpus_errors() {
        assert!(matches!(build_vocab(&[], 100), Err(CorpusError::Empty)));
    }

    #[test]
    fn encode_decode_round_trip() {
        let p = para(&[&["the", "cat", "sat", "down", "here"]]);
        let v = build_vocab(&[p], 100).unwrap();
        let tokens: Vec<String> = ["the", "cat", "sat"].iter().map(|s| s.to_string()).collect();
        let ids = v.encode(&tokens);
        assert_eq!(v.decode(&ids), tokens);
    }

    #[test]
    fn oov_encodes_to_unk() {
        let p = para(&[&["only", "these", "five", "known", "words"]]);
        let v = build_vocab(&[p], 100).unwrap();
        assert_eq!(v.id("martian"), UNK);
        assert_eq!(v.decode(&[UNK]), vec!["<unk>".to_string()]);
    }

    #[test]
    fn reserved_ids_are_stable() {
        let v = Vocab::from_tokens(std::iter::empty());
        assert_eq!(v.token(PAD), "<pad>");
        assert_eq!(v.token(UNK), "<unk>");
        assert_eq!(v.token(BOS), "<bos>");
        assert_eq!(v.token(EOS), "<eos>");
        assert_eq!(v.token(SEP), "<sep>");
        assert_eq!(v.token(EOP), "<eop>");
    }

    #[test]
    fn save_load_round_trip() {
        let p = para(&[&["alpha", "beta", "gamma", "delta", "eps"]]);
        let v = build_vocab(&[p], 100).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.json");
        v.save(&path).unwrap();
        let loaded = Vocab::load(&path).unwrap();
        assert_eq!(loaded, v);
        assert_eq!(loaded.hash_hex(), v.hash_hex());
    }

    #[test]
    fn hash_changes_with_content() {
        let a = Vocab::from_tokens(["x".to_string()]);
        let b = Vocab::from_tokens(["y".to_string()]);
        assert_ne!(a.hash_hex(), b.hash_hex());
    }
}
