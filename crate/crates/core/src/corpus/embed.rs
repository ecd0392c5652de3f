//! Word embedding tables.

use super::vocab::{Vocab, PAD};
use super::CorpusError;
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

/// One row per vocabulary id, all rows the same width.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<F> {
    dim: usize,
    vectors: Vec<Vec<F>>,
}

impl<F: Scalar> EmbeddingTable<F> {
    /// Seeded uniform(-0.1, 0.1) vectors for every id except PAD, which is
    /// the zero vector.
    pub fn random(vocab: &Vocab, dim: usize, seed: u64) -> EmbeddingTable<F> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let vectors = (0..vocab.len())
            .map(|id| {
                if id == PAD {
                    vec![F::zero(); dim]
                } else {
                    (0..dim).map(|_| F::c(rng.gen_range(-0.1..0.1))).collect()
                }
            })
            .collect();
        EmbeddingTable { dim, vectors }
    }

    pub fn from_rows(vectors: Vec<Vec<F>>) -> Result<EmbeddingTable<F>, CorpusError> {
        let dim = vectors.first().map(Vec::len).ok_or(CorpusError::Empty)?;
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(CorpusError::BadDim {
                    line: i,
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        Ok(EmbeddingTable { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn get(&self, id: usize) -> &[F] {
        &self.vectors[id]
    }
}

/// Reads a whitespace text embedding file ("token v1 .. v_dim" per line)
/// and builds a table over the vocabulary. Tokens missing from the file
/// get seeded uniform(-0.1, 0.1) vectors; PAD is always the zero vector.
pub fn load_embeddings<F: Scalar>(
    path: &Path,
    vocab: &Vocab,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingTable<F>, CorpusError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut from_file: HashMap<String, Vec<F>> = HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-empty line");
        let values: Vec<F> = parts
            .map(|v| {
                v.parse::<f64>().map(F::c).map_err(|e| CorpusError::Parse {
                    line: lineno + 1,
                    msg: format!("bad embedding value {v:?}: {e}"),
                })
            })
            .collect::<Result<_, _>>()?;
        if values.len() != dim {
            return Err(CorpusError::BadDim {
                line: lineno + 1,
                expected: dim,
                got: values.len(),
            });
        }
        from_file.insert(token.to_string(), values);
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let vectors = (0..vocab.len())
        .map(|id| {
            if id == PAD {
                vec![F::zero(); dim]
            } else {
                match from_file.get(vocab.token(id)) {
                    Some(v) => v.clone(),
                    None => (0..dim).map(|_| F::c(rng.gen_range(-0.1..0.1))).collect(),
                }
            }
        })
        .collect();
    Ok(EmbeddingTable { dim, vectors })
}
