//! Deterministic corpus splitting.

use super::{CorpusError, Paragraph};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Seeded train/valid/test split ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    pub ratios: (f64, f64, f64),
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            seed: 0,
            ratios: (0.9, 0.05, 0.05),
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let sum = self.ratios.0 + self.ratios.1 + self.ratios.2;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::BadRatios(sum));
        }
        Ok(())
    }
}

/// Train, valid, and test paragraph lists, in that order.
pub type SplitParts = (Vec<Paragraph>, Vec<Paragraph>, Vec<Paragraph>);

/// Shuffles paragraphs with a seeded generator and partitions them.
///
/// Valid and test sizes are floor-rounded from the ratios; the remainder
/// goes to train. Within each split the original corpus order is kept, so
/// the result is fully determined by the input order and the seed.
pub fn split_corpus(paragraphs: &[Paragraph], spec: &SplitSpec) -> Result<SplitParts, CorpusError> {
    spec.validate()?;
    let n = paragraphs.len();
    if n < 20 {
        return Err(CorpusError::TooSmall(n));
    }
    let n_valid = (n as f64 * spec.ratios.1).floor() as usize;
    let n_test = (n as f64 * spec.ratios.2).floor() as usize;
    let n_train = n - n_valid - n_test;

    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);

    let take = |slice: &[usize]| {
        let mut picked = slice.to_vec();
        picked.sort_unstable();
        picked.iter().map(|&i| paragraphs[i].clone()).collect::<Vec<_>>()
    };
    let train = take(&indices[..n_train]);
    let valid = take(&indices[n_train..n_train + n_valid]);
    let test = take(&indices[n_train + n_valid..]);
    Ok((train, valid, test))
}
