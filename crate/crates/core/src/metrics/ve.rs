//! Embedding-similarity metric: cosine between pooled word vectors.
//!
//! The default pools by averaging; the classic per-dimension extrema
//! pooling (keep the entry with the largest magnitude) stays available
//! behind a mode flag for comparison.

use crate::corpus::{EmbeddingTable, Vocab, RESERVED};
use crate::scalar::Scalar;
use std::fmt;
use std::str::FromStr;

/// How token vectors combine into one sentence vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VeMode {
    /// Mean over token vectors (the default).
    #[default]
    Avg,
    /// Per-dimension entry with the largest magnitude.
    Extrema,
}

impl fmt::Display for VeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VeMode::Avg => "avg",
            VeMode::Extrema => "extrema",
        })
    }
}

impl FromStr for VeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "avg" => Ok(VeMode::Avg),
            "extrema" => Ok(VeMode::Extrema),
            other => Err(format!("unknown pooling mode: {other}")),
        }
    }
}

/// Embeddings of the in-vocabulary tokens (reserved ids excluded).
fn vectors<'a, F: Scalar>(
    tokens: &[String],
    vocab: &Vocab,
    table: &'a EmbeddingTable<F>,
) -> Vec<&'a [F]> {
    tokens
        .iter()
        .filter_map(|t| vocab.lookup(t))
        .filter(|&id| id >= RESERVED.len())
        .map(|id| table.get(id))
        .collect()
}

fn pool<F: Scalar>(vecs: &[&[F]], dim: usize, mode: VeMode) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    match mode {
        VeMode::Avg => {
            for v in vecs {
                for (o, x) in out.iter_mut().zip(v.iter()) {
                    *o += x.to_f64_lossy();
                }
            }
            for o in &mut out {
                *o /= vecs.len() as f64;
            }
        }
        VeMode::Extrema => {
            for v in vecs {
                for (o, x) in out.iter_mut().zip(v.iter()) {
                    let x = x.to_f64_lossy();
                    if x.abs() > o.abs() {
                        *o = x;
                    }
                }
            }
        }
    }
    out
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(dot / (na * nb))
}

/// Cosine similarity of pooled embeddings, in [−1, 1].
///
/// Out-of-vocabulary tokens are skipped; a side with no usable tokens, or
/// one that pools to the zero vector, scores 0 with a warning.
pub fn vector_extrema<F: Scalar>(
    hypothesis: &[String],
    reference: &[String],
    vocab: &Vocab,
    table: &EmbeddingTable<F>,
    mode: VeMode,
) -> f64 {
    let hyp = vectors(hypothesis, vocab, table);
    let refr = vectors(reference, vocab, table);
    if hyp.is_empty() || refr.is_empty() {
        eprintln!("warning: no in-vocabulary tokens on one side; scoring 0");
        return 0.0;
    }
    let dim = table.dim();
    match cosine(&pool(&hyp, dim, mode), &pool(&refr, dim, mode)) {
        Some(score) => score,
        None => {
            eprintln!("warning: pooled embedding is the zero vector; scoring 0");
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, Domain, Paragraph};

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    /// Vocab over tokens a..f and an embedding table with fixed rows.
    fn fixture() -> (Vocab, EmbeddingTable<f64>) {
        let paragraph = Paragraph {
            id: "p".into(),
            domain: Domain::Synthetic,
            sentences: vec![words("a b c d e f"); 4],
        };
        let vocab = build_vocab(&[paragraph], 100).unwrap();
        let mut rows = vec![vec![0.0, 0.0]; RESERVED.len()];
        rows[1] = vec![1.0, 1.0]; // <unk>, must not leak into scores
        for (i, ch) in "abcdef".chars().enumerate() {
            assert_eq!(vocab.token(RESERVED.len() + i), ch.to_string());
        }
        rows.push(vec![1.0, 0.0]); // a
        rows.push(vec![0.0, 1.0]); // b
        rows.push(vec![-1.0, 0.0]); // c
        rows.push(vec![1.0, -3.0]); // d
        rows.push(vec![2.0, 1.0]); // e
        rows.push(vec![0.0, -2.0]); // f
        (vocab, EmbeddingTable::from_rows(rows).unwrap())
    }

    #[test]
    fn identical_sentences_score_one() {
        let (vocab, table) = fixture();
        let s = words("a b d e");
        for mode in [VeMode::Avg, VeMode::Extrema] {
            let got = vector_extrema(&s, &s, &vocab, &table, mode);
            assert!((got - 1.0).abs() < 1e-9, "{mode}: got {got}");
        }
    }

    #[test]
    fn orthogonal_means_score_zero() {
        let (vocab, table) = fixture();
        let got = vector_extrema(&words("a"), &words("b"), &vocab, &table, VeMode::Avg);
        assert!(got.abs() < 1e-12, "got {got}");
    }

    #[test]
    fn avg_mode_matches_hand_computed_cosine() {
        let (vocab, table) = fixture();
        // mean(a, b) = (0.5, 0.5); mean(e) = (2, 1).
        let got = vector_extrema(&words("a b"), &words("e"), &vocab, &table, VeMode::Avg);
        let want = 1.5 / ((0.5f64).sqrt() * 5.0f64.sqrt());
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    fn extrema_mode_keeps_largest_magnitude_entries() {
        let (vocab, table) = fixture();
        // Pool(d, e) keeps x from e (|2| > |1|) and y from d (|-3| > |1|).
        let got = vector_extrema(&words("d e"), &words("d"), &vocab, &table, VeMode::Extrema);
        let want = (2.0 + 9.0) / (13.0f64.sqrt() * 10.0f64.sqrt());
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    fn avg_mode_is_permutation_invariant() {
        let (vocab, table) = fixture();
        let base = vector_extrema(&words("a b d e f"), &words("c d"), &vocab, &table, VeMode::Avg);
        let perm = vector_extrema(&words("f d b e a"), &words("d c"), &vocab, &table, VeMode::Avg);
        assert!((base - perm).abs() < 1e-9);
    }

    #[test]
    fn oov_tokens_are_skipped_not_mapped_to_unk() {
        let (vocab, table) = fixture();
        // "zz" is OOV; if it leaked in as <unk> = (1, 1) the score would move.
        let with_oov = vector_extrema(&words("a zz"), &words("a"), &vocab, &table, VeMode::Avg);
        assert!((with_oov - 1.0).abs() < 1e-9, "got {with_oov}");
    }

    #[test]
    fn all_oov_side_scores_zero() {
        let (vocab, table) = fixture();
        let got = vector_extrema(&words("zz yy"), &words("a b"), &vocab, &table, VeMode::Avg);
        assert_eq!(got, 0.0);
    }

    #[test]
    fn mode_flag_round_trips_through_strings() {
        for mode in [VeMode::Avg, VeMode::Extrema] {
            assert_eq!(mode.to_string().parse::<VeMode>().unwrap(), mode);
        }
        assert!("best".parse::<VeMode>().is_err());
    }
}
