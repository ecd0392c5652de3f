//! Batched Adagrad training with validation-driven learning-rate decay.

use crate::corpus::{Paragraph, Vocab};
use crate::models::config::Variant;
use crate::models::losses::TrainItem;
use crate::models::model::Model;
use crate::models::ModelError;
use crate::scalar::Scalar;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Salt so the shuffle stream is independent of the init stream.
const SHUFFLE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Encoded items for one split.
#[derive(Debug, Clone)]
pub struct TrainSet {
    pub items: Vec<TrainItem>,
}

impl TrainSet {
    /// Encodes paragraphs into variant-shaped items, truncating sentences to
    /// `max_sentence_len` tokens. `labels` maps paragraph ids to per-token
    /// label sequences, one per sentence, and is required by flow_disc only;
    /// label sequences are truncated in lockstep with their sentences.
    pub fn prepare(
        variant: Variant,
        paragraphs: &[Paragraph],
        vocab: &Vocab,
        labels: Option<&HashMap<String, Vec<Vec<usize>>>>,
        max_sentence_len: usize,
    ) -> Result<TrainSet, ModelError> {
        let mut items = Vec::new();
        for paragraph in paragraphs {
            let sentences: Vec<Vec<usize>> = paragraph
                .sentences
                .iter()
                .map(|s| {
                    let mut ids = vocab.encode(s);
                    ids.truncate(max_sentence_len);
                    ids
                })
                .collect();
            let m = sentences.len();
            let item = match variant {
                Variant::S2s | Variant::Hs2s => {
                    if m < 3 {
                        continue;
                    }
                    TrainItem {
                        context: vec![sentences[0].clone(), sentences[m - 1].clone()],
                        targets: sentences[1..m - 1].to_vec(),
                        labels: None,
                    }
                }
                Variant::FlowDisc => {
                    if m < 2 {
                        continue;
                    }
                    let seqs = labels
                        .and_then(|map| map.get(&paragraph.id))
                        .ok_or_else(|| {
                            ModelError::Label(format!(
                                "paragraph {} has no label annotation",
                                paragraph.id
                            ))
                        })?;
                    if seqs.len() != m {
                        return Err(ModelError::Label(format!(
                            "paragraph {} has {} label sequences for {} sentences",
                            paragraph.id,
                            seqs.len(),
                            m
                        )));
                    }
                    for (j, (seq, sentence)) in seqs.iter().zip(&paragraph.sentences).enumerate() {
                        if seq.len() != sentence.len() {
                            return Err(ModelError::Label(format!(
                                "paragraph {} sentence {j}: {} labels for {} tokens",
                                paragraph.id,
                                seq.len(),
                                sentence.len()
                            )));
                        }
                    }
                    let item_labels = seqs[1..]
                        .iter()
                        .map(|seq| {
                            let mut seq = seq.clone();
                            seq.truncate(max_sentence_len);
                            seq
                        })
                        .collect();
                    TrainItem {
                        context: vec![sentences[0].clone()],
                        targets: sentences[1..].to_vec(),
                        labels: Some(item_labels),
                    }
                }
                Variant::FlowDelta => TrainItem {
                    context: vec![],
                    targets: sentences,
                    labels: None,
                },
            };
            items.push(item);
        }
        Ok(TrainSet { items })
    }
}

/// One epoch's curve point; nll values are token means of the language-model
/// term only, so `exp` of either is a perplexity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_nll: f64,
    pub valid_nll: f64,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub epochs: Vec<EpochLog>,
    pub best_epoch: usize,
    pub best_valid_nll: f64,
}

/// Runs the full training schedule on `model`, leaving the parameters at the
/// best validation epoch. `on_epoch` sees each curve point as it completes.
pub fn train<F: Scalar>(
    model: &mut Model<F>,
    train_items: &[TrainItem],
    valid_items: &[TrainItem],
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainOutcome, ModelError> {
    if train_items.is_empty() || valid_items.is_empty() {
        return Err(ModelError::Config("training needs non-empty train and valid splits".into()));
    }
    let config = model.config.clone();
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed ^ SHUFFLE_SALT);
    let mut order: Vec<usize> = (0..train_items.len()).collect();
    let mut lr = config.lr;
    let mut best_valid = f64::INFINITY;
    let mut best_epoch = 0;
    let mut best_params = model.store.snapshot();
    let mut epochs = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_nll = 0.0;
        let mut epoch_tokens = 0usize;
        for chunk in order.chunks(config.batch) {
            let total_tokens: usize =
                chunk.iter().map(|&i| predicted_tokens(&train_items[i])).sum();
            model.store.zero_grads();
            for &i in chunk {
                let (mut tape, nodes) = model.paragraph_loss(&train_items[i])?;
                let scaled =
                    tape.scale(nodes.objective, F::c(1.0 / total_tokens as f64));
                tape.backward(scaled);
                let lm = tape.value(nodes.lm_nll)[0].to_f64_lossy();
                if !lm.is_finite() {
                    return Err(ModelError::Diverged { epoch });
                }
                epoch_nll += lm;
                epoch_tokens += nodes.n_tokens;
            }
            model.store.clip_grad_norm(F::c(config.clip));
            model.store.adagrad_step(F::c(lr));
        }
        let train_nll = epoch_nll / epoch_tokens as f64;
        let valid_nll = mean_lm_nll(model, valid_items)?;
        if !valid_nll.is_finite() {
            return Err(ModelError::Diverged { epoch });
        }
        if valid_nll < best_valid {
            best_valid = valid_nll;
            best_epoch = epoch;
            best_params = model.store.snapshot();
        } else {
            lr *= config.lr_decay;
        }
        let log = EpochLog { epoch, train_nll, valid_nll, lr };
        on_epoch(&log);
        epochs.push(log);
    }
    model.store.restore(&best_params);
    Ok(TrainOutcome { epochs, best_epoch, best_valid_nll: best_valid })
}

/// Token-mean language-model negative log likelihood over a split.
pub fn mean_lm_nll<F: Scalar>(
    model: &mut Model<F>,
    items: &[TrainItem],
) -> Result<f64, ModelError> {
    if items.is_empty() {
        return Err(ModelError::Config("cannot evaluate an empty split".into()));
    }
    let mut sum = 0.0;
    let mut tokens = 0usize;
    for item in items {
        let (tape, nodes) = model.paragraph_loss(item)?;
        sum += tape.value(nodes.lm_nll)[0].to_f64_lossy();
        tokens += nodes.n_tokens;
    }
    Ok(sum / tokens as f64)
}

fn predicted_tokens(item: &TrainItem) -> usize {
    item.targets.iter().map(|t| t.len() + 1).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Domain;
    use crate::models::config::ModelConfig;

    fn paragraph(id: &str, sentences: &[&[&str]]) -> Paragraph {
        Paragraph {
            id: id.into(),
            domain: Domain::Synthetic,
            sentences: sentences
                .iter()
                .map(|s| s.iter().map(|t| t.to_string()).collect())
                .collect(),
        }
    }

    fn corpus() -> (Vec<Paragraph>, Vocab) {
        let paragraphs = vec![
            paragraph("a", &[&["the", "cat", "sat"], &["it", "was", "warm"], &["so", "it"], &["slept", "well"]]),
            paragraph("b", &[&["dogs", "bark"], &["cats", "nap"], &["birds", "sing", "songs"], &["it", "was"]]),
        ];
        let vocab = crate::corpus::build_vocab(&paragraphs, 100).unwrap();
        (paragraphs, vocab)
    }

    fn tiny_config(variant: Variant) -> ModelConfig {
        ModelConfig {
            variant,
            embed: 5,
            hidden: 4,
            vocab: 100,
            batch: 2,
            epochs: 8,
            lr: 0.3,
            seed: 3,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn items_take_variant_shapes() {
        let (paragraphs, vocab) = corpus();
        let s2s = TrainSet::prepare(Variant::S2s, &paragraphs, &vocab, None, 25).unwrap();
        assert_eq!(s2s.items[0].context.len(), 2);
        assert_eq!(s2s.items[0].targets.len(), 2);

        let seqs: HashMap<String, Vec<Vec<usize>>> = [
            ("a".into(), vec![vec![0, 0, 0], vec![0, 1, 0], vec![2, 0], vec![0, 1]]),
            ("b".into(), vec![vec![0, 0], vec![1, 0], vec![0, 2, 0], vec![0, 0]]),
        ]
        .into();
        let disc =
            TrainSet::prepare(Variant::FlowDisc, &paragraphs, &vocab, Some(&seqs), 25).unwrap();
        assert_eq!(disc.items[0].context.len(), 1);
        assert_eq!(disc.items[0].targets.len(), 3);
        let labels = disc.items[0].labels.as_ref().unwrap();
        assert_eq!(labels[1], vec![2, 0]);
        for (seq, target) in labels.iter().zip(&disc.items[0].targets) {
            assert_eq!(seq.len(), target.len());
        }

        let delta = TrainSet::prepare(Variant::FlowDelta, &paragraphs, &vocab, None, 25).unwrap();
        assert_eq!(delta.items[0].targets.len(), 4);
        assert!(delta.items[0].context.is_empty());
    }

    #[test]
    fn long_sentences_are_truncated() {
        let p = vec![paragraph("a", &[&["a"; 30], &["b", "c"], &["d"], &["e", "f"]])];
        let vocab = crate::corpus::build_vocab(&p, 100).unwrap();
        let set = TrainSet::prepare(Variant::FlowDelta, &p, &vocab, None, 25).unwrap();
        assert_eq!(set.items[0].targets[0].len(), 25);

        let q = vec![paragraph("a", &[&["b", "c"], &["a"; 30], &["d"], &["e", "f"]])];
        let vocab = crate::corpus::build_vocab(&q, 100).unwrap();
        let seqs: HashMap<String, Vec<Vec<usize>>> =
            [("a".into(), vec![vec![0, 0], vec![1; 30], vec![0], vec![0, 0]])].into();
        let set = TrainSet::prepare(Variant::FlowDisc, &q, &vocab, Some(&seqs), 25).unwrap();
        assert_eq!(set.items[0].targets[0].len(), 25);
        assert_eq!(set.items[0].labels.as_ref().unwrap()[0].len(), 25);
    }

    #[test]
    fn missing_or_misaligned_labels_error() {
        let (paragraphs, vocab) = corpus();
        let empty = HashMap::new();
        assert!(matches!(
            TrainSet::prepare(Variant::FlowDisc, &paragraphs, &vocab, Some(&empty), 25),
            Err(ModelError::Label(_))
        ));
        let mut good: HashMap<String, Vec<Vec<usize>>> = [
            ("a".into(), vec![vec![0, 0, 0], vec![0, 1, 0], vec![2, 0], vec![0, 1]]),
            ("b".into(), vec![vec![0, 0], vec![1, 0], vec![0, 2, 0], vec![0, 0]]),
        ]
        .into();
        let mut short = good.clone();
        short.get_mut("a").unwrap().pop();
        assert!(matches!(
            TrainSet::prepare(Variant::FlowDisc, &paragraphs, &vocab, Some(&short), 25),
            Err(ModelError::Label(_))
        ));
        good.get_mut("b").unwrap()[2] = vec![0, 2];
        assert!(matches!(
            TrainSet::prepare(Variant::FlowDisc, &paragraphs, &vocab, Some(&good), 25),
            Err(ModelError::Label(_))
        ));
    }

    #[test]
    fn training_reduces_the_loss_and_keeps_the_best_epoch() {
        let (paragraphs, vocab) = corpus();
        let set = TrainSet::prepare(Variant::FlowDelta, &paragraphs, &vocab, None, 25).unwrap();
        let mut model = Model::<f64>::new(tiny_config(Variant::FlowDelta), vocab.len(), 0, None).unwrap();
        let before = mean_lm_nll(&mut model, &set.items).unwrap();
        let outcome = train(&mut model, &set.items, &set.items, |_| {}).unwrap();
        assert!(outcome.epochs.last().unwrap().train_nll < before);
        let revalid = mean_lm_nll(&mut model, &set.items).unwrap();
        assert_eq!(revalid, outcome.best_valid_nll, "parameters end at the best epoch");
    }

    #[test]
    fn curves_are_bitwise_deterministic_per_seed() {
        let (paragraphs, vocab) = corpus();
        let set = TrainSet::prepare(Variant::S2s, &paragraphs, &vocab, None, 25).unwrap();
        let run = || {
            let mut model =
                Model::<f64>::new(tiny_config(Variant::S2s), vocab.len(), 0, None).unwrap();
            train(&mut model, &set.items, &set.items, |_| {}).unwrap()
        };
        let (a, b) = (run(), run());
        for (x, y) in a.epochs.iter().zip(&b.epochs) {
            assert_eq!(x.train_nll.to_bits(), y.train_nll.to_bits());
            assert_eq!(x.valid_nll.to_bits(), y.valid_nll.to_bits());
        }
    }

    #[test]
    fn learning_rate_follows_the_decay_rule() {
        let (paragraphs, vocab) = corpus();
        let set = TrainSet::prepare(Variant::Hs2s, &paragraphs, &vocab, None, 25).unwrap();
        let mut config = tiny_config(Variant::Hs2s);
        config.lr = 0.8;
        let mut model = Model::<f64>::new(config.clone(), vocab.len(), 0, None).unwrap();
        let outcome = train(&mut model, &set.items, &set.items, |_| {}).unwrap();
        let mut best = f64::INFINITY;
        let mut lr = config.lr;
        for log in &outcome.epochs {
            if log.valid_nll < best {
                best = log.valid_nll;
            } else {
                lr *= config.lr_decay;
            }
            assert_eq!(log.lr, lr, "epoch {}", log.epoch);
        }
    }

    #[test]
    fn poisoned_parameters_report_divergence() {
        let (paragraphs, vocab) = corpus();
        let set = TrainSet::prepare(Variant::FlowDelta, &paragraphs, &vocab, None, 25).unwrap();
        let mut model = Model::<f64>::new(tiny_config(Variant::FlowDelta), vocab.len(), 0, None).unwrap();
        let id = model.store.id("out.b");
        model.store.data_mut(id)[0] = f64::NAN;
        assert!(matches!(
            train(&mut model, &set.items, &set.items, |_| {}),
            Err(ModelError::Diverged { epoch: 1 })
        ));
    }
}
