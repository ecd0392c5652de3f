//! Per-paragraph training objectives for the four variants.

use crate::corpus::{BOS, EOS, SEP};
use crate::models::config::Variant;
use crate::models::model::{FlowDeltaParts, FlowDiscParts, Hs2sParts, Model, Parts, S2sParts};
use crate::models::ModelError;
use crate::scalar::Scalar;
use crate::seqmodel::cells::{encode_tokens, AttentionCell, Embedding, LstmCell, LstmState, OutputLayer};
use crate::seqmodel::gradcheck::{grad_check, GradCheckReport};
use crate::seqmodel::{Tape, Var};

/// One training paragraph, encoded to vocabulary ids.
///
/// `context` holds encoder-side sentences: first and last for the bridging
/// seq2seq variants, the opening sentence for the chained variant, nothing
/// for the paragraph language model. `targets` holds the sentences the
/// decoder must produce, in order. `labels` carries per-token relation ids
/// aligned with `targets`, consumed only by the relation-tagging variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainItem {
    pub context: Vec<Vec<usize>>,
    pub targets: Vec<Vec<usize>>,
    pub labels: Option<Vec<Vec<usize>>>,
}

/// Tape nodes for one item's objective.
#[derive(Debug, Clone, Copy)]
pub struct LossNodes {
    /// Full training objective including any auxiliary terms.
    pub objective: Var,
    /// Token-summed language-model negative log likelihood.
    pub lm_nll: Var,
    /// Predicted positions, counting each sentence-final EOS.
    pub n_tokens: usize,
}

impl<F: Scalar> Model<F> {
    /// Builds one item's objective on a fresh tape over this model's
    /// parameters; call `backward` on the tape or read values off it.
    pub fn paragraph_loss(
        &mut self,
        item: &TrainItem,
    ) -> Result<(Tape<'_, F>, LossNodes), ModelError> {
        check_item(self.config.variant, self.n_labels, item)?;
        let parts = self.parts;
        let alpha = self.config.alpha;
        let mut tape = Tape::new(&mut self.store);
        let nodes = build_objective(parts, alpha, &mut tape, item);
        Ok((tape, nodes))
    }

    /// Compares analytic gradients of one item's objective against central
    /// finite differences, parameter tensor by parameter tensor.
    pub fn check_gradients(
        &mut self,
        item: &TrainItem,
        epsilon: f64,
    ) -> Result<GradCheckReport, ModelError> {
        check_item(self.config.variant, self.n_labels, item)?;
        let parts = self.parts;
        let alpha = self.config.alpha;
        let report = grad_check(&mut self.store, epsilon, |tape| {
            build_objective(parts, alpha, tape, item).objective
        })?;
        Ok(report)
    }
}

fn check_item(variant: Variant, n_labels: usize, item: &TrainItem) -> Result<(), ModelError> {
    if item.targets.is_empty() {
        return Err(ModelError::Config("items need at least one target sentence".into()));
    }
    if item.context.iter().chain(&item.targets).any(Vec::is_empty) {
        return Err(ModelError::Config("items may not contain empty sentences".into()));
    }
    if item.labels.is_some() && variant != Variant::FlowDisc {
        return Err(ModelError::Label(format!("{variant} does not consume labels")));
    }
    match variant {
        Variant::S2s | Variant::Hs2s => {
            if item.context.is_empty() {
                return Err(ModelError::Config(format!("{variant} items need context sentences")));
            }
        }
        Variant::FlowDisc => {
            if item.context.len() != 1 {
                return Err(ModelError::Config(format!(
                    "{variant} items need exactly one opening sentence, got {}",
                    item.context.len()
                )));
            }
            let labels = item
                .labels
                .as_ref()
                .ok_or_else(|| ModelError::Label(format!("{variant} items need labels")))?;
            if labels.len() != item.targets.len() {
                return Err(ModelError::Label(format!(
                    "{} label sequences for {} target sentences",
                    labels.len(),
                    item.targets.len()
                )));
            }
            for (i, (seq, sentence)) in labels.iter().zip(&item.targets).enumerate() {
                if seq.len() != sentence.len() {
                    return Err(ModelError::Label(format!(
                        "sentence {i} has {} labels for {} tokens",
                        seq.len(),
                        sentence.len()
                    )));
                }
                if let Some(&bad) = seq.iter().find(|&&l| l >= n_labels) {
                    return Err(ModelError::Label(format!(
                        "label id {bad} outside inventory of {n_labels}"
                    )));
                }
            }
        }
        Variant::FlowDelta => {
            if !item.context.is_empty() {
                return Err(ModelError::Config(format!(
                    "{variant} items carry all sentences in targets, context must be empty"
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn build_objective<F: Scalar>(
    parts: Parts,
    alpha: f64,
    tape: &mut Tape<F>,
    item: &TrainItem,
) -> LossNodes {
    match parts {
        Parts::S2s(p) => s2s_item(tape, &p, item),
        Parts::Hs2s(p) => hs2s_item(tape, &p, item),
        Parts::FlowDisc(p) => flow_disc_item(tape, &p, alpha, item),
        Parts::FlowDelta(p) => flow_delta_item(tape, &p, item),
    }
}

/// Continuous teacher-forced decode over `targets`, each sentence closed by
/// EOS; keeps the decoder states aligned with real tokens per sentence.
struct Decoded {
    nll: Var,
    states: Vec<Vec<Var>>,
    n_tokens: usize,
}

fn decode_chain<F: Scalar>(
    tape: &mut Tape<F>,
    emb: &Embedding,
    dec: &LstmCell,
    out: &OutputLayer,
    attn: Option<(&AttentionCell, &[Var])>,
    init: LstmState,
    targets: &[Vec<usize>],
) -> Decoded {
    let mut state = init;
    let mut prev = BOS;
    let mut losses = Vec::new();
    let mut states = Vec::with_capacity(targets.len());
    for sentence in targets {
        let mut sent_states = Vec::with_capacity(sentence.len());
        for (pos, &tok) in sentence.iter().chain(std::iter::once(&EOS)).enumerate() {
            let x = emb.lookup(tape, prev);
            let input = match attn {
                Some((cell, keys)) => {
                    let (context, _) = cell.context(tape, state.h, keys);
                    tape.concat(&[x, context])
                }
                None => x,
            };
            state = dec.step(tape, input, state);
            let logits = out.logits(tape, state.h);
            losses.push(tape.cross_entropy(logits, tok));
            if pos < sentence.len() {
                sent_states.push(state.h);
            }
            prev = tok;
        }
        states.push(sent_states);
    }
    let n_tokens = losses.len();
    let nll = tape.add_many(&losses);
    Decoded { nll, states, n_tokens }
}

pub(crate) fn join_with_sep(context: &[Vec<usize>]) -> Vec<usize> {
    let mut joined = Vec::new();
    for (i, sentence) in context.iter().enumerate() {
        if i > 0 {
            joined.push(SEP);
        }
        joined.extend_from_slice(sentence);
    }
    joined
}

fn s2s_decode<F: Scalar>(
    tape: &mut Tape<F>,
    p: &S2sParts,
    source: &[usize],
    targets: &[Vec<usize>],
) -> Decoded {
    let enc_states = encode_tokens(tape, &p.emb, &p.enc, source);
    let keys: Vec<Var> = enc_states.iter().map(|s| s.h).collect();
    let init = *enc_states.last().expect("source is non-empty");
    decode_chain(tape, &p.emb, &p.dec, &p.out, Some((&p.attn, &keys)), init, targets)
}

fn s2s_item<F: Scalar>(tape: &mut Tape<F>, p: &S2sParts, item: &TrainItem) -> LossNodes {
    let source = join_with_sep(&item.context);
    let d = s2s_decode(tape, p, &source, &item.targets);
    LossNodes { objective: d.nll, lm_nll: d.nll, n_tokens: d.n_tokens }
}

fn hs2s_item<F: Scalar>(tape: &mut Tape<F>, p: &Hs2sParts, item: &TrainItem) -> LossNodes {
    let mut sstate = p.sent.zero_state(tape);
    for sentence in &item.context {
        let vec = encode_tokens(tape, &p.emb, &p.word, sentence).last().unwrap().h;
        sstate = p.sent.step(tape, vec, sstate);
    }
    let d = decode_chain(tape, &p.emb, &p.dec, &p.out, None, sstate, &item.targets);
    LossNodes { objective: d.nll, lm_nll: d.nll, n_tokens: d.n_tokens }
}

fn flow_disc_item<F: Scalar>(
    tape: &mut Tape<F>,
    p: &FlowDiscParts,
    alpha: f64,
    item: &TrainItem,
) -> LossNodes {
    let labels = item.labels.as_ref().expect("validated upstream");
    let mut lm: Option<Var> = None;
    let mut crf_terms = Vec::new();
    let mut n_tokens = 0;
    let mut source = &item.context[0];
    for (sentence, seq) in item.targets.iter().zip(labels) {
        let d = s2s_decode(tape, &p.s2s, source, std::slice::from_ref(sentence));
        n_tokens += d.n_tokens;
        lm = Some(match lm {
            Some(acc) => tape.add(acc, d.nll),
            None => d.nll,
        });
        // Zero weight keeps the tape identical to the plain seq2seq chain.
        if alpha != 0.0 {
            crf_terms.push(tape.crf_nll(
                &d.states[0],
                seq,
                p.crf.w,
                p.crf.b,
                p.crf.unary,
                p.crf.n_labels,
            ));
        }
        source = sentence;
    }
    let lm_nll = lm.expect("at least one target");
    let objective = if crf_terms.is_empty() {
        lm_nll
    } else {
        let total = tape.add_many(&crf_terms);
        let scaled = tape.scale(total, F::c(alpha));
        tape.add(lm_nll, scaled)
    };
    LossNodes { objective, lm_nll, n_tokens }
}

fn flow_delta_item<F: Scalar>(
    tape: &mut Tape<F>,
    p: &FlowDeltaParts,
    item: &TrainItem,
) -> LossNodes {
    let mut s_state = LstmState { h: tape.param(p.init_s_h), c: tape.param(p.init_s_c) };
    let mut d_state = LstmState { h: tape.param(p.init_d_h), c: tape.param(p.init_d_c) };
    let mut prev_vec: Option<Var> = None;
    let mut losses = Vec::new();
    for (idx, sentence) in item.targets.iter().enumerate() {
        let s_cond = s_state.h;
        let d_cond = d_state.h;
        let mut dstate = p.dec.zero_state(tape);
        let mut prev = BOS;
        for &tok in sentence.iter().chain(std::iter::once(&EOS)) {
            let x = p.emb.lookup(tape, prev);
            let input = tape.concat(&[x, s_cond, d_cond]);
            dstate = p.dec.step(tape, input, dstate);
            let logits = p.out.logits(tape, dstate.h);
            losses.push(tape.cross_entropy(logits, tok));
            prev = tok;
        }
        // The final sentence's vector would feed nothing downstream.
        if idx + 1 < item.targets.len() {
            let s_vec = encode_tokens(tape, &p.emb, &p.word, sentence).last().unwrap().h;
            s_state = p.sent.step(tape, s_vec, s_state);
            if let Some(pv) = prev_vec {
                let delta = p.delta.apply(tape, pv, s_vec);
                d_state = p.delta_enc.step(tape, delta, d_state);
            }
            prev_vec = Some(s_vec);
        }
    }
    let n_tokens = losses.len();
    let nll = tape.add_many(&losses);
    LossNodes { objective: nll, lm_nll: nll, n_tokens }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::config::ModelConfig;
    use crate::seqmodel::gradcheck::DEFAULT_EPSILON;

    const V: usize = 11;

    fn tiny(variant: Variant) -> Model<f64> {
        let config = ModelConfig {
            variant,
            embed: 4,
            hidden: 3,
            vocab: V,
            seed: 11,
            alpha: 0.5,
            ..ModelConfig::default()
        };
        Model::new(config, V, 3, None).unwrap()
    }

    fn item_for(variant: Variant) -> TrainItem {
        let (s0, s1, s2, s3) =
            (vec![6, 7], vec![8, 9, 6], vec![7, 10], vec![9, 8]);
        match variant {
            Variant::S2s | Variant::Hs2s => TrainItem {
                context: vec![s0, s3],
                targets: vec![s1, s2],
                labels: None,
            },
            Variant::FlowDisc => TrainItem {
                context: vec![s0],
                targets: vec![s1.clone(), s2.clone(), s3],
                labels: Some(vec![vec![0; s1.len()], vec![2; s2.len()], vec![1; 2]]),
            },
            Variant::FlowDelta => TrainItem {
                context: vec![],
                targets: vec![s0, s1, s2, s3],
                labels: None,
            },
        }
    }

    #[test]
    fn zeroed_output_layer_gives_uniform_token_loss() {
        for variant in Variant::ALL {
            let mut model = tiny(variant);
            for name in ["out.w", "out.b"] {
                let id = model.store.id(name);
                model.store.data_mut(id).fill(0.0);
            }
            let item = item_for(variant);
            let (tape, nodes) = model.paragraph_loss(&item).unwrap();
            let per_token = tape.value(nodes.lm_nll)[0] / nodes.n_tokens as f64;
            assert!(
                (per_token - (V as f64).ln()).abs() < 1e-12,
                "{variant}: {per_token}"
            );
        }
    }

    #[test]
    fn token_count_includes_sentence_final_eos() {
        let mut model = tiny(Variant::S2s);
        let item = item_for(Variant::S2s);
        let (_, nodes) = model.paragraph_loss(&item).unwrap();
        assert_eq!(nodes.n_tokens, 3 + 1 + 2 + 1);
    }

    #[test]
    fn zero_weight_tagging_chain_matches_pairwise_seq2seq_exactly() {
        let seed_cfg = |variant| ModelConfig {
            variant,
            embed: 4,
            hidden: 3,
            vocab: V,
            seed: 23,
            alpha: 0.0,
            ..ModelConfig::default()
        };
        let mut disc = Model::<f64>::new(seed_cfg(Variant::FlowDisc), V, 3, None).unwrap();
        let mut s2s = Model::<f64>::new(seed_cfg(Variant::S2s), V, 0, None).unwrap();

        let sentences = [vec![6, 7], vec![8, 9, 6], vec![7, 10], vec![9, 8]];
        let item = TrainItem {
            context: vec![sentences[0].clone()],
            targets: sentences[1..].to_vec(),
            labels: Some(sentences[1..].iter().map(|s| vec![0; s.len()]).collect()),
        };
        let (tape, nodes) = disc.paragraph_loss(&item).unwrap();
        let chained = tape.value(nodes.objective)[0];
        drop(tape);

        let mut total = 0.0;
        for pair in sentences.windows(2) {
            let item = TrainItem {
                context: vec![pair[0].clone()],
                targets: vec![pair[1].clone()],
                labels: None,
            };
            let (tape, nodes) = s2s.paragraph_loss(&item).unwrap();
            total += tape.value(nodes.objective)[0];
        }
        assert_eq!(chained, total, "bitwise identity at zero tagging weight");
    }

    #[test]
    fn positive_tagging_weight_moves_the_objective() {
        let mut model = tiny(Variant::FlowDisc);
        let item = item_for(Variant::FlowDisc);
        let (tape, nodes) = model.paragraph_loss(&item).unwrap();
        let objective = tape.value(nodes.objective)[0];
        let lm = tape.value(nodes.lm_nll)[0];
        assert!(objective > lm, "tagging penalty must be positive");
    }

    #[test]
    fn sentence_order_changes_the_paragraph_loss() {
        let mut model = tiny(Variant::FlowDelta);
        let forward = item_for(Variant::FlowDelta);
        let mut reversed = forward.clone();
        reversed.targets.reverse();
        let (tape, nodes) = model.paragraph_loss(&forward).unwrap();
        let a = tape.value(nodes.lm_nll)[0];
        drop(tape);
        let (tape, nodes) = model.paragraph_loss(&reversed).unwrap();
        let b = tape.value(nodes.lm_nll)[0];
        assert_ne!(a, b);
    }

    #[test]
    fn misaligned_labels_are_rejected() {
        let mut model = tiny(Variant::FlowDisc);
        let mut item = item_for(Variant::FlowDisc);
        item.labels.as_mut().unwrap()[1].pop();
        assert!(matches!(model.paragraph_loss(&item), Err(ModelError::Label(_))));

        let mut item = item_for(Variant::FlowDisc);
        item.labels = None;
        assert!(matches!(model.paragraph_loss(&item), Err(ModelError::Label(_))));

        let mut item = item_for(Variant::FlowDisc);
        item.labels.as_mut().unwrap()[0][0] = 99;
        assert!(matches!(model.paragraph_loss(&item), Err(ModelError::Label(_))));
    }

    #[test]
    fn empty_sentences_are_rejected() {
        let mut model = tiny(Variant::FlowDelta);
        let item = TrainItem { context: vec![], targets: vec![vec![6], vec![]], labels: None };
        assert!(matches!(model.paragraph_loss(&item), Err(ModelError::Config(_))));
    }

    #[test]
    fn gradients_match_finite_differences_for_every_variant() {
        for variant in Variant::ALL {
            let mut model = tiny(variant);
            let item = item_for(variant);
            let report = model.check_gradients(&item, DEFAULT_EPSILON).unwrap();
            assert!(
                report.max_rel_err < 1e-4,
                "{variant}: {} at {}",
                report.max_rel_err,
                report.worst_param
            );
        }
    }
}
