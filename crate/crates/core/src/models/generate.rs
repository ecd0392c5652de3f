//! Greedy middle-sentence generation from a paragraph's first and last
//! sentence.

use crate::corpus::{BOS, EOS, RESERVED};
use crate::models::losses::join_with_sep;
use crate::models::model::{Model, Parts};
use crate::models::ModelError;
use crate::scalar::Scalar;
use crate::seqmodel::cells::{encode_tokens, AttentionCell, Embedding, LstmCell, LstmState, OutputLayer};
use crate::seqmodel::{Tape, Var};

/// Bridging input: the surrounding sentences as vocabulary ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BridgeContext {
    pub first: Vec<usize>,
    pub last: Vec<usize>,
}

/// Greedily generates `n_sentences` middle sentences of at most `max_len`
/// tokens each. Control tokens other than EOS are never emitted, and EOS
/// only closes a sentence; outputs may be empty when EOS fires immediately.
pub fn generate_middles<F: Scalar>(
    model: &mut Model<F>,
    context: &BridgeContext,
    n_sentences: usize,
    max_len: usize,
) -> Result<Vec<Vec<usize>>, ModelError> {
    if context.first.is_empty() || context.last.is_empty() {
        return Err(ModelError::Config("bridging context sentences may not be empty".into()));
    }
    if max_len == 0 {
        return Err(ModelError::Config("max_len must be positive".into()));
    }
    if n_sentences == 0 {
        return Ok(Vec::new());
    }
    let parts = model.parts;
    let vocab_size = model.vocab_size;
    let mut tape = Tape::new(&mut model.store);
    let tape = &mut tape;
    let out = match parts {
        Parts::S2s(p) => {
            let source = join_with_sep(&[context.first.clone(), context.last.clone()]);
            let enc = encode_tokens(tape, &p.emb, &p.enc, &source);
            let keys: Vec<Var> = enc.iter().map(|s| s.h).collect();
            let init = *enc.last().unwrap();
            decode_greedy(
                tape,
                &p.emb,
                &p.dec,
                &p.out,
                Some((&p.attn, &keys)),
                &[],
                init,
                n_sentences,
                max_len,
                vocab_size,
            )
        }
        Parts::Hs2s(p) => {
            let mut sstate = p.sent.zero_state(tape);
            for sentence in [&context.first, &context.last] {
                let vec = encode_tokens(tape, &p.emb, &p.word, sentence).last().unwrap().h;
                sstate = p.sent.step(tape, vec, sstate);
            }
            decode_greedy(
                tape,
                &p.emb,
                &p.dec,
                &p.out,
                None,
                &[],
                sstate,
                n_sentences,
                max_len,
                vocab_size,
            )
        }
        Parts::FlowDisc(p) => {
            // Chain sentence to sentence, starting from the opener.
            let mut outputs = Vec::with_capacity(n_sentences);
            let mut source = context.first.clone();
            for _ in 0..n_sentences {
                let enc = encode_tokens(tape, &p.s2s.emb, &p.s2s.enc, &source);
                let keys: Vec<Var> = enc.iter().map(|s| s.h).collect();
                let init = *enc.last().unwrap();
                let sentence = decode_greedy(
                    tape,
                    &p.s2s.emb,
                    &p.s2s.dec,
                    &p.s2s.out,
                    Some((&p.s2s.attn, &keys)),
                    &[],
                    init,
                    1,
                    max_len,
                    vocab_size,
                )
                .pop()
                .unwrap();
                source = if sentence.is_empty() { vec![EOS] } else { sentence.clone() };
                outputs.push(sentence);
            }
            outputs
        }
        Parts::FlowDelta(p) => {
            let mut s_state =
                LstmState { h: tape.param(p.init_s_h), c: tape.param(p.init_s_c) };
            let mut d_state =
                LstmState { h: tape.param(p.init_d_h), c: tape.param(p.init_d_c) };
            let first_vec =
                encode_tokens(tape, &p.emb, &p.word, &context.first).last().unwrap().h;
            s_state = p.sent.step(tape, first_vec, s_state);
            let mut prev_vec = first_vec;
            let mut outputs = Vec::with_capacity(n_sentences);
            for k in 0..n_sentences {
                let conds = [s_state.h, d_state.h];
                let zero = p.dec.zero_state(tape);
                let sentence = decode_greedy(
                    tape,
                    &p.emb,
                    &p.dec,
                    &p.out,
                    None,
                    &conds,
                    zero,
                    1,
                    max_len,
                    vocab_size,
                )
                .pop()
                .unwrap();
                if k + 1 < n_sentences {
                    let ids = if sentence.is_empty() { vec![EOS] } else { sentence.clone() };
                    let s_vec = encode_tokens(tape, &p.emb, &p.word, &ids).last().unwrap().h;
                    s_state = p.sent.step(tape, s_vec, s_state);
                    let delta = p.delta.apply(tape, prev_vec, s_vec);
                    d_state = p.delta_enc.step(tape, delta, d_state);
                    prev_vec = s_vec;
                }
                outputs.push(sentence);
            }
            outputs
        }
    };
    Ok(out)
}

/// Argmax over emittable tokens: EOS plus everything non-reserved.
fn greedy_token<F: Scalar>(tape: &Tape<F>, logits: Var, vocab_size: usize) -> usize {
    let values = tape.value(logits);
    let mut best = EOS;
    let mut best_value = values[EOS];
    for (id, &value) in values.iter().enumerate().take(vocab_size).skip(RESERVED.len()) {
        if value > best_value {
            best = id;
            best_value = value;
        }
    }
    best
}

/// Decodes sentences one token at a time, carrying the recurrent state
/// across sentence boundaries exactly as teacher forcing does.
#[allow(clippy::too_many_arguments)]
fn decode_greedy<F: Scalar>(
    tape: &mut Tape<F>,
    emb: &Embedding,
    dec: &LstmCell,
    out: &OutputLayer,
    attn: Option<(&AttentionCell, &[Var])>,
    conds: &[Var],
    mut state: LstmState,
    n_sentences: usize,
    max_len: usize,
    vocab_size: usize,
) -> Vec<Vec<usize>> {
    let mut sentences = Vec::with_capacity(n_sentences);
    let mut prev = BOS;
    for _ in 0..n_sentences {
        let mut sentence = Vec::new();
        loop {
            let x = emb.lookup(tape, prev);
            let mut inputs = vec![x];
            if let Some((cell, keys)) = attn {
                let (ctx, _) = cell.context(tape, state.h, keys);
                inputs.push(ctx);
            }
            inputs.extend_from_slice(conds);
            let input = if inputs.len() == 1 { inputs[0] } else { tape.concat(&inputs) };
            state = dec.step(tape, input, state);
            let logits = out.logits(tape, state.h);
            let tok = greedy_token(tape, logits, vocab_size);
            if tok == EOS {
                prev = EOS;
                break;
            }
            sentence.push(tok);
            prev = tok;
            if sentence.len() == max_len {
                prev = EOS;
                break;
            }
        }
        sentences.push(sentence);
    }
    sentences
}
