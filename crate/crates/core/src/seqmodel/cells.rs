//! Embedding, gated-recurrence, additive-attention, and difference-vector
//! cells expressed as tape operations.

use crate::scalar::Scalar;
use crate::seqmodel::store::{Init, ParamId, ParamStore};
use crate::seqmodel::tape::{Tape, Var};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Default half-width for seeded uniform parameter initialization.
pub const INIT_SCALE: f64 = 0.1;

/// Token-id to vector lookup backed by a matrix parameter.
#[derive(Debug, Clone, Copy)]
pub struct Embedding {
    table: ParamId,
    pub vocab_size: usize,
    pub dim: usize,
}

impl Embedding {
    pub fn new<F: Scalar>(
        store: &mut ParamStore<F>,
        name: &str,
        vocab_size: usize,
        dim: usize,
    ) -> Embedding {
        let table = store.add(name, &[vocab_size, dim], Init::Uniform(-INIT_SCALE, INIT_SCALE));
        Embedding { table, vocab_size, dim }
    }

    /// Builds the table from preset rows (e.g. pretrained vectors).
    pub fn from_rows<F: Scalar>(
        store: &mut ParamStore<F>,
        name: &str,
        vocab_size: usize,
        dim: usize,
        rows: Vec<F>,
    ) -> Embedding {
        let table = store.add(name, &[vocab_size, dim], Init::Given(rows));
        Embedding { table, vocab_size, dim }
    }

    pub fn lookup<F: Scalar>(&self, tape: &mut Tape<F>, token: usize) -> Var {
        assert!(token < self.vocab_size, "token id {token} outside vocabulary");
        tape.row(self.table, token)
    }

    pub fn param_id(&self) -> ParamId {
        self.table
    }
}

/// Hidden and cell state of one recurrence step.
#[derive(Debug, Clone, Copy)]
pub struct LstmState {
    pub h: Var,
    pub c: Var,
}

/// Single-layer gated recurrent cell with input, forget, candidate, and
/// output gates (packed in that order).
#[derive(Debug, Clone, Copy)]
pub struct LstmCell {
    pub input_dim: usize,
    pub hidden: usize,
    w_x: ParamId,
    w_h: ParamId,
    b: ParamId,
}

impl LstmCell {
    pub fn new<F: Scalar>(
        store: &mut ParamStore<F>,
        name: &str,
        input_dim: usize,
        hidden: usize,
    ) -> LstmCell {
        let u = Init::Uniform(-INIT_SCALE, INIT_SCALE);
        let w_x = store.add(&format!("{name}.w_x"), &[4 * hidden, input_dim], u);
        let u = Init::Uniform(-INIT_SCALE, INIT_SCALE);
        let w_h = store.add(&format!("{name}.w_h"), &[4 * hidden, hidden], u);
        let b = store.add(&format!("{name}.b"), &[4 * hidden], Init::Zeros);
        LstmCell { input_dim, hidden, w_x, w_h, b }
    }

    pub fn zero_state<F: Scalar>(&self, tape: &mut Tape<F>) -> LstmState {
        LstmState { h: tape.zeros(self.hidden), c: tape.zeros(self.hidden) }
    }

    /// One recurrence step over input `x`.
    pub fn step<F: Scalar>(&self, tape: &mut Tape<F>, x: Var, state: LstmState) -> LstmState {
        assert_eq!(tape.value(x).len(), self.input_dim, "cell input width mismatch");
        let zx = tape.matvec(self.w_x, x);
        let zh = tape.matvec(self.w_h, state.h);
        let bias = tape.param(self.b);
        let z = tape.add_many(&[zx, zh, bias]);
        let n = self.hidden;
        let zi = tape.slice(z, 0, n);
        let zf = tape.slice(z, n, n);
        let zg = tape.slice(z, 2 * n, n);
        let zo = tape.slice(z, 3 * n, n);
        let i = tape.sigmoid(zi);
        let f = tape.sigmoid(zf);
        let g = tape.tanh(zg);
        let o = tape.sigmoid(zo);
        let fc = tape.mul(f, state.c);
        let ig = tape.mul(i, g);
        let c = tape.add(fc, ig);
        let ct = tape.tanh(c);
        let h = tape.mul(o, ct);
        LstmState { h, c }
    }
}

/// Runs a recurrence over a token sequence; the last hidden state is the
/// sentence vector. Panics on an empty token list.
pub fn encode_tokens<F: Scalar>(
    tape: &mut Tape<F>,
    embedding: &Embedding,
    cell: &LstmCell,
    tokens: &[usize],
) -> Vec<LstmState> {
    assert!(!tokens.is_empty(), "cannot encode an empty token sequence");
    let mut state = cell.zero_state(tape);
    let mut states = Vec::with_capacity(tokens.len());
    for &token in tokens {
        let x = embedding.lookup(tape, token);
        state = cell.step(tape, x, state);
        states.push(state);
    }
    states
}

/// Additive attention: score(q, k) = v . tanh(Wq q + Wk k).
#[derive(Debug, Clone, Copy)]
pub struct AttentionCell {
    wq: ParamId,
    wk: ParamId,
    v: ParamId,
}

impl AttentionCell {
    pub fn new<F: Scalar>(
        store: &mut ParamStore<F>,
        name: &str,
        query_dim: usize,
        key_dim: usize,
        attn_dim: usize,
    ) -> AttentionCell {
        let u = Init::Uniform(-INIT_SCALE, INIT_SCALE);
        let wq = store.add(&format!("{name}.wq"), &[attn_dim, query_dim], u);
        let u = Init::Uniform(-INIT_SCALE, INIT_SCALE);
        let wk = store.add(&format!("{name}.wk"), &[attn_dim, key_dim], u);
        let u = Init::Uniform(-INIT_SCALE, INIT_SCALE);
        let v = store.add(&format!("{name}.v"), &[attn_dim], u);
        AttentionCell { wq, wk, v }
    }

    /// Softmax-normalized mixture of `keys` given `query`; returns the
    /// context vector and the weights. Panics when `keys` is empty.
    pub fn context<F: Scalar>(
        &self,
        tape: &mut Tape<F>,
        query: Var,
        keys: &[Var],
    ) -> (Var, Var) {
        assert!(!keys.is_empty(), "attention needs at least one key");
        let q = tape.matvec(self.wq, query);
        let v = tape.param(self.v);
        let mut scores = Vec::with_capacity(keys.len());
        for &key in keys {
            let k = tape.matvec(self.wk, key);
            let sum = tape.add(q, k);
            let act = tape.tanh(sum);
            scores.push(tape.dot(v, act));
        }
        let score_vec = tape.concat(&scores);
        let weights = tape.softmax(score_vec);
        let context = tape.weighted_sum(weights, keys);
        (context, weights)
    }
}

/// How consecutive sentence vectors combine into a difference vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaKind {
    Subtract,
    Add,
    Mlp,
}

impl DeltaKind {
    pub const ALL: [DeltaKind; 3] = [DeltaKind::Subtract, DeltaKind::Add, DeltaKind::Mlp];

    pub fn as_str(&self) -> &'static str {
        match self {
            DeltaKind::Subtract => "subtract",
            DeltaKind::Add => "add",
            DeltaKind::Mlp => "mlp",
        }
    }
}

impl fmt::Display for DeltaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeltaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<DeltaKind, String> {
        match s {
            "subtract" => Ok(DeltaKind::Subtract),
            "add" => Ok(DeltaKind::Add),
            "mlp" => Ok(DeltaKind::Mlp),
            other => Err(format!("unknown delta kind {other:?}")),
        }
    }
}

/// Combines the previous and current sentence vectors into a delta vector.
#[derive(Debug, Clone, Copy)]
pub struct DeltaOp {
    pub kind: DeltaKind,
    pub dim: usize,
    mlp_w: Option<ParamId>,
    mlp_b: Option<ParamId>,
}

impl DeltaOp {
    pub fn new<F: Scalar>(
        store: &mut ParamStore<F>,
        name: &str,
        kind: DeltaKind,
        dim: usize,
    ) -> DeltaOp {
        let (mlp_w, mlp_b) = if kind == DeltaKind::Mlp {
            let u = Init::Uniform(-INIT_SCALE, INIT_SCALE);
            let w = store.add(&format!("{name}.w"), &[dim, 2 * dim], u);
            let b = store.add(&format!("{name}.b"), &[dim], Init::Zeros);
            (Some(w), Some(b))
        } else {
            (None, None)
        };
        DeltaOp { kind, dim, mlp_w, mlp_b }
    }

    /// Delta vector for the step from `prev` to `cur`.
    pub fn apply<F: Scalar>(&self, tape: &mut Tape<F>, prev: Var, cur: Var) -> Var {
        assert_eq!(tape.value(prev).len(), self.dim, "delta input width mismatch");
        assert_eq!(tape.value(cur).len(), self.dim, "delta input width mismatch");
        match self.kind {
            DeltaKind::Subtract => tape.sub(cur, prev),
            DeltaKind::Add => tape.add(cur, prev),
            DeltaKind::Mlp => {
                let cat = tape.concat(&[prev, cur]);
                let z = tape.matvec(self.mlp_w.expect("mlp delta has weights"), cat);
                let b = tape.param(self.mlp_b.expect("mlp delta has bias"));
                let zb = tape.add(z, b);
                tape.tanh(zb)
            }
        }
    }
}

/// Linear map from a hidden state to vocabulary logits.
#[derive(Debug, Clone, Copy)]
pub struct OutputLayer {
    w: ParamId,
    b: ParamId,
    pub vocab_size: usize,
}

impl OutputLayer {
    pub fn new<F: Scalar>(
        store: &mut ParamStore<F>,
        name: &str,
        hidden: usize,
        vocab_size: usize,
    ) -> OutputLayer {
        let u = Init::Uniform(-INIT_SCALE, INIT_SCALE);
        let w = store.add(&format!("{name}.w"), &[vocab_size, hidden], u);
        let b = store.add(&format!("{name}.b"), &[vocab_size], Init::Zeros);
        OutputLayer { w, b, vocab_size }
    }

    pub fn logits<F: Scalar>(&self, tape: &mut Tape<F>, h: Var) -> Var {
        let z = tape.matvec(self.w, h);
        let b = tape.param(self.b);
        tape.add(z, b)
    }
}
