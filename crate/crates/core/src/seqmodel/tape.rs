//! Reverse-mode automatic differentiation over vector-valued nodes.
//!
//! A [`Tape`] borrows a [`ParamStore`] for its lifetime. Operations compute
//! their outputs eagerly as nodes are added; [`Tape::backward`] walks the
//! nodes in reverse and accumulates parameter gradients into the store.

use crate::crf;
use crate::scalar::Scalar;
use crate::seqmodel::store::{ParamId, ParamStore};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

enum Op<F> {
    /// Leaf with no gradient.
    Const,
    /// Whole parameter tensor viewed as a flat vector.
    Param(ParamId),
    /// One row of a matrix-shaped parameter.
    Row(ParamId, usize),
    /// Product of a parameter matrix with a vector node.
    MatVec { w: ParamId, x: Var },
    Add(Var, Var),
    AddMany(Vec<Var>),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, F),
    Concat(Vec<Var>),
    Slice { x: Var, start: usize },
    Tanh(Var),
    Sigmoid(Var),
    Softmax(Var),
    Dot(Var, Var),
    /// Sum of item vectors weighted by the entries of `weights`.
    WeightedSum { weights: Var, items: Vec<Var> },
    /// Negative log-likelihood of `target` under a softmax of the logits.
    CrossEntropy { logits: Var, target: usize },
    /// Sequence negative log-likelihood from the chain-structured tagger.
    CrfNll {
        states: Vec<Var>,
        labels: Vec<usize>,
        w: ParamId,
        b: ParamId,
        unary: Option<ParamId>,
        n_labels: usize,
    },
}

struct Node<F> {
    op: Op<F>,
    value: Vec<F>,
}

pub struct Tape<'s, F: Scalar> {
    store: &'s mut ParamStore<F>,
    nodes: Vec<Node<F>>,
}

impl<'s, F: Scalar> Tape<'s, F> {
    pub fn new(store: &'s mut ParamStore<F>) -> Tape<'s, F> {
        Tape { store, nodes: Vec::new() }
    }

    pub fn store(&self) -> &ParamStore<F> {
        self.store
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn value(&self, v: Var) -> &[F] {
        &self.nodes[v.0].value
    }

    /// Value of a single-element node.
    pub fn scalar(&self, v: Var) -> F {
        let value = &self.nodes[v.0].value;
        assert_eq!(value.len(), 1, "node is not a scalar");
        value[0]
    }

    fn push(&mut self, op: Op<F>, value: Vec<F>) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    // ---- node constructors -------------------------------------------------

    pub fn constant(&mut self, value: Vec<F>) -> Var {
        self.push(Op::Const, value)
    }

    pub fn zeros(&mut self, n: usize) -> Var {
        self.push(Op::Const, vec![F::zero(); n])
    }

    /// Whole parameter tensor as a flat vector; intended for small tensors.
    pub fn param(&mut self, id: ParamId) -> Var {
        let value = self.store.data(id).to_vec();
        self.push(Op::Param(id), value)
    }

    /// Row `row` of a matrix-shaped parameter (an embedding lookup).
    pub fn row(&mut self, id: ParamId, row: usize) -> Var {
        let shape = self.store.shape(id);
        assert_eq!(shape.len(), 2, "row lookup needs a matrix parameter");
        let cols = shape[1];
        assert!(row < shape[0], "row {row} out of range for {:?}", shape);
        let value = self.store.data(id)[row * cols..(row + 1) * cols].to_vec();
        self.push(Op::Row(id, row), value)
    }

    /// y = W x for a matrix-shaped parameter W.
    pub fn matvec(&mut self, w: ParamId, x: Var) -> Var {
        let shape = self.store.shape(w);
        assert_eq!(shape.len(), 2, "matvec needs a matrix parameter");
        let (rows, cols) = (shape[0], shape[1]);
        let xv = &self.nodes[x.0].value;
        assert_eq!(xv.len(), cols, "matvec input length mismatch");
        let data = self.store.data(w);
        let mut y = vec![F::zero(); rows];
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &data[i * cols..(i + 1) * cols];
            let mut acc = F::zero();
            for (a, b) in row.iter().zip(xv) {
                acc += *a * *b;
            }
            *yi = acc;
        }
        self.push(Op::MatVec { w, x }, y)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(av.len(), bv.len(), "add length mismatch");
        let y: Vec<F> = av.iter().zip(bv).map(|(&x, &z)| x + z).collect();
        self.push(Op::Add(a, b), y)
    }

    pub fn add_many(&mut self, xs: &[Var]) -> Var {
        assert!(!xs.is_empty(), "add_many needs at least one input");
        let n = self.nodes[xs[0].0].value.len();
        let mut y = vec![F::zero(); n];
        for &x in xs {
            let xv = &self.nodes[x.0].value;
            assert_eq!(xv.len(), n, "add_many length mismatch");
            for (yi, &xi) in y.iter_mut().zip(xv) {
                *yi += xi;
            }
        }
        self.push(Op::AddMany(xs.to_vec()), y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(av.len(), bv.len(), "sub length mismatch");
        let y: Vec<F> = av.iter().zip(bv).map(|(&x, &z)| x - z).collect();
        self.push(Op::Sub(a, b), y)
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(av.len(), bv.len(), "mul length mismatch");
        let y: Vec<F> = av.iter().zip(bv).map(|(&x, &z)| x * z).collect();
        self.push(Op::Mul(a, b), y)
    }

    pub fn scale(&mut self, x: Var, c: F) -> Var {
        let y: Vec<F> = self.nodes[x.0].value.iter().map(|&v| v * c).collect();
        self.push(Op::Scale(x, c), y)
    }

    pub fn concat(&mut self, xs: &[Var]) -> Var {
        assert!(!xs.is_empty(), "concat needs at least one input");
        let mut y = Vec::new();
        for &x in xs {
            y.extend_from_slice(&self.nodes[x.0].value);
        }
        self.push(Op::Concat(xs.to_vec()), y)
    }

    pub fn slice(&mut self, x: Var, start: usize, len: usize) -> Var {
        let xv = &self.nodes[x.0].value;
        assert!(start + len <= xv.len(), "slice out of range");
        let y = xv[start..start + len].to_vec();
        self.push(Op::Slice { x, start }, y)
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let y: Vec<F> = self.nodes[x.0].value.iter().map(|v| v.tanh()).collect();
        self.push(Op::Tanh(x), y)
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let one = F::one();
        let y: Vec<F> = self.nodes[x.0].value.iter().map(|&v| one / (one + (-v).exp())).collect();
        self.push(Op::Sigmoid(x), y)
    }

    pub fn softmax(&mut self, x: Var) -> Var {
        let xv = &self.nodes[x.0].value;
        assert!(!xv.is_empty(), "softmax of an empty vector");
        let y = softmax_values(xv);
        self.push(Op::Softmax(x), y)
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(av.len(), bv.len(), "dot length mismatch");
        let mut acc = F::zero();
        for (x, z) in av.iter().zip(bv) {
            acc += *x * *z;
        }
        self.push(Op::Dot(a, b), vec![acc])
    }

    /// y = sum_i weights[i] * items[i], all items the same length.
    pub fn weighted_sum(&mut self, weights: Var, items: &[Var]) -> Var {
        let wv = &self.nodes[weights.0].value;
        assert_eq!(wv.len(), items.len(), "one weight per item required");
        assert!(!items.is_empty(), "weighted_sum needs at least one item");
        let n = self.nodes[items[0].0].value.len();
        let mut y = vec![F::zero(); n];
        for (i, &item) in items.iter().enumerate() {
            let iv = &self.nodes[item.0].value;
            assert_eq!(iv.len(), n, "weighted_sum item length mismatch");
            let w = self.nodes[weights.0].value[i];
            for (yi, &vi) in y.iter_mut().zip(iv) {
                *yi += w * vi;
            }
        }
        self.push(Op::WeightedSum { weights, items: items.to_vec() }, y)
    }

    /// Scalar negative log-likelihood of `target` under softmax(logits).
    pub fn cross_entropy(&mut self, logits: Var, target: usize) -> Var {
        let z = &self.nodes[logits.0].value;
        assert!(target < z.len(), "cross-entropy target out of range");
        let lse = log_sum_exp(z);
        let loss = lse - z[target];
        self.push(Op::CrossEntropy { logits, target }, vec![loss])
    }

    /// Scalar chain-tagger negative log-likelihood over per-position states.
    pub fn crf_nll(
        &mut self,
        states: &[Var],
        labels: &[usize],
        w: ParamId,
        b: ParamId,
        unary: Option<ParamId>,
        n_labels: usize,
    ) -> Var {
        let state_values: Vec<&[F]> =
            states.iter().map(|&s| self.nodes[s.0].value.as_slice()).collect();
        let loss = crf::nll(
            &state_values,
            labels,
            n_labels,
            self.store.data(w),
            self.store.data(b),
            unary.map(|u| self.store.data(u)),
        )
        .expect("invalid tagger inputs");
        self.push(
            Op::CrfNll { states: states.to_vec(), labels: labels.to_vec(), w, b, unary, n_labels },
            vec![loss],
        )
    }

    // ---- backward ----------------------------------------------------------

    /// Accumulates d`loss`/d(param) into the store for every parameter used.
    ///
    /// `loss` must be a scalar node. Existing store gradients are added to,
    /// so batch members can share a store across consecutive tapes.
    pub fn backward(&mut self, loss: Var) {
        assert_eq!(self.nodes[loss.0].value.len(), 1, "loss must be a scalar node");
        let mut grads: Vec<Vec<F>> = Vec::with_capacity(loss.0 + 1);
        for node in &self.nodes[..=loss.0] {
            grads.push(vec![F::zero(); node.value.len()]);
        }
        let mut live = vec![false; loss.0 + 1];
        grads[loss.0][0] = F::one();
        live[loss.0] = true;

        let store = &mut *self.store;
        let nodes = &self.nodes;
        for i in (0..=loss.0).rev() {
            if !live[i] {
                continue;
            }
            let g = std::mem::take(&mut grads[i]);
            let send = |var: Var, grads: &mut Vec<Vec<F>>, live: &mut Vec<bool>, add: &dyn Fn(&mut [F])| {
                add(&mut grads[var.0]);
                live[var.0] = true;
            };
            match &nodes[i].op {
                Op::Const => {}
                Op::Param(id) => {
                    axpy(store.grad_mut(*id), F::one(), &g);
                }
                Op::Row(id, row) => {
                    let cols = store.shape(*id)[1];
                    let slice = &mut store.grad_mut(*id)[row * cols..(row + 1) * cols];
                    axpy(slice, F::one(), &g);
                }
                Op::MatVec { w, x } => {
                    let cols = store.shape(*w)[1];
                    let xv = &nodes[x.0].value;
                    {
                        let gw = store.grad_mut(*w);
                        for (r, &gi) in g.iter().enumerate() {
                            axpy(&mut gw[r * cols..(r + 1) * cols], gi, xv);
                        }
                    }
                    let data = store.data(*w);
                    send(*x, &mut grads, &mut live, &|dst| {
                        for (r, &gi) in g.iter().enumerate() {
                            axpy(dst, gi, &data[r * cols..(r + 1) * cols]);
                        }
                    });
                }
                Op::Add(a, b) => {
                    send(*a, &mut grads, &mut live, &|dst| axpy(dst, F::one(), &g));
                    send(*b, &mut grads, &mut live, &|dst| axpy(dst, F::one(), &g));
                }
                Op::AddMany(xs) => {
                    for &x in xs {
                        send(x, &mut grads, &mut live, &|dst| axpy(dst, F::one(), &g));
                    }
                }
                Op::Sub(a, b) => {
                    send(*a, &mut grads, &mut live, &|dst| axpy(dst, F::one(), &g));
                    send(*b, &mut grads, &mut live, &|dst| axpy(dst, -F::one(), &g));
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (&nodes[a.0].value, &nodes[b.0].value);
                    send(*a, &mut grads, &mut live, &|dst| {
                        for ((d, &gi), &bi) in dst.iter_mut().zip(&g).zip(bv) {
                            *d += gi * bi;
                        }
                    });
                    send(*b, &mut grads, &mut live, &|dst| {
                        for ((d, &gi), &ai) in dst.iter_mut().zip(&g).zip(av) {
                            *d += gi * ai;
                        }
                    });
                }
                Op::Scale(x, c) => {
                    let c = *c;
                    send(*x, &mut grads, &mut live, &|dst| axpy(dst, c, &g));
                }
                Op::Concat(xs) => {
                    let mut offset = 0;
                    for &x in xs {
                        let len = nodes[x.0].value.len();
                        let piece = &g[offset..offset + len];
                        send(x, &mut grads, &mut live, &|dst| axpy(dst, F::one(), piece));
                        offset += len;
                    }
                }
                Op::Slice { x, start } => {
                    let start = *start;
                    let len = g.len();
                    send(*x, &mut grads, &mut live, &|dst| {
                        axpy(&mut dst[start..start + len], F::one(), &g)
                    });
                }
                Op::Tanh(x) => {
                    let y = &nodes[i].value;
                    send(*x, &mut grads, &mut live, &|dst| {
                        for ((d, &gi), &yi) in dst.iter_mut().zip(&g).zip(y) {
                            *d += gi * (F::one() - yi * yi);
                        }
                    });
                }
                Op::Sigmoid(x) => {
                    let y = &nodes[i].value;
                    send(*x, &mut grads, &mut live, &|dst| {
                        for ((d, &gi), &yi) in dst.iter_mut().zip(&g).zip(y) {
                            *d += gi * yi * (F::one() - yi);
                        }
                    });
                }
                Op::Softmax(x) => {
                    let y = &nodes[i].value;
                    let mut inner = F::zero();
                    for (&gi, &yi) in g.iter().zip(y) {
                        inner += gi * yi;
                    }
                    send(*x, &mut grads, &mut live, &|dst| {
                        for ((d, &gi), &yi) in dst.iter_mut().zip(&g).zip(y) {
                            *d += yi * (gi - inner);
                        }
                    });
                }
                Op::Dot(a, b) => {
                    let gi = g[0];
                    let (av, bv) = (&nodes[a.0].value, &nodes[b.0].value);
                    send(*a, &mut grads, &mut live, &|dst| axpy(dst, gi, bv));
                    send(*b, &mut grads, &mut live, &|dst| axpy(dst, gi, av));
                }
                Op::WeightedSum { weights, items } => {
                    let wv = &nodes[weights.0].value;
                    send(*weights, &mut grads, &mut live, &|dst| {
                        for (k, d) in dst.iter_mut().enumerate() {
                            let iv = &nodes[items[k].0].value;
                            let mut acc = F::zero();
                            for (&gi, &vi) in g.iter().zip(iv) {
                                acc += gi * vi;
                            }
                            *d += acc;
                        }
                    });
                    for (k, &item) in items.iter().enumerate() {
                        let wk = wv[k];
                        send(item, &mut grads, &mut live, &|dst| axpy(dst, wk, &g));
                    }
                }
                Op::CrossEntropy { logits, target } => {
                    let gi = g[0];
                    let target = *target;
                    let probs = softmax_values(&nodes[logits.0].value);
                    send(*logits, &mut grads, &mut live, &|dst| {
                        for (k, (d, &pk)) in dst.iter_mut().zip(&probs).enumerate() {
                            let indicator = if k == target { F::one() } else { F::zero() };
                            *d += gi * (pk - indicator);
                        }
                    });
                }
                Op::CrfNll { states, labels, w, b, unary, n_labels } => {
                    let gi = g[0];
                    let state_values: Vec<&[F]> =
                        states.iter().map(|&s| nodes[s.0].value.as_slice()).collect();
                    let out = crf::nll_with_grad(
                        &state_values,
                        labels,
                        *n_labels,
                        store.data(*w),
                        store.data(*b),
                        unary.map(|u| store.data(u)),
                    )
                    .expect("invalid tagger inputs");
                    for (&s, ds) in states.iter().zip(&out.d_states) {
                        send(s, &mut grads, &mut live, &|dst| axpy(dst, gi, ds));
                    }
                    axpy(store.grad_mut(*w), gi, &out.d_w);
                    axpy(store.grad_mut(*b), gi, &out.d_b);
                    if let (Some(u), Some(du)) = (unary, out.d_unary.as_ref()) {
                        axpy(store.grad_mut(*u), gi, du);
                    }
                }
            }
        }
    }
}

/// dst += c * src, elementwise.
fn axpy<F: Scalar>(dst: &mut [F], c: F, src: &[F]) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += c * s;
    }
}

fn softmax_values<F: Scalar>(z: &[F]) -> Vec<F> {
    let lse = log_sum_exp(z);
    z.iter().map(|&v| (v - lse).exp()).collect()
}

/// Max-shifted log of the sum of exponentials.
fn log_sum_exp<F: Scalar>(z: &[F]) -> F {
    let m = z.iter().cloned().fold(F::neg_infinity(), F::max);
    if m == F::neg_infinity() {
        return F::neg_infinity();
    }
    let sum: F = z.iter().map(|&v| (v - m).exp()).sum();
    m + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crf::CrfParams;
    use crate::seqmodel::store::Init;

    fn store_with(values: &[(&str, &[usize], Vec<f64>)]) -> ParamStore<f64> {
        let mut store = ParamStore::new(0);
        for (name, shape, data) in values {
            store.add(name, shape, Init::Given(data.clone()));
        }
        store
    }

    #[test]
    fn matvec_forward_matches_by_hand() {
        let mut store = store_with(&[("w", &[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0])]);
        let w = store.id("w");
        let mut tape = Tape::new(&mut store);
        let x = tape.constant(vec![1.0, 0.0, -1.0]);
        let y = tape.matvec(w, x);
        assert_eq!(tape.value(y), &[-2.0, -2.0]);
    }

    #[test]
    fn backward_through_affine_chain() {
        // loss = dot(w2, tanh(W1 x)); checked against hand derivatives.
        let mut store = store_with(&[
            ("w1", &[2, 2], vec![0.5, -0.25, 0.1, 0.3]),
            ("w2", &[2], vec![1.0, -2.0]),
        ]);
        let (w1, w2) = (store.id("w1"), store.id("w2"));
        let mut tape = Tape::new(&mut store);
        let x = tape.constant(vec![0.7, -0.2]);
        let h = tape.matvec(w1, x);
        let t = tape.tanh(h);
        let v = tape.param(w2);
        let loss = tape.dot(v, t);
        tape.backward(loss);

        let h0: f64 = 0.5 * 0.7 + -0.25 * -0.2;
        let h1: f64 = 0.1 * 0.7 + 0.3 * -0.2;
        let (t0, t1) = (h0.tanh(), h1.tanh());
        // d loss / d w2 = tanh(W1 x)
        assert!((store.grad(w2)[0] - t0).abs() < 1e-12);
        assert!((store.grad(w2)[1] - t1).abs() < 1e-12);
        // d loss / d w1[0][j] = w2[0] * (1 - t0^2) * x[j]
        let d00 = 1.0 * (1.0 - t0 * t0) * 0.7;
        let d11 = -2.0 * (1.0 - t1 * t1) * -0.2;
        assert!((store.grad(w1)[0] - d00).abs() < 1e-12);
        assert!((store.grad(w1)[3] - d11).abs() < 1e-12);
    }

    #[test]
    fn softmax_rows_sum_to_one_and_backward_is_zero_under_constant_upstream() {
        let mut store = ParamStore::<f64>::new(0);
        let p = store.add("p", &[3], Init::Given(vec![0.2, -1.0, 0.5]));
        let mut tape = Tape::new(&mut store);
        let x = tape.param(p);
        let s = tape.softmax(x);
        let total: f64 = tape.value(s).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Upstream of all-ones: softmax grad is y * (1 - sum(y)) = 0.
        let ones = tape.constant(vec![1.0; 3]);
        let loss = tape.dot(ones, s);
        tape.backward(loss);
        for &gr in store.grad(p) {
            assert!(gr.abs() < 1e-12);
        }
    }

    #[test]
    fn cross_entropy_matches_log_softmax() {
        let mut store = ParamStore::<f64>::new(0);
        let p = store.add("p", &[3], Init::Given(vec![1.0, 2.0, 3.0]));
        let mut tape = Tape::new(&mut store);
        let z = tape.param(p);
        let loss = tape.cross_entropy(z, 1);
        let lse = (1f64.exp() + 2f64.exp() + 3f64.exp()).ln();
        assert!((tape.scalar(loss) - (lse - 2.0)).abs() < 1e-12);
        tape.backward(loss);
        let p1 = (2.0 - lse).exp();
        assert!((store.grad(p)[1] - (p1 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn slice_and_concat_roundtrip_gradients() {
        let mut store = ParamStore::<f64>::new(0);
        let p = store.add("p", &[4], Init::Given(vec![1.0, 2.0, 3.0, 4.0]));
        let mut tape = Tape::new(&mut store);
        let x = tape.param(p);
        let a = tape.slice(x, 0, 2);
        let b = tape.slice(x, 2, 2);
        let y = tape.concat(&[b, a]);
        assert_eq!(tape.value(y), &[3.0, 4.0, 1.0, 2.0]);
        let wts = tape.constant(vec![1.0, 10.0, 100.0, 1000.0]);
        let loss = tape.dot(wts, y);
        tape.backward(loss);
        assert_eq!(store.grad(p), &[100.0, 1000.0, 1.0, 10.0]);
    }

    #[test]
    fn weighted_sum_matches_manual_expansion() {
        let mut store = ParamStore::<f64>::new(0);
        let p = store.add("p", &[2], Init::Given(vec![0.25, 0.75]));
        let mut tape = Tape::new(&mut store);
        let w = tape.param(p);
        let i0 = tape.constant(vec![1.0, 0.0]);
        let i1 = tape.constant(vec![0.0, 2.0]);
        let y = tape.weighted_sum(w, &[i0, i1]);
        assert_eq!(tape.value(y), &[0.25, 1.5]);
        let sel = tape.constant(vec![0.0, 1.0]);
        let loss = tape.dot(sel, y);
        tape.backward(loss);
        // d loss / d w = [dot(sel, i0), dot(sel, i1)] = [0, 2]
        assert_eq!(store.grad(p), &[0.0, 2.0]);
    }

    #[test]
    fn row_lookup_routes_gradient_to_one_row() {
        let mut store = store_with(&[("e", &[3, 2], vec![0.0, 0.1, 1.0, 1.1, 2.0, 2.1])]);
        let e = store.id("e");
        let mut tape = Tape::new(&mut store);
        let r = tape.row(e, 1);
        assert_eq!(tape.value(r), &[1.0, 1.1]);
        let w = tape.constant(vec![5.0, 7.0]);
        let loss = tape.dot(w, r);
        tape.backward(loss);
        assert_eq!(store.grad(e), &[0.0, 0.0, 5.0, 7.0, 0.0, 0.0]);
    }

    #[test]
    fn reused_node_accumulates_both_paths() {
        // loss = dot(x, x): gradient is 2x.
        let mut store = ParamStore::<f64>::new(0);
        let p = store.add("p", &[2], Init::Given(vec![3.0, -4.0]));
        let mut tape = Tape::new(&mut store);
        let x = tape.param(p);
        let loss = tape.dot(x, x);
        assert_eq!(tape.scalar(loss), 25.0);
        tape.backward(loss);
        assert_eq!(store.grad(p), &[6.0, -8.0]);
    }

    #[test]
    fn crf_node_matches_direct_loss_and_gradients() {
        let (n_labels, hidden, t) = (3, 2, 4);
        let params = CrfParams::<f64>::random(n_labels, hidden, 11);
        let mut store = ParamStore::<f64>::new(0);
        let w = store.add("w", &[n_labels * n_labels, hidden], Init::Given(params.w.clone()));
        let b = store.add("b", &[n_labels, n_labels], Init::Given(params.b.clone()));
        let s = store.add("s", &[t, hidden], Init::Uniform(-1.0, 1.0));
        let labels = vec![0, 2, 1, 1];

        let state_data: Vec<Vec<f64>> = (0..t)
            .map(|j| store.data(s)[j * hidden..(j + 1) * hidden].to_vec())
            .collect();
        let state_refs: Vec<&[f64]> = state_data.iter().map(|v| v.as_slice()).collect();
        let direct = crate::crf::nll_with_grad(
            &state_refs, &labels, n_labels, &params.w, &params.b, None,
        )
        .unwrap();

        let mut tape = Tape::new(&mut store);
        let states: Vec<Var> = (0..t).map(|j| tape.row(s, j)).collect();
        let loss = tape.crf_nll(&states, &labels, w, b, None, n_labels);
        assert!((tape.scalar(loss) - direct.loss).abs() < 1e-12);
        tape.backward(loss);
        for (j, ds) in direct.d_states.iter().enumerate() {
            for (k, &v) in ds.iter().enumerate() {
                assert!((store.grad(s)[j * hidden + k] - v).abs() < 1e-12);
            }
        }
        for (gw, dw) in store.grad(w).iter().zip(&direct.d_w) {
            assert!((gw - dw).abs() < 1e-12);
        }
        for (gb, db) in store.grad(b).iter().zip(&direct.d_b) {
            assert!((gb - db).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_twice_accumulates() {
        let mut store = ParamStore::<f64>::new(0);
        let p = store.add("p", &[1], Init::Given(vec![2.0]));
        for _ in 0..2 {
            let mut tape = Tape::new(&mut store);
            let x = tape.param(p);
            let loss = tape.dot(x, x);
            tape.backward(loss);
        }
        assert_eq!(store.grad(p), &[8.0]);
    }

    #[test]
    fn nodes_after_loss_are_ignored() {
        let mut store = ParamStore::<f64>::new(0);
        let p = store.add("p", &[1], Init::Given(vec![1.5]));
        let mut tape = Tape::new(&mut store);
        let x = tape.param(p);
        let loss = tape.dot(x, x);
        let _later = tape.tanh(x);
        tape.backward(loss);
        assert_eq!(store.grad(p), &[3.0]);
    }
}
