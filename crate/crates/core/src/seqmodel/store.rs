//! Named parameter tensors with gradient and optimizer state.

use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::collections::HashMap;

/// Index of a tensor in a [`ParamStore`]; stable once registered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

/// How a tensor is filled at registration.
pub enum Init<F> {
    Zeros,
    /// Seeded uniform draw over the given open interval.
    Uniform(f64, f64),
    Given(Vec<F>),
}

#[derive(Debug, Clone)]
pub struct Tensor<F> {
    pub shape: Vec<usize>,
    pub data: Vec<F>,
    pub grad: Vec<F>,
    /// Accumulated squared gradients for the adaptive-gradient update.
    pub acc: Vec<F>,
}

/// Insertion-ordered collection of named tensors. Iteration order is the
/// registration order, so every whole-store operation is deterministic.
pub struct ParamStore<F> {
    names: Vec<String>,
    index: HashMap<String, usize>,
    tensors: Vec<Tensor<F>>,
    rng: ChaCha20Rng,
}

impl<F: Scalar> ParamStore<F> {
    pub fn new(seed: u64) -> ParamStore<F> {
        ParamStore {
            names: Vec::new(),
            index: HashMap::new(),
            tensors: Vec::new(),
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Registers a tensor and returns its id. Names must be unique.
    pub fn add(&mut self, name: &str, shape: &[usize], init: Init<F>) -> ParamId {
        assert!(
            !self.index.contains_key(name),
            "parameter {name:?} registered twice"
        );
        let n: usize = shape.iter().product();
        let data = match init {
            Init::Zeros => vec![F::zero(); n],
            Init::Uniform(lo, hi) => (0..n)
                .map(|_| F::c(self.rng.gen_range(lo..hi)))
                .collect(),
            Init::Given(v) => {
                assert_eq!(v.len(), n, "init data for {name:?} has wrong length");
                v
            }
        };
        let id = ParamId(self.tensors.len());
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id.0);
        self.tensors.push(Tensor {
            shape: shape.to_vec(),
            data,
            grad: vec![F::zero(); n],
            acc: vec![F::zero(); n],
        });
        id
    }

    pub fn id(&self, name: &str) -> ParamId {
        ParamId(*self.index.get(name).unwrap_or_else(|| {
            panic!("unknown parameter {name:?}")
        }))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn shape(&self, id: ParamId) -> &[usize] {
        &self.tensors[id.0].shape
    }

    pub fn data(&self, id: ParamId) -> &[F] {
        &self.tensors[id.0].data
    }

    pub fn data_mut(&mut self, id: ParamId) -> &mut [F] {
        &mut self.tensors[id.0].data
    }

    pub fn grad(&self, id: ParamId) -> &[F] {
        &self.tensors[id.0].grad
    }

    pub fn grad_mut(&mut self, id: ParamId) -> &mut [F] {
        &mut self.tensors[id.0].grad
    }

    /// Total number of scalar parameters.
    pub fn n_params(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn zero_grads(&mut self) {
        for t in &mut self.tensors {
            t.grad.iter_mut().for_each(|g| *g = F::zero());
        }
    }

    pub fn scale_grads(&mut self, factor: F) {
        for t in &mut self.tensors {
            t.grad.iter_mut().for_each(|g| *g *= factor);
        }
    }

    pub fn grad_norm(&self) -> F {
        let sq: F = self
            .tensors
            .iter()
            .flat_map(|t| t.grad.iter())
            .map(|&g| g * g)
            .sum();
        sq.sqrt()
    }

    /// Scales all gradients down so the global norm is at most `max_norm`.
    pub fn clip_grad_norm(&mut self, max_norm: F) -> F {
        let norm = self.grad_norm();
        if norm > max_norm && norm > F::zero() {
            self.scale_grads(max_norm / norm);
        }
        norm
    }

    /// Adaptive-gradient update: acc += g^2, p -= lr * g / (sqrt(acc) + 1e-10).
    pub fn adagrad_step(&mut self, lr: F) {
        let eps = F::c(1e-10);
        for t in &mut self.tensors {
            for ((p, &g), a) in t.data.iter_mut().zip(&t.grad).zip(&mut t.acc) {
                *a += g * g;
                *p -= lr * g / (a.sqrt() + eps);
            }
        }
    }

    /// Snapshot of all tensor data, in registration order.
    pub fn snapshot(&self) -> Vec<Vec<F>> {
        self.tensors.iter().map(|t| t.data.clone()).collect()
    }

    pub fn restore(&mut self, snapshot: &[Vec<F>]) {
        assert_eq!(snapshot.len(), self.tensors.len(), "snapshot mismatch");
        for (t, s) in self.tensors.iter_mut().zip(snapshot) {
            assert_eq!(t.data.len(), s.len(), "snapshot tensor mismatch");
            t.data.copy_from_slice(s);
        }
    }

    pub fn has_non_finite(&self) -> bool {
        self.tensors
            .iter()
            .any(|t| t.data.iter().any(|v| !v.is_finite()))
    }
}
