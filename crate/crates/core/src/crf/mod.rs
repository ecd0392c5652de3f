//! Linear-chain conditional random field over per-token hidden states.
//!
//! The score of a label sequence is a sum over adjacent label pairs,
//! score(Y) = sum over j of W[y_j, y_{j+1}] . h_j + b[y_j, y_{j+1}],
//! with the pairwise weight vector read against the left state h_j. There
//! is no unary term by default and no boundary labels, so a length-1
//! sequence scores 0 and the partition over L labels is log L. An
//! optional conventional unary emission U[y_j] . h_j can be switched on
//! for ablation.
//!
//! All dynamic programs run in log space with per-step max shifting.

use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CrfError {
    #[error("label {index} out of range for {n_labels} labels")]
    BadLabel { index: usize, n_labels: usize },
    #[error("empty state sequence")]
    Empty,
    #[error("parameter shape mismatch: {0}")]
    Shape(String),
}

/// Pairwise weights W [L, L, H] and bias b [L, L], flattened row-major,
/// plus an optional unary emission table U [L, H].
#[derive(Debug, Clone, PartialEq)]
pub struct CrfParams<F> {
    pub n_labels: usize,
    pub hidden: usize,
    pub w: Vec<F>,
    pub b: Vec<F>,
    pub unary: Option<Vec<F>>,
}

impl<F: Scalar> CrfParams<F> {
    pub fn zeros(n_labels: usize, hidden: usize) -> CrfParams<F> {
        CrfParams {
            n_labels,
            hidden,
            w: vec![F::zero(); n_labels * n_labels * hidden],
            b: vec![F::zero(); n_labels * n_labels],
            unary: None,
        }
    }

    /// Seeded uniform(-0.5, 0.5) parameters.
    pub fn random(n_labels: usize, hidden: usize, seed: u64) -> CrfParams<F> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<F> {
            (0..n).map(|_| F::c(rng.gen_range(-0.5..0.5))).collect()
        };
        CrfParams {
            n_labels,
            hidden,
            w: draw(n_labels * n_labels * hidden),
            b: draw(n_labels * n_labels),
            unary: None,
        }
    }

    pub fn with_random_unary(mut self, seed: u64) -> CrfParams<F> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        self.unary = Some(
            (0..self.n_labels * self.hidden)
                .map(|_| F::c(rng.gen_range(-0.5..0.5)))
                .collect(),
        );
        self
    }

    pub fn score_sequence(&self, states: &[&[F]], labels: &[usize]) -> Result<F, CrfError> {
        score_sequence(states, labels, self.n_labels, &self.w, &self.b, self.unary.as_deref())
    }

    pub fn log_partition(&self, states: &[&[F]]) -> Result<F, CrfError> {
        log_partition(states, self.n_labels, &self.w, &self.b, self.unary.as_deref())
    }

    pub fn viterbi(&self, states: &[&[F]]) -> Result<(Vec<usize>, F), CrfError> {
        viterbi(states, self.n_labels, &self.w, &self.b, self.unary.as_deref())
    }

    pub fn nll(&self, states: &[&[F]], labels: &[usize]) -> Result<F, CrfError> {
        nll(states, labels, self.n_labels, &self.w, &self.b, self.unary.as_deref())
    }

    pub fn nll_with_grad(
        &self,
        states: &[&[F]],
        labels: &[usize],
    ) -> Result<CrfGradients<F>, CrfError> {
        nll_with_grad(states, labels, self.n_labels, &self.w, &self.b, self.unary.as_deref())
    }
}

fn check_shapes<F: Scalar>(
    states: &[&[F]],
    n_labels: usize,
    w: &[F],
    b: &[F],
    unary: Option<&[F]>,
) -> Result<(), CrfError> {
    if states.is_empty() {
        return Err(CrfError::Empty);
    }
    let hidden = states[0].len();
    if states.iter().any(|h| h.len() != hidden) {
        return Err(CrfError::Shape("state widths differ".into()));
    }
    if w.len() != n_labels * n_labels * hidden {
        return Err(CrfError::Shape(format!(
            "w has {} values, expected {}",
            w.len(),
            n_labels * n_labels * hidden
        )));
    }
    if b.len() != n_labels * n_labels {
        return Err(CrfError::Shape(format!(
            "b has {} values, expected {}",
            b.len(),
            n_labels * n_labels
        )));
    }
    if let Some(u) = unary {
        if u.len() != n_labels * hidden {
            return Err(CrfError::Shape(format!(
                "unary has {} values, expected {}",
                u.len(),
                n_labels * hidden
            )));
        }
    }
    Ok(())
}

fn check_labels(labels: &[usize], t: usize, n_labels: usize) -> Result<(), CrfError> {
    if labels.len() != t {
        return Err(CrfError::Shape(format!(
            "{} labels for {} states",
            labels.len(),
            t
        )));
    }
    for &l in labels {
        if l >= n_labels {
            return Err(CrfError::BadLabel {
                index: l,
                n_labels,
            });
        }
    }
    Ok(())
}

#[inline]
fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Transition score between labels y and y2 across the boundary whose
/// left state is h.
#[inline]
fn transition<F: Scalar>(w: &[F], b: &[F], n_labels: usize, hidden: usize, h: &[F], y: usize, y2: usize) -> F {
    let pair = y * n_labels + y2;
    dot(&w[pair * hidden..(pair + 1) * hidden], h) + b[pair]
}

#[inline]
fn unary_score<F: Scalar>(unary: Option<&[F]>, hidden: usize, h: &[F], y: usize) -> F {
    match unary {
        Some(u) => dot(&u[y * hidden..(y + 1) * hidden], h),
        None => F::zero(),
    }
}

fn log_sum_exp<F: Scalar>(xs: &[F]) -> F {
    let m = xs.iter().cloned().fold(F::neg_infinity(), F::max);
    if m == F::neg_infinity() {
        return m;
    }
    let sum: F = xs.iter().map(|&x| (x - m).exp()).sum();
    m + sum.ln()
}

/// Left-to-right accumulation of the printed score formula.
pub fn score_sequence<F: Scalar>(
    states: &[&[F]],
    labels: &[usize],
    n_labels: usize,
    w: &[F],
    b: &[F],
    unary: Option<&[F]>,
) -> Result<F, CrfError> {
    check_shapes(states, n_labels, w, b, unary)?;
    check_labels(labels, states.len(), n_labels)?;
    let hidden = states[0].len();
    let mut score = F::zero();
    for j in 0..states.len() - 1 {
        score += transition(w, b, n_labels, hidden, states[j], labels[j], labels[j + 1]);
    }
    for (j, &y) in labels.iter().enumerate() {
        score += unary_score(unary, hidden, states[j], y);
    }
    Ok(score)
}

/// Forward recursion in log space: alpha over positions, one entry per
/// label, starting from the unary score (zero in pairwise-only mode).
pub fn log_partition<F: Scalar>(
    states: &[&[F]],
    n_labels: usize,
    w: &[F],
    b: &[F],
    unary: Option<&[F]>,
) -> Result<F, CrfError> {
    check_shapes(states, n_labels, w, b, unary)?;
    let alpha = forward(states, n_labels, w, b, unary);
    Ok(log_sum_exp(alpha.last().expect("T >= 1")))
}

#[allow(clippy::needless_range_loop)]
fn forward<F: Scalar>(
    states: &[&[F]],
    n_labels: usize,
    w: &[F],
    b: &[F],
    unary: Option<&[F]>,
) -> Vec<Vec<F>> {
    let t = states.len();
    let hidden = states[0].len();
    let mut alpha = vec![vec![F::zero(); n_labels]; t];
    for y in 0..n_labels {
        alpha[0][y] = unary_score(unary, hidden, states[0], y);
    }
    for j in 0..t - 1 {
        for y2 in 0..n_labels {
            let terms: Vec<F> = (0..n_labels)
                .map(|y| alpha[j][y] + transition(w, b, n_labels, hidden, states[j], y, y2))
                .collect();
            alpha[j + 1][y2] = log_sum_exp(&terms) + unary_score(unary, hidden, states[j + 1], y2);
        }
    }
    alpha
}

fn backward_pass<F: Scalar>(
    states: &[&[F]],
    n_labels: usize,
    w: &[F],
    b: &[F],
    unary: Option<&[F]>,
) -> Vec<Vec<F>> {
    let t = states.len();
    let hidden = states[0].len();
    let mut beta = vec![vec![F::zero(); n_labels]; t];
    for j in (0..t - 1).rev() {
        for y in 0..n_labels {
            let terms: Vec<F> = (0..n_labels)
                .map(|y2| {
                    transition(w, b, n_labels, hidden, states[j], y, y2)
                        + unary_score(unary, hidden, states[j + 1], y2)
                        + beta[j + 1][y2]
                })
                .collect();
            beta[j][y] = log_sum_exp(&terms);
        }
    }
    beta
}

/// Maximum-score labeling; ties pick the lowest label index at every
/// choice, so all-tied parameters decode to all zeros.
#[allow(clippy::needless_range_loop)]
pub fn viterbi<F: Scalar>(
    states: &[&[F]],
    n_labels: usize,
    w: &[F],
    b: &[F],
    unary: Option<&[F]>,
) -> Result<(Vec<usize>, F), CrfError> {
    check_shapes(states, n_labels, w, b, unary)?;
    let t = states.len();
    let hidden = states[0].len();
    let mut delta = vec![vec![F::zero(); n_labels]; t];
    let mut back = vec![vec![0usize; n_labels]; t];
    for y in 0..n_labels {
        delta[0][y] = unary_score(unary, hidden, states[0], y);
    }
    for j in 0..t - 1 {
        for y2 in 0..n_labels {
            let mut best = F::neg_infinity();
            let mut best_y = 0;
            for y in 0..n_labels {
                let cand = delta[j][y] + transition(w, b, n_labels, hidden, states[j], y, y2);
                if cand > best {
                    best = cand;
                    best_y = y;
                }
            }
            delta[j + 1][y2] = best + unary_score(unary, hidden, states[j + 1], y2);
            back[j + 1][y2] = best_y;
        }
    }
    let mut best = F::neg_infinity();
    let mut y = 0;
    for (cand_y, &score) in delta[t - 1].iter().enumerate() {
        if score > best {
            best = score;
            y = cand_y;
        }
    }
    let mut labels = vec![0usize; t];
    labels[t - 1] = y;
    for j in (1..t).rev() {
        y = back[j][y];
        labels[j - 1] = y;
    }
    Ok((labels, best))
}

/// Negative log-likelihood, log_partition minus the gold score.
pub fn nll<F: Scalar>(
    states: &[&[F]],
    labels: &[usize],
    n_labels: usize,
    w: &[F],
    b: &[F],
    unary: Option<&[F]>,
) -> Result<F, CrfError> {
    let z = log_partition(states, n_labels, w, b, unary)?;
    let s = score_sequence(states, labels, n_labels, w, b, unary)?;
    Ok(z - s)
}

/// Loss plus exact gradients for the negative log-likelihood.
#[derive(Debug, Clone)]
pub struct CrfGradients<F> {
    pub loss: F,
    pub d_states: Vec<Vec<F>>,
    pub d_w: Vec<F>,
    pub d_b: Vec<F>,
    pub d_unary: Option<Vec<F>>,
}

/// Forward-backward gradients: the derivative with respect to each
/// transition score is its pairwise marginal minus the gold indicator;
/// for unary scores it is the position marginal minus the indicator.
#[allow(clippy::needless_range_loop)]
pub fn nll_with_grad<F: Scalar>(
    states: &[&[F]],
    labels: &[usize],
    n_labels: usize,
    w: &[F],
    b: &[F],
    unary: Option<&[F]>,
) -> Result<CrfGradients<F>, CrfError> {
    check_shapes(states, n_labels, w, b, unary)?;
    check_labels(labels, states.len(), n_labels)?;
    let t = states.len();
    let hidden = states[0].len();
    let alpha = forward(states, n_labels, w, b, unary);
    let beta = backward_pass(states, n_labels, w, b, unary);
    let log_z = log_sum_exp(&alpha[t - 1]);
    let gold = score_sequence(states, labels, n_labels, w, b, unary)?;
    let loss = log_z - gold;

    let mut d_states = vec![vec![F::zero(); hidden]; t];
    let mut d_w = vec![F::zero(); w.len()];
    let mut d_b = vec![F::zero(); b.len()];
    let mut d_unary = unary.map(|u| vec![F::zero(); u.len()]);

    for j in 0..t.saturating_sub(1) {
        for y in 0..n_labels {
            for y2 in 0..n_labels {
                let log_m = alpha[j][y]
                    + transition(w, b, n_labels, hidden, states[j], y, y2)
                    + unary_score(unary, hidden, states[j + 1], y2)
                    + beta[j + 1][y2]
                    - log_z;
                let mut coeff = log_m.exp();
                if labels[j] == y && labels[j + 1] == y2 {
                    coeff -= F::one();
                }
                if coeff == F::zero() {
                    continue;
                }
                let pair = y * n_labels + y2;
                d_b[pair] += coeff;
                let w_row = &w[pair * hidden..(pair + 1) * hidden];
                let dw_row = &mut d_w[pair * hidden..(pair + 1) * hidden];
                for k in 0..hidden {
                    dw_row[k] += coeff * states[j][k];
                    d_states[j][k] += coeff * w_row[k];
                }
            }
        }
    }
    if let (Some(u), Some(du)) = (unary, d_unary.as_mut()) {
        for j in 0..t {
            for y in 0..n_labels {
                let mut coeff = (alpha[j][y] + beta[j][y] - log_z).exp();
                if labels[j] == y {
                    coeff -= F::one();
                }
                if coeff == F::zero() {
                    continue;
                }
                let u_row = &u[y * hidden..(y + 1) * hidden];
                let du_row = &mut du[y * hidden..(y + 1) * hidden];
                for k in 0..hidden {
                    du_row[k] += coeff * states[j][k];
                    d_states[j][k] += coeff * u_row[k];
                }
            }
        }
    }
    Ok(CrfGradients {
        loss,
        d_states,
        d_w,
        d_b,
        d_unary,
    })
}
