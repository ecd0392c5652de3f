//! Central finite-difference verification of tape gradients.

use crate::scalar::Scalar;
use crate::seqmodel::store::ParamStore;
use crate::seqmodel::tape::{Tape, Var};
use thiserror::Error;

/// Default perturbation half-width.
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Denominator floor for relative errors. Central differences only resolve
/// absolute gradient error down to roughly |loss|·ulp/(2·eps) ≈ 1e-11, so
/// comparisons on tensors whose true gradient norm sits near zero measure
/// pure roundoff; the floor keeps that noise below the usual 1e-4 tolerance
/// while leaving any defect of absolute size 1e-9 or larger visible.
pub const NORM_FLOOR: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum GradCheckError {
    #[error("loss is not finite at {0}")]
    NonFiniteLoss(String),
}

/// Outcome of a finite-difference sweep over every parameter tensor.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub loss: f64,
    pub max_rel_err: f64,
    /// Name of the parameter tensor with the worst relative error.
    pub worst_param: String,
    pub n_entries: usize,
}

/// Relative error with an absolute floor, so near-zero pairs compare sanely.
pub fn relative_error(numeric: f64, analytic: f64) -> f64 {
    (numeric - analytic).abs() / (numeric.abs() + analytic.abs()).max(NORM_FLOOR)
}

/// Compares the tape's analytic gradients against central finite differences,
/// parameter-wise: each tensor's numeric and analytic gradient vectors are
/// compared by Euclidean norm, which keeps floating-point noise on individual
/// near-zero entries from swamping the measurement.
///
/// `build` must construct the same scalar loss each call from the store's
/// current parameter values (no hidden state that advances between calls).
pub fn grad_check<F: Scalar>(
    store: &mut ParamStore<F>,
    eps: f64,
    mut build: impl FnMut(&mut Tape<F>) -> Var,
) -> Result<GradCheckReport, GradCheckError> {
    store.zero_grads();
    let loss = {
        let mut tape = Tape::new(store);
        let loss = build(&mut tape);
        let value = tape.scalar(loss).to_f64_lossy();
        if !value.is_finite() {
            return Err(GradCheckError::NonFiniteLoss("base point".into()));
        }
        tape.backward(loss);
        value
    };

    let names: Vec<String> = store.names().to_vec();
    let mut report = GradCheckReport {
        loss,
        max_rel_err: 0.0,
        worst_param: String::new(),
        n_entries: 0,
    };
    for name in &names {
        let id = store.id(name);
        let mut diff_sq = 0.0;
        let mut numeric_sq = 0.0;
        let mut analytic_sq = 0.0;
        for k in 0..store.data(id).len() {
            let original = store.data(id)[k];
            let analytic = store.grad(id)[k].to_f64_lossy();

            store.data_mut(id)[k] = original + F::c(eps);
            let plus = eval_loss(store, &mut build)
                .ok_or_else(|| GradCheckError::NonFiniteLoss(format!("{name}[{k}]+eps")))?;
            store.data_mut(id)[k] = original - F::c(eps);
            let minus = eval_loss(store, &mut build)
                .ok_or_else(|| GradCheckError::NonFiniteLoss(format!("{name}[{k}]-eps")))?;
            store.data_mut(id)[k] = original;

            let numeric = (plus - minus) / (2.0 * eps);
            diff_sq += (numeric - analytic) * (numeric - analytic);
            numeric_sq += numeric * numeric;
            analytic_sq += analytic * analytic;
            report.n_entries += 1;
        }
        let err = relative_error_from_norms(diff_sq.sqrt(), numeric_sq.sqrt(), analytic_sq.sqrt());
        if err > report.max_rel_err {
            report.max_rel_err = err;
            report.worst_param = name.clone();
        }
    }
    Ok(report)
}

fn relative_error_from_norms(diff: f64, numeric: f64, analytic: f64) -> f64 {
    diff / (numeric + analytic).max(NORM_FLOOR)
}

fn eval_loss<F: Scalar>(
    store: &mut ParamStore<F>,
    build: &mut impl FnMut(&mut Tape<F>) -> Var,
) -> Option<f64> {
    let mut tape = Tape::new(store);
    let loss = build(&mut tape);
    let value = tape.scalar(loss).to_f64_lossy();
    value.is_finite().then_some(value)
}
