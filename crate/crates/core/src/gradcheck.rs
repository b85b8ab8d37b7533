//! Central finite differences against analytic backward passes.
//!
//! The numeric gradient here is the independent oracle every module's
//! backward implementation is tested against.

use crate::error::{Error, Result};
use crate::tensor::{ParamId, ParameterStore, Tensor};

/// Central-difference gradient of a scalar function of the store, taken over
/// the listed parameters. The function must be deterministic.
pub fn finite_diff_grad<F>(
    store: &mut ParameterStore,
    ids: &[ParamId],
    mut f: F,
    step: f64,
) -> Result<Vec<Tensor>>
where
    F: FnMut(&ParameterStore) -> Result<f64>,
{
    assert!(step > 0.0, "finite-difference step must be positive");
    let mut grads = Vec::with_capacity(ids.len());
    for &id in ids {
        let n = store.value(id).len();
        let mut g = Tensor::zeros(store.value(id).shape());
        for i in 0..n {
            let orig = store.value(id).data()[i];
            store.value_mut(id).data_mut()[i] = orig + step;
            let f_plus = f(store)?;
            store.value_mut(id).data_mut()[i] = orig - step;
            let f_minus = f(store)?;
            store.value_mut(id).data_mut()[i] = orig;
            if !f_plus.is_finite() || !f_minus.is_finite() {
                return Err(Error::NonFinite("finite-difference evaluation".into()));
            }
            g.data_mut()[i] = (f_plus - f_minus) / (2.0 * step);
        }
        grads.push(g);
    }
    Ok(grads)
}

/// Relative error between an analytic and a numeric gradient coordinate.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(1e-6);
    (analytic - numeric).abs() / denom
}

/// Maximum relative error across two gradient sets of matching shapes.
pub fn max_rel_err(analytic: &[Tensor], numeric: &[Tensor]) -> f64 {
    let mut worst = 0.0f64;
    for (a, n) in analytic.iter().zip(numeric) {
        for (&x, &y) in a.data().iter().zip(n.data()) {
            worst = worst.max(rel_err(x, y));
        }
    }
    worst
}

/// Compare the accumulated analytic grads in the store against finite
/// differences of `f` and return the worst relative error.
pub fn check_against_store<F>(
    store: &mut ParameterStore,
    ids: &[ParamId],
    f: F,
    step: f64,
) -> Result<f64>
where
    F: FnMut(&ParameterStore) -> Result<f64>,
{
    let numeric = finite_diff_grad(store, ids, f, step)?;
    let analytic: Vec<Tensor> = ids.iter().map(|&id| store.grad(id).clone()).collect();
    Ok(max_rel_err(&analytic, &numeric))
}
