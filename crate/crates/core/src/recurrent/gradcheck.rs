use ndarray::ArrayView1;

use super::{ModelError, RecurrentClassifier};
use crate::corpus::TokenSequence;

/// Denominator floor for relative errors, so components whose true gradient
/// is (near) zero are judged on absolute error.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

/// Outcome of comparing analytic gradients with central differences.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientCheck {
    pub max_rel_error: f64,
    /// Tensor name and flat index of the worst component.
    pub worst: (String, usize),
    pub analytic: f64,
    pub numeric: f64,
    pub n_checked: usize,
}

pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(REL_ERROR_FLOOR)
}

/// Checks every parameter of `model` against `(L(θ+h) - L(θ-h)) / 2h`.
pub fn gradient_check(
    model: &RecurrentClassifier,
    seq: &TokenSequence,
    one_hot: ArrayView1<f64>,
    h: f64,
) -> Result<GradientCheck, ModelError> {
    let (_, cache) = model.forward_pass(seq)?;
    let grads = model.backward_pass(&cache, one_hot)?;
    let analytic: Vec<(String, Vec<f64>)> = grads
        .tensors()
        .into_iter()
        .map(|t| (t.name, t.data.to_vec()))
        .collect();

    let mut probe = model.clone();
    let mut out = GradientCheck {
        max_rel_error: 0.0,
        worst: (String::new(), 0),
        analytic: 0.0,
        numeric: 0.0,
        n_checked: 0,
    };
    for (k, (name, values)) in analytic.iter().enumerate() {
        for (i, &a) in values.iter().enumerate() {
            let orig = probe.params.slices_mut()[k][i];
            probe.params.slices_mut()[k][i] = orig + h;
            let plus = probe.loss(seq, one_hot)?;
            probe.params.slices_mut()[k][i] = orig - h;
            let minus = probe.loss(seq, one_hot)?;
            probe.params.slices_mut()[k][i] = orig;
            let n = (plus - minus) / (2.0 * h);
            let err = relative_error(a, n);
            if err > out.max_rel_error || out.n_checked == 0 {
                out.max_rel_error = err;
                out.worst = (name.clone(), i);
                out.analytic = a;
                out.numeric = n;
            }
            out.n_checked += 1;
        }
    }
    Ok(out)
}
