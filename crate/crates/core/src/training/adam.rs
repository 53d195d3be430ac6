use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::recurrent::Parameters;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment estimates, shaped like the parameters they track.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Parameters,
    pub v: Parameters,
    pub t: u64,
    pub hyper: AdamHyper,
}

impl AdamState {
    pub fn new(params: &Parameters, hyper: AdamHyper) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
            hyper,
        }
    }
}

fn same_shapes(a: &Parameters, b: &Parameters) -> bool {
    let (ta, tb) = (a.tensors(), b.tensors());
    ta.len() == tb.len()
        && ta
            .iter()
            .zip(&tb)
            .all(|(x, y)| x.name == y.name && x.shape == y.shape)
}

/// One bias-corrected Adam step, applied in place.
pub fn adam_update(
    params: &mut Parameters,
    grads: &Parameters,
    state: &mut AdamState,
) -> Result<(), TrainError> {
    if !same_shapes(params, grads)
        || !same_shapes(params, &state.m)
        || !same_shapes(params, &state.v)
    {
        return Err(TrainError::Shape(
            "parameters, gradients and Adam moments disagree".into(),
        ));
    }
    let AdamHyper {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = state.hyper;
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    let g_all = grads.tensors();
    let ms = state.m.slices_mut();
    let vs = state.v.slices_mut();
    for (((theta, g), m), v) in params.slices_mut().into_iter().zip(&g_all).zip(ms).zip(vs) {
        for i in 0..theta.len() {
            let gi = g.data[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
            v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            theta[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
    Ok(())
}
