use ndarray::{Array1, ArrayView1};

/// Floor applied to the true-class probability before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    // Split on sign so exp never overflows.
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: ArrayView1<f64>) -> Array1<f64> {
    x.mapv(sigmoid_scalar)
}

pub fn tanh(x: ArrayView1<f64>) -> Array1<f64> {
    x.mapv(f64::tanh)
}

pub fn relu(x: ArrayView1<f64>) -> Array1<f64> {
    x.mapv(|v| v.max(0.0))
}

/// Max-subtracted softmax.
pub fn softmax(logits: ArrayView1<f64>) -> Array1<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps = logits.mapv(|v| (v - max).exp());
    let sum = exps.sum();
    exps / sum
}

/// Index of the largest entry; the smallest index wins ties.
pub fn predict(scores: ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in scores.iter().enumerate() {
        if v > scores[best] {
            best = i;
        }
    }
    best
}

/// `-ln(p_true)` with `p_true` floored at [`PROB_FLOOR`].
pub fn cross_entropy(probs: ArrayView1<f64>, one_hot: ArrayView1<f64>) -> f64 {
    let p_true: f64 = probs.iter().zip(one_hot).map(|(p, y)| p * y).sum();
    -p_true.max(PROB_FLOOR).ln()
}
