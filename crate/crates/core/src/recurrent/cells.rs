//! Single-step cell equations and their adjoints.
//!
//! Every gate reads the concatenation `[h_{t-1}, x_t]`, hidden state first.

use ndarray::{s, Array1, Array2, ArrayView1, Zip};

use super::activations::{sigmoid, tanh};
use super::params::{GruParams, LstmParams, SrnnParams};
use super::ModelError;

/// `[h, x]`.
pub fn concat(h: ArrayView1<f64>, x: ArrayView1<f64>) -> Array1<f64> {
    let mut out = Array1::zeros(h.len() + x.len());
    out.slice_mut(s![..h.len()]).assign(&h);
    out.slice_mut(s![h.len()..]).assign(&x);
    out
}

fn affine(w: &Array2<f64>, hx: &Array1<f64>, b: Option<&Array1<f64>>) -> Array1<f64> {
    let mut a = w.dot(hx);
    if let Some(b) = b {
        a += b;
    }
    a
}

fn check_step(
    name: &str,
    w: &Array2<f64>,
    x: ArrayView1<f64>,
    h_prev: ArrayView1<f64>,
) -> Result<(), ModelError> {
    let h = w.nrows();
    if h_prev.len() != h || w.ncols() != h + x.len() {
        return Err(ModelError::Shape(format!(
            "{name}: weights {}x{} do not fit h_prev {} and x {}",
            w.nrows(),
            w.ncols(),
            h_prev.len(),
            x.len()
        )));
    }
    Ok(())
}

fn check_same(name: &str, lens: &[usize]) -> Result<(), ModelError> {
    if lens.windows(2).any(|w| w[0] != w[1]) {
        return Err(ModelError::Shape(format!(
            "{name}: vector lengths differ {lens:?}"
        )));
    }
    Ok(())
}

/// `dW += a ⊗ v`.
fn outer_acc(dw: &mut Array2<f64>, a: &Array1<f64>, v: &Array1<f64>) {
    for (mut row, &ai) in dw.rows_mut().into_iter().zip(a) {
        if ai != 0.0 {
            row.scaled_add(ai, v);
        }
    }
}

fn sigmoid_grad(y: &Array1<f64>) -> Array1<f64> {
    y.mapv(|v| v * (1.0 - v))
}

fn tanh_grad(y: &Array1<f64>) -> Array1<f64> {
    y.mapv(|v| 1.0 - v * v)
}

// ---------------------------------------------------------------- sRNN

pub fn srnn_step(
    x: ArrayView1<f64>,
    h_prev: ArrayView1<f64>,
    p: &SrnnParams,
) -> Result<Array1<f64>, ModelError> {
    check_step("srnn", &p.w_h, x, h_prev)?;
    let hx = concat(h_prev, x);
    Ok(sigmoid(affine(&p.w_h, &hx, Some(&p.b_h)).view()))
}

#[derive(Clone, Debug)]
pub struct SrnnStep {
    pub hx: Array1<f64>,
    pub h: Array1<f64>,
}

pub(crate) fn srnn_forward(
    x: ArrayView1<f64>,
    h_prev: ArrayView1<f64>,
    p: &SrnnParams,
) -> SrnnStep {
    let hx = concat(h_prev, x);
    let h = sigmoid(affine(&p.w_h, &hx, Some(&p.b_h)).view());
    SrnnStep { hx, h }
}

/// Returns `(dh_prev, dx)` and accumulates parameter gradients.
pub(crate) fn srnn_backward(
    step: &SrnnStep,
    dh: &Array1<f64>,
    p: &SrnnParams,
    g: &mut SrnnParams,
) -> (Array1<f64>, Array1<f64>) {
    let da = dh * &sigmoid_grad(&step.h);
    outer_acc(&mut g.w_h, &da, &step.hx);
    g.b_h += &da;
    split(p.w_h.t().dot(&da), dh.len())
}

fn split(v: Array1<f64>, h: usize) -> (Array1<f64>, Array1<f64>) {
    (v.slice(s![..h]).to_owned(), v.slice(s![h..]).to_owned())
}

// ---------------------------------------------------------------- GRU

/// GRU gate values for one step.
#[derive(Clone, Debug, PartialEq)]
pub struct GruGates {
    /// Update gate `z_t`.
    pub z: Array1<f64>,
    /// Reset gate `r_t`.
    pub r: Array1<f64>,
    /// New memory content `h'_t`.
    pub candidate: Array1<f64>,
}

pub fn gru_gates(
    x: ArrayView1<f64>,
    h_prev: ArrayView1<f64>,
    p: &GruParams,
) -> Result<GruGates, ModelError> {
    check_step("gru", &p.w_z, x, h_prev)?;
    check_step("gru", &p.w_c, x, h_prev)?;
    let step = gru_forward(x, h_prev, p);
    Ok(GruGates {
        z: step.z,
        r: step.r,
        candidate: step.candidate,
    })
}

/// `h_t = (1 - z) ⊙ h_prev + z ⊙ h'`.
pub fn gru_compose(
    z: ArrayView1<f64>,
    h_prev: ArrayView1<f64>,
    candidate: ArrayView1<f64>,
) -> Result<Array1<f64>, ModelError> {
    check_same("gru_compose", &[z.len(), h_prev.len(), candidate.len()])?;
    Ok(compose_gru(z, h_prev, candidate))
}

fn compose_gru(
    z: ArrayView1<f64>,
    h_prev: ArrayView1<f64>,
    candidate: ArrayView1<f64>,
) -> Array1<f64> {
    Zip::from(&z)
        .and(&h_prev)
        .and(&candidate)
        .map_collect(|&z, &hp, &c| (1.0 - z) * hp + z * c)
}

#[derive(Clone, Debug)]
pub struct GruStep {
    pub h_prev: Array1<f64>,
    pub hx: Array1<f64>,
    pub z: Array1<f64>,
    pub r: Array1<f64>,
    /// `[r ⊙ h_prev, x]`
    pub rhx: Array1<f64>,
    pub candidate: Array1<f64>,
    pub h: Array1<f64>,
}

pub(crate) fn gru_forward(x: ArrayView1<f64>, h_prev: ArrayView1<f64>, p: &GruParams) -> GruStep {
    let hx = concat(h_prev, x);
    let z = sigmoid(affine(&p.w_z, &hx, p.b_z.as_ref()).view());
    let r = sigmoid(affine(&p.w_r, &hx, p.b_r.as_ref()).view());
    let rh = &r * &h_prev;
    let rhx = concat(rh.view(), x);
    let candidate = tanh(affine(&p.w_c, &rhx, p.b_c.as_ref()).view());
    let h = compose_gru(z.view(), h_prev, candidate.view());
    GruStep {
        h_prev: h_prev.to_owned(),
        hx,
        z,
        r,
        rhx,
        candidate,
        h,
    }
}

pub(crate) fn gru_backward(
    step: &GruStep,
    dh: &Array1<f64>,
    p: &GruParams,
    g: &mut GruParams,
) -> (Array1<f64>, Array1<f64>) {
    let hdim = dh.len();
    let dz = dh * &(&step.candidate - &step.h_prev);
    let dcand = dh * &step.z;
    let mut dh_prev = dh * &step.z.mapv(|z| 1.0 - z);

    let dac = &dcand * &tanh_grad(&step.candidate);
    outer_acc(&mut g.w_c, &dac, &step.rhx);
    if let Some(b) = g.b_c.as_mut() {
        *b += &dac;
    }
    let (d_rh, mut dx) = split(p.w_c.t().dot(&dac), hdim);
    let dr = &d_rh * &step.h_prev;
    dh_prev += &(&d_rh * &step.r);

    let daz = &dz * &sigmoid_grad(&step.z);
    let dar = &dr * &sigmoid_grad(&step.r);
    outer_acc(&mut g.w_z, &daz, &step.hx);
    outer_acc(&mut g.w_r, &dar, &step.hx);
    if let Some(b) = g.b_z.as_mut() {
        *b += &daz;
    }
    if let Some(b) = g.b_r.as_mut() {
        *b += &dar;
    }
    let dhx = p.w_z.t().dot(&daz) + p.w_r.t().dot(&dar);
    dh_prev += &dhx.slice(s![..hdim]);
    dx += &dhx.slice(s![hdim..]);
    (dh_prev, dx)
}

// ---------------------------------------------------------------- LSTM

/// LSTM gate values for one step.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmGates {
    pub forget: Array1<f64>,
    pub input: Array1<f64>,
    /// New candidate values `g_t`.
    pub candidate: Array1<f64>,
    pub output: Array1<f64>,
}

pub fn lstm_gates(
    x: ArrayView1<f64>,
    h_prev: ArrayView1<f64>,
    p: &LstmParams,
) -> Result<LstmGates, ModelError> {
    for w in [&p.w_f, &p.w_i, &p.w_g, &p.w_o] {
        check_step("lstm", w, x, h_prev)?;
    }
    let hx = concat(h_prev, x);
    Ok(lstm_gates_from(&hx, p))
}

fn lstm_gates_from(hx: &Array1<f64>, p: &LstmParams) -> LstmGates {
    LstmGates {
        forget: sigmoid(affine(&p.w_f, hx, Some(&p.b_f)).view()),
        input: sigmoid(affine(&p.w_i, hx, Some(&p.b_i)).view()),
        candidate: tanh(affine(&p.w_g, hx, Some(&p.b_g)).view()),
        output: sigmoid(affine(&p.w_o, hx, Some(&p.b_o)).view()),
    }
}

/// `C_t = f ⊙ C_prev + i ⊙ g`, `h_t = o ⊙ tanh(C_t)`; returns `(C_t, h_t)`.
pub fn lstm_compose(
    gates: &LstmGates,
    c_prev: ArrayView1<f64>,
) -> Result<(Array1<f64>, Array1<f64>), ModelError> {
    check_same(
        "lstm_compose",
        &[
            gates.forget.len(),
            gates.input.len(),
            gates.candidate.len(),
            gates.output.len(),
            c_prev.len(),
        ],
    )?;
    let (c, _, h) = compose_lstm(gates, c_prev);
    Ok((c, h))
}

fn compose_lstm(
    gates: &LstmGates,
    c_prev: ArrayView1<f64>,
) -> (Array1<f64>, Array1<f64>, Array1<f64>) {
    let c = Zip::from(&gates.forget)
        .and(&c_prev)
        .and(&gates.input)
        .and(&gates.candidate)
        .map_collect(|&f, &cp, &i, &g| f * cp + i * g);
    let tanh_c = c.mapv(f64::tanh);
    let h = &gates.output * &tanh_c;
    (c, tanh_c, h)
}

#[derive(Clone, Debug)]
pub struct LstmStep {
    pub hx: Array1<f64>,
    pub gates: LstmGates,
    pub c_prev: Array1<f64>,
    pub c: Array1<f64>,
    pub tanh_c: Array1<f64>,
    pub h: Array1<f64>,
}

pub(crate) fn lstm_forward(
    x: ArrayView1<f64>,
    h_prev: ArrayView1<f64>,
    c_prev: ArrayView1<f64>,
    p: &LstmParams,
) -> LstmStep {
    let hx = concat(h_prev, x);
    let gates = lstm_gates_from(&hx, p);
    let (c, tanh_c, h) = compose_lstm(&gates, c_prev);
    LstmStep {
        hx,
        gates,
        c_prev: c_prev.to_owned(),
        c,
        tanh_c,
        h,
    }
}

/// Adjoint of one LSTM step given upstream `dh` and `dc` (the latter
/// already holding the carry from step t+1). Returns `(dh_prev, dc_prev, dx)`.
pub(crate) fn lstm_backward(
    step: &LstmStep,
    dh: &Array1<f64>,
    dc_next: &Array1<f64>,
    p: &LstmParams,
    g: &mut LstmParams,
) -> (Array1<f64>, Array1<f64>, Array1<f64>) {
    let gt = &step.gates;
    let d_o = dh * &step.tanh_c;
    let dc = dc_next + &(dh * &gt.output * &tanh_grad(&step.tanh_c));
    let d_f = &dc * &step.c_prev;
    let d_i = &dc * &gt.candidate;
    let d_g = &dc * &gt.input;
    let dc_prev = &dc * &gt.forget;

    let af = d_f * sigmoid_grad(&gt.forget);
    let ai = d_i * sigmoid_grad(&gt.input);
    let ag = d_g * tanh_grad(&gt.candidate);
    let ao = d_o * sigmoid_grad(&gt.output);

    outer_acc(&mut g.w_f, &af, &step.hx);
    outer_acc(&mut g.w_i, &ai, &step.hx);
    outer_acc(&mut g.w_g, &ag, &step.hx);
    outer_acc(&mut g.w_o, &ao, &step.hx);
    g.b_f += &af;
    g.b_i += &ai;
    g.b_g += &ag;
    g.b_o += &ao;

    let dhx = p.w_f.t().dot(&af) + p.w_i.t().dot(&ai) + p.w_g.t().dot(&ag) + p.w_o.t().dot(&ao);
    let (dh_prev, dx) = split(dhx, dh.len());
    (dh_prev, dc_prev, dx)
}
