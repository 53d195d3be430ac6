use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;

use super::activations::{cross_entropy, predict, relu, softmax};
use super::cells::{
    gru_backward, gru_forward, lstm_backward, lstm_forward, srnn_backward, srnn_forward, GruStep,
    LstmStep, SrnnStep,
};
use super::params::{EncoderParams, HeadParams, LstmParams, Parameters};
use super::{ModelConfig, ModelError};
use crate::corpus::TokenSequence;

/// Looks up one embedding row per position, giving an `L x E` matrix.
pub fn embed(seq: &TokenSequence, table: &Array2<f64>) -> Result<Array2<f64>, ModelError> {
    let mut out = Array2::zeros((seq.len(), table.ncols()));
    for (t, &id) in seq.ids().iter().enumerate() {
        if id >= table.nrows() {
            return Err(ModelError::IdOutOfRange {
                id,
                rows: table.nrows(),
            });
        }
        out.row_mut(t).assign(&table.row(id));
    }
    Ok(out)
}

/// Per-step intermediates of the recurrent encoder.
#[derive(Clone, Debug)]
pub enum EncoderCache {
    Srnn(Vec<SrnnStep>),
    Gru(Vec<GruStep>),
    Lstm(Vec<LstmStep>),
    /// The backward direction's steps are stored in processing order, i.e.
    /// `backward[0]` consumed position `L-1`.
    Blstm {
        forward: Vec<LstmStep>,
        backward: Vec<LstmStep>,
    },
}

fn run_lstm<'a>(rows: impl Iterator<Item = ArrayView1<'a, f64>>, p: &LstmParams) -> Vec<LstmStep> {
    let h_dim = p.hidden_dim();
    let mut h = Array1::zeros(h_dim);
    let mut c = Array1::zeros(h_dim);
    let mut steps = Vec::new();
    for x in rows {
        let step = lstm_forward(x, h.view(), c.view(), p);
        h.assign(&step.h);
        c.assign(&step.c);
        steps.push(step);
    }
    steps
}

fn encode(embedded: ArrayView2<f64>, params: &EncoderParams) -> (Array1<f64>, EncoderCache) {
    match params {
        EncoderParams::Srnn(p) => {
            let mut h = Array1::zeros(p.w_h.nrows());
            let mut steps = Vec::with_capacity(embedded.nrows());
            for x in embedded.rows() {
                let step = srnn_forward(x, h.view(), p);
                h.assign(&step.h);
                steps.push(step);
            }
            (h, EncoderCache::Srnn(steps))
        }
        EncoderParams::Gru(p) => {
            let mut h = Array1::zeros(p.hidden_dim());
            let mut steps = Vec::with_capacity(embedded.nrows());
            for x in embedded.rows() {
                let step = gru_forward(x, h.view(), p);
                h.assign(&step.h);
                steps.push(step);
            }
            (h, EncoderCache::Gru(steps))
        }
        EncoderParams::Lstm(p) => {
            let steps = run_lstm(embedded.rows().into_iter(), p);
            let h = steps
                .last()
                .map(|s| s.h.clone())
                .unwrap_or_else(|| Array1::zeros(p.hidden_dim()));
            (h, EncoderCache::Lstm(steps))
        }
        EncoderParams::Blstm { forward, backward } => {
            let fwd = run_lstm(embedded.rows().into_iter(), forward);
            let bwd = run_lstm(embedded.rows().into_iter().rev(), backward);
            let hdim = forward.hidden_dim();
            let mut feature = Array1::zeros(2 * hdim);
            if let (Some(f), Some(b)) = (fwd.last(), bwd.last()) {
                feature.slice_mut(s![..hdim]).assign(&f.h);
                feature.slice_mut(s![hdim..]).assign(&b.h);
            }
            (
                feature,
                EncoderCache::Blstm {
                    forward: fwd,
                    backward: bwd,
                },
            )
        }
    }
}

/// Runs the encoder from a zero state and returns the readout feature:
/// `h_L` for sRNN/GRU/LSTM, `[h_fwd_L, h_bwd_1]` for BLSTM.
pub fn run_recurrent(
    embedded: ArrayView2<f64>,
    params: &EncoderParams,
) -> Result<Array1<f64>, ModelError> {
    let (e, h) = match params {
        EncoderParams::Srnn(p) => (p.w_h.ncols() - p.w_h.nrows(), p.w_h.nrows()),
        EncoderParams::Gru(p) => (p.w_z.ncols() - p.w_z.nrows(), p.w_z.nrows()),
        EncoderParams::Lstm(p) | EncoderParams::Blstm { forward: p, .. } => {
            (p.w_f.ncols() - p.w_f.nrows(), p.hidden_dim())
        }
    };
    if embedded.ncols() != e {
        return Err(ModelError::Shape(format!(
            "embedded width {} but cell expects {e} (hidden {h})",
            embedded.ncols()
        )));
    }
    if embedded.nrows() == 0 {
        return Err(ModelError::Shape("empty sequence".into()));
    }
    Ok(encode(embedded, params).0)
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    config: ModelConfig,
    ids: Vec<usize>,
    encoder: EncoderCache,
    feature: Array1<f64>,
    /// Inputs to each head layer (feature, then each ReLU output).
    layer_inputs: Vec<Array1<f64>>,
    /// Pre-activations of each hidden dense layer.
    hidden_pre: Vec<Array1<f64>>,
    probabilities: Array1<f64>,
}

impl ForwardCache {
    pub fn probabilities(&self) -> &Array1<f64> {
        &self.probabilities
    }

    pub fn feature(&self) -> &Array1<f64> {
        &self.feature
    }

    pub fn encoder(&self) -> &EncoderCache {
        &self.encoder
    }
}

/// Embedding -> recurrent encoder -> dense ReLU layers -> softmax.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrentClassifier {
    pub config: ModelConfig,
    pub params: Parameters,
}

pub(super) fn head_forward(
    head: &HeadParams,
    feature: &Array1<f64>,
) -> (Vec<Array1<f64>>, Vec<Array1<f64>>, Array1<f64>) {
    let mut inputs = vec![feature.clone()];
    let mut pres = Vec::with_capacity(head.hidden.len());
    for layer in &head.hidden {
        let pre = layer.w.dot(inputs.last().unwrap()) + &layer.b;
        inputs.push(relu(pre.view()));
        pres.push(pre);
    }
    let logits = head.output.w.dot(inputs.last().unwrap()) + &head.output.b;
    (inputs, pres, logits)
}

impl RecurrentClassifier {
    /// Fresh model with seeded Glorot-uniform weights.
    pub fn new<R: Rng>(config: ModelConfig, rng: &mut R) -> Result<Self, ModelError> {
        let params = Parameters::init(&config, rng)?;
        Ok(Self { config, params })
    }

    /// Model with every parameter zero.
    pub fn zeros(config: ModelConfig) -> Result<Self, ModelError> {
        let params = Parameters::zeros(&config)?;
        Ok(Self { config, params })
    }

    pub fn forward_pass(
        &self,
        seq: &TokenSequence,
    ) -> Result<(Array1<f64>, ForwardCache), ModelError> {
        if seq.is_empty() {
            return Err(ModelError::Shape("empty sequence".into()));
        }
        let embedded = embed(seq, &self.params.embedding)?;
        let (feature, encoder) = encode(embedded.view(), &self.params.encoder);
        let (layer_inputs, hidden_pre, logits) = head_forward(&self.params.head, &feature);
        let probabilities = softmax(logits.view());
        let cache = ForwardCache {
            config: self.config.clone(),
            ids: seq.ids().to_vec(),
            encoder,
            feature,
            layer_inputs,
            hidden_pre,
            probabilities: probabilities.clone(),
        };
        Ok((probabilities, cache))
    }

    pub fn probabilities(&self, seq: &TokenSequence) -> Result<Array1<f64>, ModelError> {
        Ok(self.forward_pass(seq)?.0)
    }

    pub fn predict(&self, seq: &TokenSequence) -> Result<usize, ModelError> {
        Ok(predict(self.probabilities(seq)?.view()))
    }

    pub fn loss(&self, seq: &TokenSequence, one_hot: ArrayView1<f64>) -> Result<f64, ModelError> {
        Ok(cross_entropy(self.probabilities(seq)?.view(), one_hot))
    }

    /// Gradient of the cross-entropy loss with respect to every parameter.
    pub fn backward_pass(
        &self,
        cache: &ForwardCache,
        one_hot: ArrayView1<f64>,
    ) -> Result<Parameters, ModelError> {
        let mut grads = self.params.zeros_like();
        self.backward_into(cache, one_hot, &mut grads)?;
        Ok(grads)
    }

    /// Adds the loss gradient into `grads`.
    ///
    /// The softmax/cross-entropy adjoint is `p - y`, the derivative of the
    /// unfloored log loss.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        one_hot: ArrayView1<f64>,
        grads: &mut Parameters,
    ) -> Result<(), ModelError> {
        if cache.config != self.config {
            return Err(ModelError::StaleCache(
                "cache was produced by a model with a different configuration".into(),
            ));
        }
        if one_hot.len() != self.config.n_classes {
            return Err(ModelError::Shape(format!(
                "one-hot length {} != {} classes",
                one_hot.len(),
                self.config.n_classes
            )));
        }
        let d_feature = head_backward(
            &self.params.head,
            &mut grads.head,
            &cache.probabilities,
            &cache.layer_inputs,
            &cache.hidden_pre,
            one_hot,
        );

        let ids = &cache.ids;
        let d_embed = |pos: usize, dx: &Array1<f64>, g: &mut Array2<f64>| {
            g.row_mut(ids[pos]).scaled_add(1.0, dx);
        };
        match (&self.params.encoder, &mut grads.encoder, &cache.encoder) {
            (EncoderParams::Srnn(p), EncoderParams::Srnn(g), EncoderCache::Srnn(steps)) => {
                let mut dh = d_feature;
                for (t, step) in steps.iter().enumerate().rev() {
                    let (dh_prev, dx) = srnn_backward(step, &dh, p, g);
                    d_embed(t, &dx, &mut grads.embedding);
                    dh = dh_prev;
                }
            }
            (EncoderParams::Gru(p), EncoderParams::Gru(g), EncoderCache::Gru(steps)) => {
                let mut dh = d_feature;
                for (t, step) in steps.iter().enumerate().rev() {
                    let (dh_prev, dx) = gru_backward(step, &dh, p, g);
                    d_embed(t, &dx, &mut grads.embedding);
                    dh = dh_prev;
                }
            }
            (EncoderParams::Lstm(p), EncoderParams::Lstm(g), EncoderCache::Lstm(steps)) => {
                lstm_sequence_backward(steps, d_feature, p, g, |t, dx| {
                    d_embed(t, dx, &mut grads.embedding)
                });
            }
            (
                EncoderParams::Blstm {
                    forward: pf,
                    backward: pb,
                },
                EncoderParams::Blstm {
                    forward: gf,
                    backward: gb,
                },
                EncoderCache::Blstm {
                    forward: sf,
                    backward: sb,
                },
            ) => {
                let hdim = pf.hidden_dim();
                let len = sf.len();
                let d_fwd = d_feature.slice(s![..hdim]).to_owned();
                let d_bwd = d_feature.slice(s![hdim..]).to_owned();
                lstm_sequence_backward(sf, d_fwd, pf, gf, |t, dx| {
                    d_embed(t, dx, &mut grads.embedding)
                });
                lstm_sequence_backward(sb, d_bwd, pb, gb, |t, dx| {
                    d_embed(len - 1 - t, dx, &mut grads.embedding)
                });
            }
            _ => {
                return Err(ModelError::StaleCache(
                    "cache, parameters and gradient disagree on cell kind".into(),
                ))
            }
        }
        Ok(())
    }
}

/// Backpropagates `p - y` through the dense head and returns the adjoint of the feature.
pub(super) fn head_backward(
    head: &HeadParams,
    ghead: &mut HeadParams,
    probabilities: &Array1<f64>,
    layer_inputs: &[Array1<f64>],
    hidden_pre: &[Array1<f64>],
    one_hot: ArrayView1<f64>,
) -> Array1<f64> {
    let d_logits = probabilities - &one_hot;
    let last_in = layer_inputs.last().unwrap();
    outer_acc(&mut ghead.output.w, &d_logits, last_in);
    ghead.output.b += &d_logits;
    let mut d_in = head.output.w.t().dot(&d_logits);
    for k in (0..head.hidden.len()).rev() {
        let da = ndarray::Zip::from(&d_in)
            .and(&hidden_pre[k])
            .map_collect(|&d, &a| if a > 0.0 { d } else { 0.0 });
        outer_acc(&mut ghead.hidden[k].w, &da, &layer_inputs[k]);
        ghead.hidden[k].b += &da;
        d_in = head.hidden[k].w.t().dot(&da);
    }
    d_in
}

fn lstm_sequence_backward(
    steps: &[LstmStep],
    d_final: Array1<f64>,
    p: &LstmParams,
    g: &mut LstmParams,
    mut sink: impl FnMut(usize, &Array1<f64>),
) {
    let mut dh = d_final;
    let mut dc = Array1::zeros(dh.len());
    for (t, step) in steps.iter().enumerate().rev() {
        let (dh_prev, dc_prev, dx) = lstm_backward(step, &dh, &dc, p, g);
        sink(t, &dx);
        dh = dh_prev;
        dc = dc_prev;
    }
}

fn outer_acc(dw: &mut Array2<f64>, a: &Array1<f64>, v: &Array1<f64>) {
    for (mut row, &ai) in dw.rows_mut().into_iter().zip(a) {
        if ai != 0.0 {
            row.scaled_add(ai, v);
        }
    }
}
