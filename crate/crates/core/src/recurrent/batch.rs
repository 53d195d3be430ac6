//! Minibatch passes that share the run of leading padding across records.
//!
//! Every record starts from the zero state, so records whose processed order
//! begins with `k` padding ids all pass through the same first `k` states.
//! Those steps are computed once per batch. Going backward, the adjoints that
//! reach each shared state are summed before being pushed further back; the
//! recursion is linear in the adjoint, so the result equals the sum of the
//! per-record gradients up to floating-point reassociation. Forward outputs
//! are bitwise identical to the per-record path.

use ndarray::{s, Array1, Array2, ArrayView1};

use super::activations::softmax;
use super::cells::{
    gru_backward, gru_forward, lstm_backward, lstm_forward, srnn_backward, srnn_forward, GruStep,
    LstmStep, SrnnStep,
};
use super::network::{head_backward, head_forward};
use super::params::{EncoderParams, GruParams, LstmParams, Parameters, SrnnParams};
use super::{ModelConfig, ModelError, RecurrentClassifier};
use crate::corpus::{TokenSequence, PAD_ID};

#[derive(Clone, Copy)]
enum Cell<'a> {
    Srnn(&'a SrnnParams),
    Gru(&'a GruParams),
    Lstm(&'a LstmParams),
}

enum CellGrad<'a> {
    Srnn(&'a mut SrnnParams),
    Gru(&'a mut GruParams),
    Lstm(&'a mut LstmParams),
}

enum Step {
    Srnn(SrnnStep),
    Gru(GruStep),
    Lstm(LstmStep),
}

/// Hidden state plus the LSTM cell state; also used for adjoints.
#[derive(Clone)]
struct State {
    h: Array1<f64>,
    c: Option<Array1<f64>>,
}

impl State {
    fn add(&mut self, other: &State) {
        self.h += &other.h;
        if let (Some(c), Some(o)) = (self.c.as_mut(), other.c.as_ref()) {
            *c += o;
        }
    }
}

impl Step {
    fn state(&self) -> State {
        match self {
            Step::Srnn(s) => State {
                h: s.h.clone(),
                c: None,
            },
            Step::Gru(s) => State {
                h: s.h.clone(),
                c: None,
            },
            Step::Lstm(s) => State {
                h: s.h.clone(),
                c: Some(s.c.clone()),
            },
        }
    }
}

impl Cell<'_> {
    fn hidden_dim(&self) -> usize {
        match self {
            Cell::Srnn(p) => p.w_h.nrows(),
            Cell::Gru(p) => p.hidden_dim(),
            Cell::Lstm(p) => p.hidden_dim(),
        }
    }

    fn zero(&self) -> State {
        let h = self.hidden_dim();
        let c = matches!(self, Cell::Lstm(_)).then(|| Array1::zeros(h));
        State {
            h: Array1::zeros(h),
            c,
        }
    }

    fn forward(&self, x: ArrayView1<f64>, s: &State) -> Step {
        match self {
            Cell::Srnn(p) => Step::Srnn(srnn_forward(x, s.h.view(), p)),
            Cell::Gru(p) => Step::Gru(gru_forward(x, s.h.view(), p)),
            Cell::Lstm(p) => {
                Step::Lstm(lstm_forward(x, s.h.view(), s.c.as_ref().unwrap().view(), p))
            }
        }
    }

    /// Returns the adjoint of the previous state and of the input.
    fn backward(&self, step: &Step, adj: &State, g: &mut CellGrad) -> (State, Array1<f64>) {
        match (self, step, g) {
            (Cell::Srnn(p), Step::Srnn(st), CellGrad::Srnn(g)) => {
                let (h, dx) = srnn_backward(st, &adj.h, p, g);
                (State { h, c: None }, dx)
            }
            (Cell::Gru(p), Step::Gru(st), CellGrad::Gru(g)) => {
                let (h, dx) = gru_backward(st, &adj.h, p, g);
                (State { h, c: None }, dx)
            }
            (Cell::Lstm(p), Step::Lstm(st), CellGrad::Lstm(g)) => {
                let (h, c, dx) = lstm_backward(st, &adj.h, adj.c.as_ref().unwrap(), p, g);
                (State { h, c: Some(c) }, dx)
            }
            _ => unreachable!("cell, step and gradient kinds are matched by construction"),
        }
    }
}

/// One direction's pass over a batch: input ids in processing order.
struct DirectionPass {
    orders: Vec<Vec<usize>>,
    /// Steps over the longest shared padding run.
    prefix: Vec<Step>,
    /// Leading padding count per record.
    shared: Vec<usize>,
    /// Steps after the shared run (empty when not kept).
    tails: Vec<Vec<Step>>,
    finals: Vec<Array1<f64>>,
}

fn leading_pad(ids: &[usize]) -> usize {
    ids.iter().take_while(|&&id| id == PAD_ID).count()
}

fn forward_direction(
    cell: Cell,
    table: &Array2<f64>,
    orders: Vec<Vec<usize>>,
    keep: bool,
) -> DirectionPass {
    let shared: Vec<usize> = orders.iter().map(|o| leading_pad(o)).collect();
    let longest = shared.iter().copied().max().unwrap_or(0);
    let mut prefix: Vec<Step> = Vec::with_capacity(longest);
    let mut state = cell.zero();
    for _ in 0..longest {
        let step = cell.forward(table.row(PAD_ID), &state);
        state = step.state();
        prefix.push(step);
    }
    let mut tails = Vec::with_capacity(if keep { orders.len() } else { 0 });
    let mut finals = Vec::with_capacity(orders.len());
    for (ids, &k) in orders.iter().zip(&shared) {
        let mut state = if k == 0 {
            cell.zero()
        } else {
            prefix[k - 1].state()
        };
        let mut steps = Vec::new();
        for &id in &ids[k..] {
            let step = cell.forward(table.row(id), &state);
            state = step.state();
            if keep {
                steps.push(step);
            }
        }
        finals.push(state.h);
        if keep {
            tails.push(steps);
        }
    }
    DirectionPass {
        orders,
        prefix,
        shared,
        tails,
        finals,
    }
}

fn backward_direction(
    cell: Cell,
    g: &mut CellGrad,
    d_embedding: &mut Array2<f64>,
    pass: &DirectionPass,
    d_finals: &[Array1<f64>],
) {
    let mut at_shared: Vec<Option<State>> = vec![None; pass.prefix.len() + 1];
    for (i, d_final) in d_finals.iter().enumerate() {
        let k = pass.shared[i];
        let mut adj = State {
            h: d_final.clone(),
            c: cell.zero().c,
        };
        for (j, step) in pass.tails[i].iter().enumerate().rev() {
            let (prev, dx) = cell.backward(step, &adj, g);
            d_embedding
                .row_mut(pass.orders[i][k + j])
                .scaled_add(1.0, &dx);
            adj = prev;
        }
        if k > 0 {
            match at_shared[k].as_mut() {
                Some(acc) => acc.add(&adj),
                None => at_shared[k] = Some(adj),
            }
        }
    }
    let mut carry: Option<State> = None;
    for t in (0..pass.prefix.len()).rev() {
        let adj = match (at_shared[t + 1].take(), carry.take()) {
            (Some(mut a), Some(c)) => {
                a.add(&c);
                a
            }
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => continue,
        };
        let (prev, dx) = cell.backward(&pass.prefix[t], &adj, g);
        d_embedding.row_mut(PAD_ID).scaled_add(1.0, &dx);
        carry = Some(prev);
    }
}

fn directions(enc: &EncoderParams) -> Vec<(Cell<'_>, bool)> {
    match enc {
        EncoderParams::Srnn(p) => vec![(Cell::Srnn(p), false)],
        EncoderParams::Gru(p) => vec![(Cell::Gru(p), false)],
        EncoderParams::Lstm(p) => vec![(Cell::Lstm(p), false)],
        EncoderParams::Blstm { forward, backward } => {
            vec![(Cell::Lstm(forward), false), (Cell::Lstm(backward), true)]
        }
    }
}

fn direction_grads(enc: &mut EncoderParams) -> Vec<CellGrad<'_>> {
    match enc {
        EncoderParams::Srnn(p) => vec![CellGrad::Srnn(p)],
        EncoderParams::Gru(p) => vec![CellGrad::Gru(p)],
        EncoderParams::Lstm(p) => vec![CellGrad::Lstm(p)],
        EncoderParams::Blstm { forward, backward } => {
            vec![CellGrad::Lstm(forward), CellGrad::Lstm(backward)]
        }
    }
}

/// Intermediates of a minibatch forward pass.
pub struct BatchCache {
    config: ModelConfig,
    directions: Vec<DirectionPass>,
    layer_inputs: Vec<Vec<Array1<f64>>>,
    hidden_pre: Vec<Vec<Array1<f64>>>,
    probabilities: Vec<Array1<f64>>,
}

impl BatchCache {
    pub fn probabilities(&self) -> &[Array1<f64>] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

impl RecurrentClassifier {
    fn run_batch(&self, seqs: &[&TokenSequence], keep: bool) -> Result<BatchCache, ModelError> {
        let table = &self.params.embedding;
        for seq in seqs {
            if seq.is_empty() {
                return Err(ModelError::Shape("empty sequence".into()));
            }
            if let Some(&id) = seq.ids().iter().find(|&&id| id >= table.nrows()) {
                return Err(ModelError::IdOutOfRange {
                    id,
                    rows: table.nrows(),
                });
            }
        }
        let passes: Vec<DirectionPass> = directions(&self.params.encoder)
            .into_iter()
            .map(|(cell, reversed)| {
                let orders = seqs
                    .iter()
                    .map(|seq| {
                        let mut ids = seq.ids().to_vec();
                        if reversed {
                            ids.reverse();
                        }
                        ids
                    })
                    .collect();
                forward_direction(cell, table, orders, keep)
            })
            .collect();
        let mut cache = BatchCache {
            config: self.config.clone(),
            directions: Vec::new(),
            layer_inputs: Vec::with_capacity(seqs.len()),
            hidden_pre: Vec::with_capacity(seqs.len()),
            probabilities: Vec::with_capacity(seqs.len()),
        };
        for i in 0..seqs.len() {
            let parts: Vec<&Array1<f64>> = passes.iter().map(|p| &p.finals[i]).collect();
            let feature = if parts.len() == 1 {
                parts[0].clone()
            } else {
                ndarray::concatenate(
                    ndarray::Axis(0),
                    &parts.iter().map(|a| a.view()).collect::<Vec<_>>(),
                )
                .expect("direction outputs are 1-D")
            };
            let (inputs, pres, logits) = head_forward(&self.params.head, &feature);
            cache.probabilities.push(softmax(logits.view()));
            if keep {
                cache.layer_inputs.push(inputs);
                cache.hidden_pre.push(pres);
            }
        }
        if keep {
            cache.directions = passes;
        }
        Ok(cache)
    }

    /// Class probabilities for each sequence; identical to calling
    /// [`RecurrentClassifier::probabilities`] on each one.
    pub fn probabilities_batch(
        &self,
        seqs: &[&TokenSequence],
    ) -> Result<Vec<Array1<f64>>, ModelError> {
        Ok(self.run_batch(seqs, false)?.probabilities)
    }

    /// Forward pass over a minibatch, keeping what the backward pass needs.
    pub fn forward_batch(&self, seqs: &[&TokenSequence]) -> Result<BatchCache, ModelError> {
        self.run_batch(seqs, true)
    }

    /// Adds the summed (not averaged) loss gradient of the batch into `grads`.
    pub fn backward_batch_into(
        &self,
        cache: &BatchCache,
        one_hots: &[ArrayView1<f64>],
        grads: &mut Parameters,
    ) -> Result<(), ModelError> {
        if cache.config != self.config {
            return Err(ModelError::StaleCache(
                "cache was produced by a model with a different configuration".into(),
            ));
        }
        if one_hots.len() != cache.len() {
            return Err(ModelError::Shape(format!(
                "{} targets for a batch of {}",
                one_hots.len(),
                cache.len()
            )));
        }
        if let Some(y) = one_hots.iter().find(|y| y.len() != self.config.n_classes) {
            return Err(ModelError::Shape(format!(
                "one-hot length {} != {} classes",
                y.len(),
                self.config.n_classes
            )));
        }
        let n_dirs = cache.directions.len();
        let mut d_finals: Vec<Vec<Array1<f64>>> = vec![Vec::with_capacity(cache.len()); n_dirs];
        for (i, y) in one_hots.iter().enumerate() {
            let d_feature = head_backward(
                &self.params.head,
                &mut grads.head,
                &cache.probabilities[i],
                &cache.layer_inputs[i],
                &cache.hidden_pre[i],
                *y,
            );
            let hdim = d_feature.len() / n_dirs;
            for (d, out) in d_finals.iter_mut().enumerate() {
                out.push(d_feature.slice(s![d * hdim..(d + 1) * hdim]).to_owned());
            }
        }
        let cells = directions(&self.params.encoder);
        let mut cell_grads = direction_grads(&mut grads.encoder);
        if cells.len() != n_dirs || cell_grads.len() != n_dirs {
            return Err(ModelError::StaleCache(
                "cache, parameters and gradient disagree on cell kind".into(),
            ));
        }
        for (d, pass) in cache.directions.iter().enumerate() {
            backward_direction(
                cells[d].0,
                &mut cell_grads[d],
                &mut grads.embedding,
                pass,
                &d_finals[d],
            );
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrent::CellKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(kind: CellKind, seed: u64) -> RecurrentClassifier {
        let cfg = ModelConfig::new(kind, 12, 4, 5, 3, 7);
        RecurrentClassifier::new(cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn batch() -> Vec<TokenSequence> {
        [
            vec![0, 0, 0, 3, 4, 5, 0],
            vec![0, 0, 7, 2, 9, 11, 1],
            vec![0, 0, 0, 0, 0, 0, 0],
            vec![6, 5, 4, 3, 2, 1, 0],
            vec![0, 0, 0, 8, 8, 0, 0],
            vec![0, 10],
        ]
        .into_iter()
        .map(TokenSequence::from_ids)
        .collect()
    }

    #[test]
    fn batch_matches_per_record() {
        let seqs = batch();
        let refs: Vec<&TokenSequence> = seqs.iter().collect();
        let labels = [0usize, 2, 1, 1, 0, 2];
        for kind in CellKind::ALL {
            let m = model(kind, 3);
            let ys: Vec<Array1<f64>> = labels
                .iter()
                .map(|&l| Array1::from_shape_fn(3, |k| if k == l { 1.0 } else { 0.0 }))
                .collect();
            let mut expected = m.params.zeros_like();
            let mut expected_probs = Vec::new();
            for (seq, y) in seqs.iter().zip(&ys) {
                let (p, cache) = m.forward_pass(seq).unwrap();
                m.backward_into(&cache, y.view(), &mut expected).unwrap();
                expected_probs.push(p);
            }
            let cache = m.forward_batch(&refs).unwrap();
            assert_eq!(
                cache.probabilities(),
                &expected_probs[..],
                "{kind:?} probabilities must be bitwise equal"
            );
            assert_eq!(m.probabilities_batch(&refs).unwrap(), expected_probs);
            let mut got = m.params.zeros_like();
            let views: Vec<ArrayView1<f64>> = ys.iter().map(|y| y.view()).collect();
            m.backward_batch_into(&cache, &views, &mut got).unwrap();
            for (a, b) in expected.tensors().iter().zip(got.tensors()) {
                for (x, y) in a.data.iter().zip(b.data) {
                    assert!(
                        (x - y).abs() <= 1e-12 * (1.0 + x.abs()),
                        "{kind:?} {}: {x} vs {y}",
                        a.name
                    );
                }
            }
        }
    }

    #[test]
    fn batch_rejects_bad_input() {
        let m = model(CellKind::Gru, 0);
        let empty = TokenSequence::from_ids(vec![]);
        assert!(m.forward_batch(&[&empty]).is_err());
        let bad = TokenSequence::from_ids(vec![0, 99]);
        assert!(matches!(
            m.forward_batch(&[&bad]),
            Err(ModelError::IdOutOfRange { id: 99, .. })
        ));
        let ok = TokenSequence::from_ids(vec![0, 1]);
        let cache = m.forward_batch(&[&ok]).unwrap();
        let mut g = m.params.zeros_like();
        assert!(m.backward_batch_into(&cache, &[], &mut g).is_err());
    }
}
