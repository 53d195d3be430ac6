//! Parameter containers for every cell kind and the classifier head.
//!
//! Gradients and Adam moments reuse the same containers, so every
//! optimizer-side operation walks parameters through [`Parameters::tensors`]
//! / [`Parameters::slices_mut`], which always enumerate tensors in the same
//! order.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CellKind, ModelConfig, ModelError};

/// Read-only view of one named parameter tensor.
#[derive(Clone, Debug)]
pub struct TensorView<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [f64],
}

/// Owned, serializable form of one named tensor (row-major data).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

fn glorot<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-limit..=limit))
}

fn view2<'a>(name: String, a: &'a Array2<f64>) -> TensorView<'a> {
    TensorView {
        name,
        shape: a.shape().to_vec(),
        data: a.as_slice().expect("standard layout"),
    }
}

fn view1<'a>(name: String, a: &'a Array1<f64>) -> TensorView<'a> {
    TensorView {
        name,
        shape: vec![a.len()],
        data: a.as_slice().expect("standard layout"),
    }
}

/// `h_t = σ(W_h [h_{t-1}, x_t] + b_h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SrnnParams {
    pub w_h: Array2<f64>,
    pub b_h: Array1<f64>,
}

/// Update, reset and candidate weights over `[h_{t-1}, x_t]`. Biases are
/// `None` in strict mode.
#[derive(Clone, Debug, PartialEq)]
pub struct GruParams {
    pub w_z: Array2<f64>,
    pub w_r: Array2<f64>,
    pub w_c: Array2<f64>,
    pub b_z: Option<Array1<f64>>,
    pub b_r: Option<Array1<f64>>,
    pub b_c: Option<Array1<f64>>,
}

/// Forget, input, candidate and output weights over `[h_{t-1}, x_t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub w_f: Array2<f64>,
    pub w_i: Array2<f64>,
    pub w_g: Array2<f64>,
    pub w_o: Array2<f64>,
    pub b_f: Array1<f64>,
    pub b_i: Array1<f64>,
    pub b_g: Array1<f64>,
    pub b_o: Array1<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum EncoderParams {
    Srnn(SrnnParams),
    Gru(GruParams),
    Lstm(LstmParams),
    Blstm {
        forward: LstmParams,
        backward: LstmParams,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    /// `out x in`
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// ReLU hidden layers followed by the softmax output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadParams {
    pub hidden: Vec<DenseLayer>,
    pub output: DenseLayer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    /// `(vocab_capacity + 2) x E`; rows 0 and 1 are PAD and OOV.
    pub embedding: Array2<f64>,
    pub encoder: EncoderParams,
    pub head: HeadParams,
}

/// Builds each matrix either zero-filled or Glorot-uniform.
trait Filler {
    fn matrix(&mut self, rows: usize, cols: usize) -> Array2<f64>;
}

struct Zeros;

impl Filler for Zeros {
    fn matrix(&mut self, rows: usize, cols: usize) -> Array2<f64> {
        Array2::zeros((rows, cols))
    }
}

struct Glorot<'r, R>(&'r mut R);

impl<R: Rng> Filler for Glorot<'_, R> {
    fn matrix(&mut self, rows: usize, cols: usize) -> Array2<f64> {
        glorot(rows, cols, self.0)
    }
}

impl SrnnParams {
    fn build(h: usize, e: usize, f: &mut impl Filler) -> Self {
        Self {
            w_h: f.matrix(h, h + e),
            b_h: Array1::zeros(h),
        }
    }
}

impl GruParams {
    fn build(h: usize, e: usize, with_bias: bool, f: &mut impl Filler) -> Self {
        let bias = || with_bias.then(|| Array1::zeros(h));
        Self {
            w_z: f.matrix(h, h + e),
            w_r: f.matrix(h, h + e),
            w_c: f.matrix(h, h + e),
            b_z: bias(),
            b_r: bias(),
            b_c: bias(),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_z.nrows()
    }
}

impl LstmParams {
    fn build(h: usize, e: usize, f: &mut impl Filler) -> Self {
        Self {
            w_f: f.matrix(h, h + e),
            w_i: f.matrix(h, h + e),
            w_g: f.matrix(h, h + e),
            w_o: f.matrix(h, h + e),
            b_f: Array1::zeros(h),
            b_i: Array1::zeros(h),
            b_g: Array1::zeros(h),
            b_o: Array1::zeros(h),
        }
    }

    /// Zero weights and biases for a hidden size `h` and input size `e`.
    pub fn zeros(h: usize, e: usize) -> Self {
        Self::build(h, e, &mut Zeros)
    }

    pub fn random<R: Rng>(h: usize, e: usize, rng: &mut R) -> Self {
        Self::build(h, e, &mut Glorot(rng))
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_f.nrows()
    }

    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<TensorView<'a>>) {
        for (n, w) in [
            ("w_f", &self.w_f),
            ("w_i", &self.w_i),
            ("w_g", &self.w_g),
            ("w_o", &self.w_o),
        ] {
            out.push(view2(format!("{prefix}.{n}"), w));
        }
        for (n, b) in [
            ("b_f", &self.b_f),
            ("b_i", &self.b_i),
            ("b_g", &self.b_g),
            ("b_o", &self.b_o),
        ] {
            out.push(view1(format!("{prefix}.{n}"), b));
        }
    }

    fn slices_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        for w in [&mut self.w_f, &mut self.w_i, &mut self.w_g, &mut self.w_o] {
            out.push(w.as_slice_mut().expect("standard layout"));
        }
        for b in [&mut self.b_f, &mut self.b_i, &mut self.b_g, &mut self.b_o] {
            out.push(b.as_slice_mut().expect("standard layout"));
        }
    }
}

impl SrnnParams {
    pub fn zeros(h: usize, e: usize) -> Self {
        Self::build(h, e, &mut Zeros)
    }
}

impl GruParams {
    pub fn zeros(h: usize, e: usize, with_bias: bool) -> Self {
        Self::build(h, e, with_bias, &mut Zeros)
    }

    pub fn random<R: Rng>(h: usize, e: usize, with_bias: bool, rng: &mut R) -> Self {
        Self::build(h, e, with_bias, &mut Glorot(rng))
    }
}

impl DenseLayer {
    fn build(out: usize, inp: usize, f: &mut impl Filler) -> Self {
        Self {
            w: f.matrix(out, inp),
            b: Array1::zeros(out),
        }
    }
}

impl Parameters {
    fn build(cfg: &ModelConfig, f: &mut impl Filler) -> Result<Self, ModelError> {
        cfg.validate()?;
        let (h, e) = (cfg.hidden_dim, cfg.embed_dim);
        let embedding = f.matrix(cfg.embedding_rows(), e);
        let encoder = match cfg.cell_kind {
            CellKind::Srnn => EncoderParams::Srnn(SrnnParams::build(h, e, f)),
            CellKind::Gru => {
                EncoderParams::Gru(GruParams::build(h, e, !cfg.strict_paper_gru_bias, f))
            }
            CellKind::Lstm => EncoderParams::Lstm(LstmParams::build(h, e, f)),
            CellKind::Blstm => EncoderParams::Blstm {
                forward: LstmParams::build(h, e, f),
                backward: LstmParams::build(h, e, f),
            },
        };
        let mut width = cfg.feature_dim();
        let mut hidden = Vec::with_capacity(cfg.dense_dims.len());
        for &d in &cfg.dense_dims {
            hidden.push(DenseLayer::build(d, width, f));
            width = d;
        }
        let output = DenseLayer::build(cfg.n_classes, width, f);
        Ok(Self {
            embedding,
            encoder,
            head: HeadParams { hidden, output },
        })
    }

    /// All-zero parameters (also the gradient / moment accumulator shape).
    pub fn zeros(cfg: &ModelConfig) -> Result<Self, ModelError> {
        Self::build(cfg, &mut Zeros)
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init<R: Rng>(cfg: &ModelConfig, rng: &mut R) -> Result<Self, ModelError> {
        Self::build(cfg, &mut Glorot(rng))
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill(0.0);
        z
    }

    pub fn fill(&mut self, value: f64) {
        for s in self.slices_mut() {
            s.fill(value);
        }
    }

    /// Every tensor with its stable name, in canonical order.
    pub fn tensors(&self) -> Vec<TensorView<'_>> {
        let mut out = vec![view2("embedding".into(), &self.embedding)];
        match &self.encoder {
            EncoderParams::Srnn(p) => {
                out.push(view2("srnn.w_h".into(), &p.w_h));
                out.push(view1("srnn.b_h".into(), &p.b_h));
            }
            EncoderParams::Gru(p) => {
                for (n, w) in [("w_z", &p.w_z), ("w_r", &p.w_r), ("w_c", &p.w_c)] {
                    out.push(view2(format!("gru.{n}"), w));
                }
                for (n, b) in [("b_z", &p.b_z), ("b_r", &p.b_r), ("b_c", &p.b_c)] {
                    if let Some(b) = b {
                        out.push(view1(format!("gru.{n}"), b));
                    }
                }
            }
            EncoderParams::Lstm(p) => p.tensors("lstm", &mut out),
            EncoderParams::Blstm { forward, backward } => {
                forward.tensors("blstm.forward", &mut out);
                backward.tensors("blstm.backward", &mut out);
            }
        }
        for (k, layer) in self.head.hidden.iter().enumerate() {
            out.push(view2(format!("dense{k}.w"), &layer.w));
            out.push(view1(format!("dense{k}.b"), &layer.b));
        }
        out.push(view2("output.w".into(), &self.head.output.w));
        out.push(view1("output.b".into(), &self.head.output.b));
        out
    }

    /// Mutable slices in the same order as [`Parameters::tensors`].
    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> =
            vec![self.embedding.as_slice_mut().expect("standard layout")];
        match &mut self.encoder {
            EncoderParams::Srnn(p) => {
                out.push(p.w_h.as_slice_mut().unwrap());
                out.push(p.b_h.as_slice_mut().unwrap());
            }
            EncoderParams::Gru(p) => {
                for w in [&mut p.w_z, &mut p.w_r, &mut p.w_c] {
                    out.push(w.as_slice_mut().unwrap());
                }
                for b in [&mut p.b_z, &mut p.b_r, &mut p.b_c].into_iter().flatten() {
                    out.push(b.as_slice_mut().unwrap());
                }
            }
            EncoderParams::Lstm(p) => p.slices_mut(&mut out),
            EncoderParams::Blstm { forward, backward } => {
                forward.slices_mut(&mut out);
                backward.slices_mut(&mut out);
            }
        }
        for layer in &mut self.head.hidden {
            out.push(layer.w.as_slice_mut().unwrap());
            out.push(layer.b.as_slice_mut().unwrap());
        }
        out.push(self.head.output.w.as_slice_mut().unwrap());
        out.push(self.head.output.b.as_slice_mut().unwrap());
        out
    }

    pub fn len(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &Parameters, scale: f64) -> Result<(), ModelError> {
        let src = other.tensors();
        let dst = self.slices_mut();
        if src.len() != dst.len() {
            return Err(ModelError::Shape(
                "parameter sets have different tensor counts".into(),
            ));
        }
        for (d, s) in dst.into_iter().zip(src) {
            if d.len() != s.data.len() {
                return Err(ModelError::Shape(format!(
                    "tensor {} length mismatch",
                    s.name
                )));
            }
            for (a, b) in d.iter_mut().zip(s.data) {
                *a += scale * b;
            }
        }
        Ok(())
    }

    pub fn to_named(&self) -> Vec<NamedTensor> {
        self.tensors()
            .into_iter()
            .map(|t| NamedTensor {
                name: t.name,
                shape: t.shape,
                data: t.data.to_vec(),
            })
            .collect()
    }

    /// Rebuilds parameters for `cfg` from tensors in canonical order,
    /// checking every name and shape.
    pub fn from_named(cfg: &ModelConfig, tensors: &[NamedTensor]) -> Result<Self, ModelError> {
        let mut params = Self::zeros(cfg)?;
        let expected: Vec<(String, Vec<usize>)> = params
            .tensors()
            .into_iter()
            .map(|t| (t.name, t.shape))
            .collect();
        if expected.len() != tensors.len() {
            return Err(ModelError::Shape(format!(
                "expected {} tensors, found {}",
                expected.len(),
                tensors.len()
            )));
        }
        for (((name, shape), t), dst) in expected.iter().zip(tensors).zip(params.slices_mut()) {
            if *name != t.name || *shape != t.shape || t.data.len() != dst.len() {
                return Err(ModelError::Shape(format!(
                    "tensor {:?} {:?} with {} values does not match expected {name:?} {shape:?}",
                    t.name,
                    t.shape,
                    t.data.len()
                )));
            }
            dst.copy_from_slice(&t.data);
        }
        Ok(params)
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.data.iter().all(|v| v.is_finite()))
    }
}
