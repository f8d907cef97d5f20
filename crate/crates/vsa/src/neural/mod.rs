//! A small feed-forward trainer for label-vector prediction.
//!
//! Models are two-hidden-layer ReLU networks over sparse bag-of-words
//! features. The output stage is one of six heads:
//!
//! * `fc` — one logit per label, trained with per-label binary
//!   cross-entropy;
//! * `hrr` — d real outputs read as a real symbol vector;
//! * `chrr` — 2d outputs read as d Cartesian pairs and converted to
//!   angles with atan2;
//! * `chrr-half` — like `chrr`, but the second hidden layer is split in
//!   two disjoint halves, one feeding the x coordinates and one the y
//!   coordinates, which matches the `hrr` head's weight count;
//! * `chrr-sin` / `chrr-tanh` — d outputs mapped to angles by
//!   pi*sin / pi*tanh.
//!
//! Vector heads train against the similarity loss: one minus the
//! similarity between the decoded prediction and each true label's
//! codebook vector, summed over the label set.

mod grad;
mod io;
mod train;

pub use grad::{chrr_loss, hrr_loss, Gradients};
pub use train::{train, write_loss_log, TrainConfig, TrainLog};

use std::fmt;
use std::str::FromStr;

use crate::chrr::{wrap_angle, CircularVector};
use crate::codec::{Algebra, Codebook, SymbolVector};
use crate::error::VsaError;
use crate::hrr::RealHrrVector;
use crate::seed::rng_from_seed;
use crate::Result;

/// Guard added under the square root when normalizing a Cartesian pair,
/// defining the angle (and a finite gradient) at the origin.
pub const ATAN2_EPSILON: f64 = 1e-12;

/// The output-stage flavor of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeadKind {
    Fc,
    Hrr,
    Chrr,
    ChrrHalf,
    ChrrSin,
    ChrrTanh,
}

impl HeadKind {
    pub fn name(self) -> &'static str {
        match self {
            HeadKind::Fc => "fc",
            HeadKind::Hrr => "hrr",
            HeadKind::Chrr => "chrr",
            HeadKind::ChrrHalf => "chrr-half",
            HeadKind::ChrrSin => "chrr-sin",
            HeadKind::ChrrTanh => "chrr-tanh",
        }
    }

    /// The algebra this head's codebook must use; None for `fc`.
    pub fn algebra(self) -> Option<Algebra> {
        match self {
            HeadKind::Fc => None,
            HeadKind::Hrr => Some(Algebra::Hrr),
            _ => Some(Algebra::Chrr),
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            HeadKind::Fc => 0,
            HeadKind::Hrr => 1,
            HeadKind::Chrr => 2,
            HeadKind::ChrrHalf => 3,
            HeadKind::ChrrSin => 4,
            HeadKind::ChrrTanh => 5,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Result<Self> {
        Ok(match tag {
            0 => HeadKind::Fc,
            1 => HeadKind::Hrr,
            2 => HeadKind::Chrr,
            3 => HeadKind::ChrrHalf,
            4 => HeadKind::ChrrSin,
            5 => HeadKind::ChrrTanh,
            other => {
                return Err(VsaError::BadFormat(format!("unknown head tag {}", other)))
            }
        })
    }
}

impl fmt::Display for HeadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeadKind {
    type Err = VsaError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "fc" => HeadKind::Fc,
            "hrr" => HeadKind::Hrr,
            "chrr" => HeadKind::Chrr,
            "chrr-half" => HeadKind::ChrrHalf,
            "chrr-sin" => HeadKind::ChrrSin,
            "chrr-tanh" => HeadKind::ChrrTanh,
            other => {
                return Err(VsaError::InvalidConfig(format!("unknown head '{}'", other)))
            }
        })
    }
}

/// Row-major dense matrix; rows index the input, columns the output.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Uniform(-1/sqrt(rows), +1/sqrt(rows)) entries.
    fn init_uniform(rows: usize, cols: usize, rng: &mut crate::seed::SeededRng) -> Self {
        use rand::Rng;
        let bound = 1.0 / (rows as f64).sqrt();
        Self {
            rows,
            cols,
            data: (0..rows * cols)
                .map(|_| rng.gen_range(-bound..bound))
                .collect(),
        }
    }

    /// y += x^T W for a dense x.
    fn forward_dense(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (yc, w) in y.iter_mut().zip(row) {
                *yc += xr * w;
            }
        }
    }

    /// y += x^T W for a sparse x of (index, value) pairs.
    fn forward_sparse(&self, x: &[(u32, f64)], y: &mut [f64]) {
        debug_assert_eq!(y.len(), self.cols);
        for &(r, xr) in x {
            let r = r as usize;
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (yc, w) in y.iter_mut().zip(row) {
                *yc += xr * w;
            }
        }
    }

    /// grad_x += W delta.
    fn backprop_input(&self, delta: &[f64], grad_x: &mut [f64]) {
        debug_assert_eq!(delta.len(), self.cols);
        debug_assert_eq!(grad_x.len(), self.rows);
        for (r, gx) in grad_x.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = 0.0;
            for (w, d) in row.iter().zip(delta) {
                acc += w * d;
            }
            *gx += acc;
        }
    }

    /// self += scale * (x outer delta), dense x.
    fn accumulate_outer_dense(&mut self, x: &[f64], delta: &[f64], scale: f64) {
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (w, d) in row.iter_mut().zip(delta) {
                *w += scale * xr * d;
            }
        }
    }

    /// self += scale * (x outer delta), sparse x.
    fn accumulate_outer_sparse(&mut self, x: &[(u32, f64)], delta: &[f64], scale: f64) {
        for &(r, xr) in x {
            let r = r as usize;
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (w, d) in row.iter_mut().zip(delta) {
                *w += scale * xr * d;
            }
        }
    }

    fn add_scaled(&mut self, other: &Matrix, scale: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub(crate) fn data(&self) -> &[f64] {
        &self.data
    }

    fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// The trainable output stage: a single dense map, or the split pair of
/// half-width maps used by `chrr-half`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum HeadStage {
    Dense {
        w: Matrix,
        b: Vec<f64>,
    },
    /// Two disjoint blocks: the first half of the second hidden layer
    /// drives all x coordinates, the second half all y coordinates.
    Split {
        wx: Matrix,
        bx: Vec<f64>,
        wy: Matrix,
        by: Vec<f64>,
    },
}

impl HeadStage {
    fn zeros_like(&self) -> HeadStage {
        match self {
            HeadStage::Dense { w, b } => HeadStage::Dense {
                w: Matrix::zeros(w.rows, w.cols),
                b: vec![0.0; b.len()],
            },
            HeadStage::Split { wx, bx, wy, by } => HeadStage::Split {
                wx: Matrix::zeros(wx.rows, wx.cols),
                bx: vec![0.0; bx.len()],
                wy: Matrix::zeros(wy.rows, wy.cols),
                by: vec![0.0; by.len()],
            },
        }
    }

    fn weight_count(&self) -> usize {
        match self {
            HeadStage::Dense { w, .. } => w.rows * w.cols,
            HeadStage::Split { wx, wy, .. } => wx.rows * wx.cols + wy.rows * wy.cols,
        }
    }
}

/// What the output stage produces for one example.
#[derive(Debug, Clone, PartialEq)]
pub enum HeadOutput {
    /// One logit per label (`fc`).
    Logits(Vec<f64>),
    /// A real symbol vector (`hrr`).
    Code(RealHrrVector),
    /// A circular vector of angles (all `chrr*` heads).
    Angles(CircularVector),
}

/// Two ReLU hidden layers and one of the six output heads.
#[derive(Debug, Clone)]
pub struct MlpModel {
    head: HeadKind,
    input_dim: usize,
    hidden_dim: usize,
    num_labels: usize,
    /// Symbol-vector dimension d; zero for the fc head.
    code_dim: usize,
    normalize_features: bool,
    init_seed: u64,
    w1: Matrix,
    b1: Vec<f64>,
    w2: Matrix,
    b2: Vec<f64>,
    head_stage: HeadStage,
    codebook: Option<Codebook>,
}

/// Intermediate activations kept for backpropagation.
pub(crate) struct Trace {
    pub(crate) features: Vec<(u32, f64)>,
    pub(crate) a1: Vec<f64>,
    pub(crate) a2: Vec<f64>,
    pub(crate) raw: Vec<f64>,
}

impl MlpModel {
    /// A fully connected baseline with `num_labels` output logits.
    pub fn new_fc(
        input_dim: usize,
        hidden_dim: usize,
        num_labels: usize,
        seed: u64,
    ) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 || num_labels == 0 {
            return Err(VsaError::InvalidConfig(
                "model dimensions must be positive".into(),
            ));
        }
        Ok(Self::build(
            HeadKind::Fc,
            input_dim,
            hidden_dim,
            num_labels,
            0,
            None,
            seed,
        ))
    }

    /// A vector-head model. The label count and code dimension come from
    /// the codebook, whose algebra must match the head.
    pub fn new_with_codebook(
        head: HeadKind,
        input_dim: usize,
        hidden_dim: usize,
        codebook: Codebook,
        seed: u64,
    ) -> Result<Self> {
        let algebra = head.algebra().ok_or_else(|| {
            VsaError::InvalidConfig("the fc head takes no codebook; use new_fc".into())
        })?;
        if input_dim == 0 || hidden_dim == 0 {
            return Err(VsaError::InvalidConfig(
                "model dimensions must be positive".into(),
            ));
        }
        if codebook.algebra() != algebra {
            return Err(VsaError::AlgebraMismatch {
                expected: algebra.name(),
                got: codebook.algebra().name(),
            });
        }
        if head == HeadKind::ChrrHalf && hidden_dim % 2 != 0 {
            return Err(VsaError::InvalidConfig(
                "the chrr-half head needs an even hidden size".into(),
            ));
        }
        Ok(Self::build(
            head,
            input_dim,
            hidden_dim,
            codebook.num_labels(),
            codebook.dim(),
            Some(codebook),
            seed,
        ))
    }

    fn build(
        head: HeadKind,
        input_dim: usize,
        hidden_dim: usize,
        num_labels: usize,
        code_dim: usize,
        codebook: Option<Codebook>,
        seed: u64,
    ) -> Self {
        let mut rng = rng_from_seed(seed);
        let init_bias = |fan_in: usize, len: usize, rng: &mut crate::seed::SeededRng| {
            use rand::Rng;
            let bound = 1.0 / (fan_in as f64).sqrt();
            (0..len).map(|_| rng.gen_range(-bound..bound)).collect::<Vec<f64>>()
        };
        let w1 = Matrix::init_uniform(input_dim, hidden_dim, &mut rng);
        let b1 = init_bias(input_dim, hidden_dim, &mut rng);
        let w2 = Matrix::init_uniform(hidden_dim, hidden_dim, &mut rng);
        let b2 = init_bias(hidden_dim, hidden_dim, &mut rng);
        let head_stage = match head {
            HeadKind::Fc => HeadStage::Dense {
                w: Matrix::init_uniform(hidden_dim, num_labels, &mut rng),
                b: init_bias(hidden_dim, num_labels, &mut rng),
            },
            HeadKind::Hrr | HeadKind::ChrrSin | HeadKind::ChrrTanh => HeadStage::Dense {
                w: Matrix::init_uniform(hidden_dim, code_dim, &mut rng),
                b: init_bias(hidden_dim, code_dim, &mut rng),
            },
            HeadKind::Chrr => HeadStage::Dense {
                w: Matrix::init_uniform(hidden_dim, 2 * code_dim, &mut rng),
                b: init_bias(hidden_dim, 2 * code_dim, &mut rng),
            },
            HeadKind::ChrrHalf => {
                let half = hidden_dim / 2;
                HeadStage::Split {
                    wx: Matrix::init_uniform(half, code_dim, &mut rng),
                    bx: init_bias(half, code_dim, &mut rng),
                    wy: Matrix::init_uniform(half, code_dim, &mut rng),
                    by: init_bias(half, code_dim, &mut rng),
                }
            }
        };
        Self {
            head,
            input_dim,
            hidden_dim,
            num_labels,
            code_dim,
            normalize_features: false,
            init_seed: seed,
            w1,
            b1,
            w2,
            b2,
            head_stage,
            codebook,
        }
    }

    pub fn head(&self) -> HeadKind {
        self.head
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn code_dim(&self) -> usize {
        self.code_dim
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    pub fn codebook(&self) -> Option<&Codebook> {
        self.codebook.as_ref()
    }

    /// Scale each example's feature values to unit Euclidean norm before
    /// the first layer. Off by default.
    pub fn set_feature_normalization(&mut self, on: bool) {
        self.normalize_features = on;
    }

    pub fn feature_normalization(&self) -> bool {
        self.normalize_features
    }

    /// Width of the raw (pre-head-transform) output.
    pub fn raw_output_dim(&self) -> usize {
        match self.head {
            HeadKind::Fc => self.num_labels,
            HeadKind::Hrr | HeadKind::ChrrSin | HeadKind::ChrrTanh => self.code_dim,
            HeadKind::Chrr | HeadKind::ChrrHalf => 2 * self.code_dim,
        }
    }

    /// Number of weights between the second hidden layer and the output
    /// (biases excluded); the figure the half-width head matches with
    /// the plain `hrr` head.
    pub fn head_weight_count(&self) -> usize {
        self.head_stage.weight_count()
    }

    fn check_features(&self, features: &[(u32, f64)]) -> Result<()> {
        for &(id, _) in features {
            if id as usize >= self.input_dim {
                return Err(VsaError::FeatureOutOfRange {
                    id: id as usize,
                    count: self.input_dim,
                });
            }
        }
        Ok(())
    }

    fn preprocess(&self, features: &[(u32, f64)]) -> Vec<(u32, f64)> {
        if !self.normalize_features {
            return features.to_vec();
        }
        let norm = features
            .iter()
            .map(|&(_, v)| v * v)
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            return features.to_vec();
        }
        features.iter().map(|&(id, v)| (id, v / norm)).collect()
    }

    /// Run the network up to the raw output, keeping activations.
    pub(crate) fn run_trace(&self, features: &[(u32, f64)]) -> Result<Trace> {
        self.check_features(features)?;
        let features = self.preprocess(features);

        let mut a1 = self.b1.clone();
        self.w1.forward_sparse(&features, &mut a1);
        relu_in_place(&mut a1);
        check_finite(&a1, "hidden layer 1")?;

        let mut a2 = self.b2.clone();
        self.w2.forward_dense(&a1, &mut a2);
        relu_in_place(&mut a2);
        check_finite(&a2, "hidden layer 2")?;

        let raw = match &self.head_stage {
            HeadStage::Dense { w, b } => {
                let mut raw = b.clone();
                w.forward_dense(&a2, &mut raw);
                raw
            }
            HeadStage::Split { wx, bx, wy, by } => {
                let half = self.hidden_dim / 2;
                let mut x = bx.clone();
                wx.forward_dense(&a2[..half], &mut x);
                let mut y = by.clone();
                wy.forward_dense(&a2[half..], &mut y);
                // Interleave into (x_0, y_0, x_1, y_1, ...) so the pair
                // layout matches the plain chrr head.
                let mut raw = Vec::with_capacity(2 * self.code_dim);
                for i in 0..self.code_dim {
                    raw.push(x[i]);
                    raw.push(y[i]);
                }
                raw
            }
        };
        check_finite(&raw, "output layer")?;

        Ok(Trace {
            features,
            a1,
            a2,
            raw,
        })
    }

    /// Raw output angles for the circular heads (unwrapped; every value
    /// already lies in [-pi, pi]).
    pub(crate) fn raw_to_angles(&self, raw: &[f64]) -> Vec<f64> {
        match self.head {
            HeadKind::Chrr | HeadKind::ChrrHalf => cartesian_to_angles_unchecked(raw),
            HeadKind::ChrrSin => raw.iter().map(|r| std::f64::consts::PI * r.sin()).collect(),
            HeadKind::ChrrTanh => raw.iter().map(|r| std::f64::consts::PI * r.tanh()).collect(),
            HeadKind::Fc | HeadKind::Hrr => unreachable!("not an angle head"),
        }
    }

    /// Run one example through the network.
    pub fn forward(&self, features: &[(u32, f64)]) -> Result<HeadOutput> {
        let trace = self.run_trace(features)?;
        Ok(match self.head {
            HeadKind::Fc => HeadOutput::Logits(trace.raw),
            HeadKind::Hrr => HeadOutput::Code(RealHrrVector::new(trace.raw)?),
            _ => {
                let angles: Vec<f64> = self
                    .raw_to_angles(&trace.raw)
                    .into_iter()
                    .map(wrap_angle)
                    .collect();
                HeadOutput::Angles(CircularVector::new(angles)?)
            }
        })
    }

    /// Rank the top-k labels for one example: by logit for the fc head,
    /// by codebook similarity of the decoded output for vector heads.
    /// Ties break toward the smaller label id.
    pub fn predict_ranking(
        &self,
        features: &[(u32, f64)],
        top_k: usize,
    ) -> Result<Vec<(usize, f64)>> {
        if top_k == 0 || top_k > self.num_labels {
            return Err(VsaError::InvalidTopK {
                got: top_k,
                max: self.num_labels,
            });
        }
        match self.forward(features)? {
            HeadOutput::Logits(logits) => {
                let mut scored: Vec<(usize, f64)> = logits.into_iter().enumerate().collect();
                scored.sort_unstable_by(|a, b| {
                    b.1.partial_cmp(&a.1)
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.0.cmp(&b.0))
                });
                scored.truncate(top_k);
                Ok(scored)
            }
            HeadOutput::Code(v) => {
                let codebook = self.codebook.as_ref().expect("vector head has codebook");
                let decoded = codebook.decode(&SymbolVector::Hrr(v))?;
                codebook.rank_labels(&decoded, top_k)
            }
            HeadOutput::Angles(v) => {
                let codebook = self.codebook.as_ref().expect("vector head has codebook");
                let decoded = codebook.decode(&SymbolVector::Chrr(v))?;
                codebook.rank_labels(&decoded, top_k)
            }
        }
    }

    /// All parameters flattened in layer order: w1, b1, w2, b2, then the
    /// head stage (w, b for dense heads; wx, bx, wy, by for the split
    /// head). The checkpoint format and the gradient layout use the same
    /// order.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend_from_slice(self.w1.data());
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(self.w2.data());
        out.extend_from_slice(&self.b2);
        match &self.head_stage {
            HeadStage::Dense { w, b } => {
                out.extend_from_slice(w.data());
                out.extend_from_slice(b);
            }
            HeadStage::Split { wx, bx, wy, by } => {
                out.extend_from_slice(wx.data());
                out.extend_from_slice(bx);
                out.extend_from_slice(wy.data());
                out.extend_from_slice(by);
            }
        }
        out
    }

    pub fn param_count(&self) -> usize {
        let head = match &self.head_stage {
            HeadStage::Dense { w, b } => w.data.len() + b.len(),
            HeadStage::Split { wx, bx, wy, by } => {
                wx.data.len() + bx.len() + wy.data.len() + by.len()
            }
        };
        self.w1.data.len() + self.b1.len() + self.w2.data.len() + self.b2.len() + head
    }

    /// Overwrite all parameters from a flat slice in [`Self::params`]
    /// order.
    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(VsaError::InvalidConfig(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut offset = 0;
        let take = |dst: &mut [f64], offset: &mut usize| {
            dst.copy_from_slice(&flat[*offset..*offset + dst.len()]);
            *offset += dst.len();
        };
        take(self.w1.data_mut(), &mut offset);
        take(&mut self.b1, &mut offset);
        take(self.w2.data_mut(), &mut offset);
        take(&mut self.b2, &mut offset);
        match &mut self.head_stage {
            HeadStage::Dense { w, b } => {
                take(w.data_mut(), &mut offset);
                take(b, &mut offset);
            }
            HeadStage::Split { wx, bx, wy, by } => {
                take(wx.data_mut(), &mut offset);
                take(bx, &mut offset);
                take(wy.data_mut(), &mut offset);
                take(by, &mut offset);
            }
        }
        Ok(())
    }

    /// One SGD step: params -= lr * grads.
    pub fn apply_gradients(&mut self, grads: &Gradients, learning_rate: f64) {
        let lr = -learning_rate;
        self.w1.add_scaled(grads.w1(), lr);
        axpy(&mut self.b1, grads.b1(), lr);
        self.w2.add_scaled(grads.w2(), lr);
        axpy(&mut self.b2, grads.b2(), lr);
        match (&mut self.head_stage, grads.head()) {
            (HeadStage::Dense { w, b }, HeadStage::Dense { w: gw, b: gb }) => {
                w.add_scaled(gw, lr);
                axpy(b, gb, lr);
            }
            (
                HeadStage::Split { wx, bx, wy, by },
                HeadStage::Split {
                    wx: gwx,
                    bx: gbx,
                    wy: gwy,
                    by: gby,
                },
            ) => {
                wx.add_scaled(gwx, lr);
                axpy(bx, gbx, lr);
                wy.add_scaled(gwy, lr);
                axpy(by, gby, lr);
            }
            _ => unreachable!("gradient shape matches the model"),
        }
    }
}

fn axpy(dst: &mut [f64], src: &[f64], scale: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += scale * s;
    }
}

fn relu_in_place(xs: &mut [f64]) {
    for x in xs.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

fn check_finite(xs: &[f64], layer: &'static str) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(VsaError::NonFiniteActivation { layer });
    }
    Ok(())
}

/// Convert 2d raw outputs into d angles: pair i is
/// (raw[2i], raw[2i+1]), normalized by sqrt(x^2 + y^2 + eps^2) and sent
/// through atan2. The origin maps to angle 0.
pub fn cartesian_to_angles(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.len() % 2 != 0 {
        return Err(VsaError::InvalidConfig(
            "cartesian input needs an even number of values".into(),
        ));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(VsaError::NonFiniteComponent);
    }
    Ok(cartesian_to_angles_unchecked(raw))
}

fn cartesian_to_angles_unchecked(raw: &[f64]) -> Vec<f64> {
    raw.chunks_exact(2)
        .map(|pair| {
            let (x, y) = (pair[0], pair[1]);
            let norm = (x * x + y * y + ATAN2_EPSILON * ATAN2_EPSILON).sqrt();
            (y / norm).atan2(x / norm)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn chrr_codebook(dim: usize, labels: usize) -> Codebook {
        Codebook::generate(Algebra::Chrr, dim, labels, 11).unwrap()
    }

    #[test]
    fn cartesian_axis_values() {
        let angles = cartesian_to_angles(&[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(angles[0], 0.0);
        assert!((angles[1] - FRAC_PI_2).abs() < 1e-12);
        assert!((angles[2] - PI).abs() < 1e-12);
        assert_eq!(angles[3], 0.0, "origin maps to 0");
    }

    #[test]
    fn cartesian_is_scale_invariant() {
        let a = cartesian_to_angles(&[0.3, -0.4]).unwrap();
        let b = cartesian_to_angles(&[3.0, -4.0]).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-9);
    }

    #[test]
    fn cartesian_outputs_are_canonical() {
        use rand::Rng;
        let mut rng = rng_from_seed(3);
        for _ in 0..1000 {
            let raw: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            for a in cartesian_to_angles(&raw).unwrap() {
                let w = wrap_angle(a);
                assert!(w > -PI && w <= PI);
                assert_eq!(w, a, "atan2 output is already canonical");
            }
        }
    }

    #[test]
    fn cartesian_rejects_odd_or_non_finite() {
        assert!(cartesian_to_angles(&[1.0]).is_err());
        assert!(cartesian_to_angles(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn zeroed_fc_model_outputs_zero_logits() {
        let mut model = MlpModel::new_fc(8, 4, 5, 0).unwrap();
        let zeros = vec![0.0; model.param_count()];
        model.set_params(&zeros).unwrap();
        match model.forward(&[(0, 1.0), (3, 2.0)]).unwrap() {
            HeadOutput::Logits(logits) => assert_eq!(logits, vec![0.0; 5]),
            _ => panic!("fc head yields logits"),
        }
    }

    #[test]
    fn zeroed_chrr_model_outputs_zero_angles() {
        let mut model =
            MlpModel::new_with_codebook(HeadKind::Chrr, 8, 4, chrr_codebook(3, 5), 0).unwrap();
        let zeros = vec![0.0; model.param_count()];
        model.set_params(&zeros).unwrap();
        match model.forward(&[(1, 1.0)]).unwrap() {
            HeadOutput::Angles(v) => assert_eq!(v.angles(), &[0.0, 0.0, 0.0]),
            _ => panic!("chrr head yields angles"),
        }
    }

    #[test]
    fn tanh_head_angles_stay_inside_the_open_interval() {
        let model =
            MlpModel::new_with_codebook(HeadKind::ChrrTanh, 8, 4, chrr_codebook(6, 5), 1).unwrap();
        match model.forward(&[(0, 3.0), (5, -2.0)]).unwrap() {
            HeadOutput::Angles(v) => {
                for &a in v.angles() {
                    assert!(a > -PI && a < PI);
                }
            }
            _ => panic!("tanh head yields angles"),
        }
    }

    #[test]
    fn feature_bounds_are_checked() {
        let model = MlpModel::new_fc(8, 4, 5, 0).unwrap();
        assert!(matches!(
            model.forward(&[(8, 1.0)]),
            Err(VsaError::FeatureOutOfRange { id: 8, count: 8 })
        ));
    }

    #[test]
    fn head_weight_counts_match_the_size_accounting() {
        let h = 16;
        let d = 8;
        let labels = 10;
        let hrr = MlpModel::new_with_codebook(
            HeadKind::Hrr,
            8,
            h,
            Codebook::generate(Algebra::Hrr, d, labels, 0).unwrap(),
            0,
        )
        .unwrap();
        let chrr =
            MlpModel::new_with_codebook(HeadKind::Chrr, 8, h, chrr_codebook(d, labels), 0)
                .unwrap();
        let half =
            MlpModel::new_with_codebook(HeadKind::ChrrHalf, 8, h, chrr_codebook(d, labels), 0)
                .unwrap();
        assert_eq!(hrr.head_weight_count(), h * d);
        assert_eq!(chrr.head_weight_count(), h * 2 * d);
        assert_eq!(half.head_weight_count(), hrr.head_weight_count());
    }

    #[test]
    fn chrr_half_requires_even_hidden() {
        let err = MlpModel::new_with_codebook(HeadKind::ChrrHalf, 8, 7, chrr_codebook(4, 5), 0);
        assert!(matches!(err, Err(VsaError::InvalidConfig(_))));
    }

    #[test]
    fn chrr_half_blocks_are_disjoint() {
        // Changing only the y-block weights must leave every x
        // coordinate of the raw output untouched.
        let cb = chrr_codebook(4, 5);
        let model =
            MlpModel::new_with_codebook(HeadKind::ChrrHalf, 6, 8, cb.clone(), 3).unwrap();
        let mut tweaked = model.clone();
        if let HeadStage::Split { wy, .. } = &mut tweaked.head_stage {
            for w in wy.data_mut() {
                *w += 0.5;
            }
        }
        let features = [(0u32, 1.0), (4u32, -2.0)];
        let a = model.run_trace(&features).unwrap().raw;
        let b = tweaked.run_trace(&features).unwrap().raw;
        for i in 0..4 {
            assert_eq!(a[2 * i], b[2 * i], "x coordinate {} moved", i);
            assert_ne!(a[2 * i + 1], b[2 * i + 1], "y coordinate {} should move", i);
        }
    }

    #[test]
    fn params_round_trip_through_flat_view() {
        let model =
            MlpModel::new_with_codebook(HeadKind::ChrrHalf, 6, 8, chrr_codebook(4, 5), 9).unwrap();
        let flat = model.params();
        assert_eq!(flat.len(), model.param_count());
        let mut other =
            MlpModel::new_with_codebook(HeadKind::ChrrHalf, 6, 8, chrr_codebook(4, 5), 10)
                .unwrap();
        other.set_params(&flat).unwrap();
        assert_eq!(other.params(), flat);
    }

    #[test]
    fn predict_ranking_fc_fixture() {
        let mut model = MlpModel::new_fc(4, 4, 3, 0).unwrap();
        let mut params = vec![0.0; model.param_count()];
        model.set_params(&params).unwrap();
        // Bias the logits directly: b3 = [0.1, 0.9, 0.5] with all weights
        // zero.
        let n = params.len();
        params[n - 3] = 0.1;
        params[n - 2] = 0.9;
        params[n - 1] = 0.5;
        model.set_params(&params).unwrap();
        let ranked = model.predict_ranking(&[], 2).unwrap();
        let ids: Vec<usize> = ranked.iter().map(|(id, _)| *id).collect();
        assert_eq!(ids, vec![1, 2]);

        assert!(matches!(
            model.predict_ranking(&[], 4),
            Err(VsaError::InvalidTopK { .. })
        ));
    }

    #[test]
    fn predict_ranking_recovers_exactly_encoded_labels() {
        // Zero weights, biases set to the Cartesian image of an encoded
        // pair of labels: the decoder must put that pair on top.
        let cb = chrr_codebook(16, 10);
        let encoded = match cb.encode(&[3, 7]).unwrap() {
            SymbolVector::Chrr(v) => v,
            _ => unreachable!(),
        };
        let mut model =
            MlpModel::new_with_codebook(HeadKind::Chrr, 4, 6, cb, 0).unwrap();
        let mut params = vec![0.0; model.param_count()];
        let n = params.len();
        // Head biases are the last 2d entries.
        for (i, &angle) in encoded.angles().iter().enumerate() {
            params[n - 32 + 2 * i] = angle.cos();
            params[n - 32 + 2 * i + 1] = angle.sin();
        }
        model.set_params(&params).unwrap();
        let ranked = model.predict_ranking(&[], 2).unwrap();
        let mut ids: Vec<usize> = ranked.iter().map(|(id, _)| *id).collect();
        ids.sort_unstable();
        assert_eq!(ids, vec![3, 7]);
    }
}
