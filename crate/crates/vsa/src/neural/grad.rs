//! Losses and exact backpropagation for every head.
//!
//! Vector heads minimize `sum_p (1 - sim(decode(prediction), c_p))`
//! over the example's label set, with the similarity of the head's
//! algebra; the fc head uses independent per-label sigmoid
//! cross-entropy. Batch gradients are the mean of per-example
//! gradients.

use crate::chrr::CircularVector;
use crate::codec::Codebook;
use crate::dataset::Example;
use crate::error::VsaError;
use crate::hrr::RealHrrVector;
use crate::Result;

use super::{HeadKind, HeadStage, Matrix, MlpModel, Trace, ATAN2_EPSILON};

/// Gradients for every parameter of a model, in the same shapes as the
/// parameters themselves.
#[derive(Debug, Clone)]
pub struct Gradients {
    w1: Matrix,
    b1: Vec<f64>,
    w2: Matrix,
    b2: Vec<f64>,
    head: HeadStage,
}

impl Gradients {
    fn zeros_like(model: &MlpModel) -> Self {
        Self {
            w1: Matrix::zeros(model.input_dim, model.hidden_dim),
            b1: vec![0.0; model.hidden_dim],
            w2: Matrix::zeros(model.hidden_dim, model.hidden_dim),
            b2: vec![0.0; model.hidden_dim],
            head: model.head_stage.zeros_like(),
        }
    }

    pub(crate) fn w1(&self) -> &Matrix {
        &self.w1
    }

    pub(crate) fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub(crate) fn w2(&self) -> &Matrix {
        &self.w2
    }

    pub(crate) fn b2(&self) -> &[f64] {
        &self.b2
    }

    pub(crate) fn head(&self) -> &HeadStage {
        &self.head
    }

    /// Flatten in the same layer order as [`MlpModel::params`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend_from_slice(self.w1.data());
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(self.w2.data());
        out.extend_from_slice(&self.b2);
        match &self.head {
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

    /// Euclidean norm over every entry.
    pub fn norm(&self) -> f64 {
        self.flat().iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// The similarity loss for a circular prediction:
/// `sum_p (1 - sim(prediction (x) concept^-1, c_p))`.
pub fn chrr_loss(
    predicted: &CircularVector,
    labels: &[usize],
    codebook: &Codebook,
) -> Result<f64> {
    if labels.is_empty() {
        return Err(VsaError::EmptyLabelSet);
    }
    let (concept, label_vecs) = codebook.chrr_parts().ok_or(VsaError::AlgebraMismatch {
        expected: "chrr",
        got: codebook.algebra().name(),
    })?;
    if predicted.dim() != codebook.dim() {
        return Err(VsaError::DimensionMismatch {
            left: codebook.dim(),
            right: predicted.dim(),
        });
    }
    let d = predicted.dim();
    let mut loss = 0.0;
    for &p in labels {
        let c = label_vecs
            .get(p)
            .ok_or(VsaError::LabelOutOfRange {
                id: p,
                count: label_vecs.len(),
            })?;
        let mut sim = 0.0;
        for j in 0..d {
            sim += (predicted.angles()[j] - concept.angles()[j] - c.angles()[j]).cos();
        }
        loss += 1.0 - sim / d as f64;
    }
    Ok(loss)
}

/// The same loss shape for a real-vector prediction, with cosine
/// similarity.
pub fn hrr_loss(
    predicted: &RealHrrVector,
    labels: &[usize],
    codebook: &Codebook,
) -> Result<f64> {
    if labels.is_empty() {
        return Err(VsaError::EmptyLabelSet);
    }
    let (concept, label_vecs) = codebook.hrr_parts().ok_or(VsaError::AlgebraMismatch {
        expected: "hrr",
        got: codebook.algebra().name(),
    })?;
    let decoded = predicted.bind(&concept.invert()?)?;
    let mut loss = 0.0;
    for &p in labels {
        let c = label_vecs.get(p).ok_or(VsaError::LabelOutOfRange {
            id: p,
            count: label_vecs.len(),
        })?;
        loss += 1.0 - decoded.similarity(c)?;
    }
    Ok(loss)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Stable binary cross-entropy with logits, summed over all labels.
fn fc_loss_and_grad(raw: &[f64], labels: &[u32], num_labels: usize) -> Result<(f64, Vec<f64>)> {
    for &l in labels {
        if l as usize >= num_labels {
            return Err(VsaError::LabelOutOfRange {
                id: l as usize,
                count: num_labels,
            });
        }
    }
    let mut loss = 0.0;
    let mut grad = vec![0.0; raw.len()];
    for (l, (&z, g)) in raw.iter().zip(grad.iter_mut()).enumerate() {
        let y = if labels.binary_search(&(l as u32)).is_ok() {
            1.0
        } else {
            0.0
        };
        loss += z.max(0.0) - z * y + (-z.abs()).exp().ln_1p();
        *g = sigmoid(z) - y;
    }
    Ok((loss, grad))
}

/// Per-batch context for the hrr head: the decode key (inverse concept)
/// and its index reversal. Convolving with the reversed kernel is the
/// transpose of convolving with the kernel, which is what the backward
/// pass needs.
struct HrrKeys {
    key: RealHrrVector,
    key_rev: RealHrrVector,
}

fn hrr_loss_and_grad(
    raw: &[f64],
    labels: &[u32],
    codebook: &Codebook,
    keys: &HrrKeys,
) -> Result<(f64, Vec<f64>)> {
    let (_, label_vecs) = codebook.hrr_parts().expect("hrr head has hrr codebook");
    let prediction = RealHrrVector::new(raw.to_vec())?;
    let decoded = prediction.bind(&keys.key)?;
    let norm_u = decoded.norm();
    if norm_u == 0.0 {
        return Err(VsaError::ZeroNorm);
    }
    let d = decoded.dim();
    let mut loss = 0.0;
    let mut grad_u = vec![0.0; d];
    for &p in labels {
        let c = label_vecs
            .get(p as usize)
            .ok_or(VsaError::LabelOutOfRange {
                id: p as usize,
                count: label_vecs.len(),
            })?;
        let norm_c = c.norm();
        if norm_c == 0.0 {
            return Err(VsaError::ZeroNorm);
        }
        let dot = decoded.dot(c)?;
        loss += 1.0 - dot / (norm_u * norm_c);
        // d/du of -cos(u, c).
        let a = 1.0 / (norm_u * norm_c);
        let b = dot / (norm_u * norm_u * norm_u * norm_c);
        for j in 0..d {
            grad_u[j] += -a * c.components()[j] + b * decoded.components()[j];
        }
    }
    let grad_raw = RealHrrVector::new(grad_u)?.bind(&keys.key_rev)?;
    Ok((loss, grad_raw.into_components()))
}

/// Loss and gradient w.r.t. the raw output for any circular head.
fn circular_loss_and_grad(
    model: &MlpModel,
    raw: &[f64],
    labels: &[u32],
) -> Result<(f64, Vec<f64>)> {
    let codebook = model.codebook.as_ref().expect("vector head has codebook");
    let (concept, label_vecs) = codebook.chrr_parts().expect("chrr head has chrr codebook");
    let d = model.code_dim;
    let angles = model.raw_to_angles(raw);

    let mut loss = 0.0;
    let mut g_angle = vec![0.0; d];
    for &p in labels {
        let c = label_vecs
            .get(p as usize)
            .ok_or(VsaError::LabelOutOfRange {
                id: p as usize,
                count: label_vecs.len(),
            })?;
        let mut sim = 0.0;
        for j in 0..d {
            let delta = angles[j] - concept.angles()[j] - c.angles()[j];
            sim += delta.cos();
            g_angle[j] += delta.sin();
        }
        loss += 1.0 - sim / d as f64;
    }
    for g in &mut g_angle {
        *g /= d as f64;
    }

    let grad_raw = match model.head {
        HeadKind::Chrr | HeadKind::ChrrHalf => {
            let mut grad = vec![0.0; 2 * d];
            for j in 0..d {
                let x = raw[2 * j];
                let y = raw[2 * j + 1];
                let denom = x * x + y * y + ATAN2_EPSILON * ATAN2_EPSILON;
                grad[2 * j] = g_angle[j] * (-y / denom);
                grad[2 * j + 1] = g_angle[j] * (x / denom);
            }
            grad
        }
        HeadKind::ChrrSin => raw
            .iter()
            .zip(&g_angle)
            .map(|(&r, &g)| g * std::f64::consts::PI * r.cos())
            .collect(),
        HeadKind::ChrrTanh => raw
            .iter()
            .zip(&g_angle)
            .map(|(&r, &g)| {
                let t = r.tanh();
                g * std::f64::consts::PI * (1.0 - t * t)
            })
            .collect(),
        HeadKind::Fc | HeadKind::Hrr => unreachable!("not a circular head"),
    };
    Ok((loss, grad_raw))
}

impl MlpModel {
    fn hrr_keys(&self) -> Result<Option<HrrKeys>> {
        if self.head != HeadKind::Hrr {
            return Ok(None);
        }
        let codebook = self.codebook.as_ref().expect("hrr head has codebook");
        let (concept, _) = codebook.hrr_parts().expect("hrr head has hrr codebook");
        let key = concept.invert()?;
        let key_rev = key.approx_inverse();
        Ok(Some(HrrKeys { key, key_rev }))
    }

    fn example_loss_and_raw_grad(
        &self,
        trace: &Trace,
        labels: &[u32],
        hrr_keys: &Option<HrrKeys>,
    ) -> Result<(f64, Vec<f64>)> {
        match self.head {
            HeadKind::Fc => fc_loss_and_grad(&trace.raw, labels, self.num_labels),
            HeadKind::Hrr => hrr_loss_and_grad(
                &trace.raw,
                labels,
                self.codebook.as_ref().expect("hrr head has codebook"),
                hrr_keys.as_ref().expect("keys prepared for hrr head"),
            ),
            _ => circular_loss_and_grad(self, &trace.raw, labels),
        }
    }

    fn backprop_example(
        &self,
        trace: &Trace,
        grad_raw: &[f64],
        grads: &mut Gradients,
        scale: f64,
    ) {
        let half = self.hidden_dim / 2;
        let mut grad_a2 = vec![0.0; self.hidden_dim];
        match (&self.head_stage, &mut grads.head) {
            (HeadStage::Dense { w, .. }, HeadStage::Dense { w: gw, b: gb }) => {
                gw.accumulate_outer_dense(&trace.a2, grad_raw, scale);
                for (g, d) in gb.iter_mut().zip(grad_raw) {
                    *g += scale * d;
                }
                w.backprop_input(grad_raw, &mut grad_a2);
            }
            (
                HeadStage::Split { wx, wy, .. },
                HeadStage::Split {
                    wx: gwx,
                    bx: gbx,
                    wy: gwy,
                    by: gby,
                },
            ) => {
                // Even raw entries are x coordinates from block 1, odd
                // entries y coordinates from block 2.
                let dx: Vec<f64> = grad_raw.iter().step_by(2).copied().collect();
                let dy: Vec<f64> = grad_raw.iter().skip(1).step_by(2).copied().collect();
                gwx.accumulate_outer_dense(&trace.a2[..half], &dx, scale);
                gwy.accumulate_outer_dense(&trace.a2[half..], &dy, scale);
                for (g, d) in gbx.iter_mut().zip(&dx) {
                    *g += scale * d;
                }
                for (g, d) in gby.iter_mut().zip(&dy) {
                    *g += scale * d;
                }
                wx.backprop_input(&dx, &mut grad_a2[..half]);
                wy.backprop_input(&dy, &mut grad_a2[half..]);
            }
            _ => unreachable!("gradient shape matches the model"),
        }

        // ReLU mask; the subgradient at zero is zero.
        let delta2: Vec<f64> = grad_a2
            .iter()
            .zip(&trace.a2)
            .map(|(&g, &a)| if a > 0.0 { g } else { 0.0 })
            .collect();
        grads.w2.accumulate_outer_dense(&trace.a1, &delta2, scale);
        for (g, d) in grads.b2.iter_mut().zip(&delta2) {
            *g += scale * d;
        }
        let mut grad_a1 = vec![0.0; self.hidden_dim];
        self.w2.backprop_input(&delta2, &mut grad_a1);

        let delta1: Vec<f64> = grad_a1
            .iter()
            .zip(&trace.a1)
            .map(|(&g, &a)| if a > 0.0 { g } else { 0.0 })
            .collect();
        grads
            .w1
            .accumulate_outer_sparse(&trace.features, &delta1, scale);
        for (g, d) in grads.b1.iter_mut().zip(&delta1) {
            *g += scale * d;
        }
    }

    /// Mean per-example loss over a batch.
    pub fn batch_loss(&self, batch: &[&Example]) -> Result<f64> {
        if batch.is_empty() {
            return Err(VsaError::InvalidConfig("empty batch".into()));
        }
        let keys = self.hrr_keys()?;
        let mut total = 0.0;
        for ex in batch {
            let trace = self.run_trace(&ex.features)?;
            let (loss, _) = self.example_loss_and_raw_grad(&trace, &ex.labels, &keys)?;
            total += loss;
        }
        Ok(total / batch.len() as f64)
    }

    /// Mean loss and exact gradients of the mean loss over a batch.
    pub fn batch_gradients(&self, batch: &[&Example]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(VsaError::InvalidConfig("empty batch".into()));
        }
        let keys = self.hrr_keys()?;
        let scale = 1.0 / batch.len() as f64;
        let mut grads = Gradients::zeros_like(self);
        let mut total = 0.0;
        for ex in batch {
            let trace = self.run_trace(&ex.features)?;
            let (loss, grad_raw) = self.example_loss_and_raw_grad(&trace, &ex.labels, &keys)?;
            self.backprop_example(&trace, &grad_raw, &mut grads, scale);
            total += loss;
        }
        Ok((total * scale, grads))
    }
}
