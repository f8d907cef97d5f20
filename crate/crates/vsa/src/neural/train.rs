//! Mini-batch SGD with per-epoch shuffling.

use std::io::Write;

use rand::seq::SliceRandom;

use crate::dataset::{Example, SparseDataset};
use crate::error::VsaError;
use crate::seed::rng_from_seed;
use crate::Result;

use super::{HeadKind, MlpModel};

/// Plain SGD hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1.0,
            batch_size: 64,
            epochs: 100,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(VsaError::InvalidConfig(
                "learning rate must be finite and nonnegative".into(),
            ));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(VsaError::InvalidConfig(
                "batch size and epochs must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-epoch mean losses plus how many examples the vector heads had to
/// skip for having no labels (the similarity loss is undefined there;
/// the fc head trains on them as all-negative rows).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub epoch_losses: Vec<f64>,
    pub skipped_examples: usize,
}

/// Train in place: shuffle each epoch with the seeded generator, walk
/// mini-batches in order, and take one SGD step per batch. Aborts with
/// the epoch and batch index if the loss stops being finite.
pub fn train(model: &mut MlpModel, data: &SparseDataset, cfg: &TrainConfig) -> Result<TrainLog> {
    cfg.validate()?;
    if data.num_features as usize != model.input_dim() {
        return Err(VsaError::InvalidConfig(format!(
            "dataset has {} features, model expects {}",
            data.num_features,
            model.input_dim()
        )));
    }
    if data.num_labels as usize != model.num_labels() {
        return Err(VsaError::InvalidConfig(format!(
            "dataset has {} labels, model expects {}",
            data.num_labels,
            model.num_labels()
        )));
    }

    let trainable: Vec<&Example> = if model.head() == HeadKind::Fc {
        data.examples.iter().collect()
    } else {
        data.examples.iter().filter(|e| !e.labels.is_empty()).collect()
    };
    let skipped_examples = data.examples.len() - trainable.len();
    if trainable.is_empty() {
        return Err(VsaError::EmptyTrainingSet);
    }

    let mut rng = rng_from_seed(cfg.seed);
    let mut order: Vec<usize> = (0..trainable.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for (batch_idx, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&Example> = chunk.iter().map(|&i| trainable[i]).collect();
            let (loss, grads) = model.batch_gradients(&batch)?;
            if !loss.is_finite() {
                return Err(VsaError::Divergence {
                    epoch,
                    batch: batch_idx,
                });
            }
            model.apply_gradients(&grads, cfg.learning_rate);
            loss_sum += loss * batch.len() as f64;
            seen += batch.len();
        }
        epoch_losses.push(loss_sum / seen as f64);
    }

    Ok(TrainLog {
        epoch_losses,
        skipped_examples,
    })
}

/// Write the loss history as CSV (`epoch,mean_loss`) behind a comment
/// header line.
pub fn write_loss_log<W: Write>(log: &TrainLog, mut w: W, header: &str) -> Result<()> {
    writeln!(w, "# {}", header)?;
    writeln!(w, "epoch,mean_loss")?;
    for (epoch, loss) in log.epoch_losses.iter().enumerate() {
        writeln!(w, "{},{}", epoch, loss)?;
    }
    Ok(())
}
