//! Ranking metrics for multi-label prediction: precision at k, its
//! propensity-scored variant, and the model-size compression report.

use std::collections::HashSet;
use std::io::Write;

use serde::Serialize;

use crate::dataset::SparseDataset;
use crate::error::VsaError;
use crate::Result;

/// Per-label propensities: the empirical relative frequency of each
/// label in a training set, floored at a small epsilon so rare labels
/// never divide by zero.
#[derive(Debug, Clone)]
pub struct PropensityTable {
    propensities: Vec<f64>,
    counts: Vec<u64>,
    floor: f64,
}

impl PropensityTable {
    /// `p_l = max(count_l / num_examples, floor)`.
    pub fn from_dataset(train: &SparseDataset, floor: f64) -> Result<Self> {
        if train.num_examples() == 0 {
            return Err(VsaError::EmptyTrainingSet);
        }
        if !(floor > 0.0) {
            return Err(VsaError::InvalidConfig(
                "propensity floor must be positive".into(),
            ));
        }
        let counts = train.label_counts();
        let n = train.num_examples() as f64;
        let propensities = counts
            .iter()
            .map(|&c| (c as f64 / n).max(floor))
            .collect();
        Ok(Self {
            propensities,
            counts,
            floor,
        })
    }

    /// A table with every propensity equal to 1 (PSP@k then reduces to
    /// P@k); useful as a neutral default.
    pub fn uniform(num_labels: usize) -> Self {
        Self {
            propensities: vec![1.0; num_labels],
            counts: vec![0; num_labels],
            floor: 1.0,
        }
    }

    pub fn get(&self, label: usize) -> Result<f64> {
        self.propensities
            .get(label)
            .copied()
            .ok_or(VsaError::LabelOutOfRange {
                id: label,
                count: self.propensities.len(),
            })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn len(&self) -> usize {
        self.propensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.propensities.is_empty()
    }
}

/// The default propensity floor.
pub const DEFAULT_PROPENSITY_FLOOR: f64 = 1e-9;

/// Build propensities with the default floor.
pub fn build_propensities(train: &SparseDataset) -> Result<PropensityTable> {
    PropensityTable::from_dataset(train, DEFAULT_PROPENSITY_FLOOR)
}

fn check_ranking(ranking: &[usize], k: usize) -> Result<()> {
    if k == 0 {
        return Err(VsaError::InvalidTopK {
            got: 0,
            max: ranking.len(),
        });
    }
    if ranking.len() < k {
        return Err(VsaError::RankingTooShort {
            len: ranking.len(),
            k,
        });
    }
    let mut seen = HashSet::with_capacity(ranking.len());
    for &id in ranking {
        if !seen.insert(id) {
            return Err(VsaError::DuplicateInRanking { id });
        }
    }
    Ok(())
}

/// Fraction of the top-k ranked labels that are true labels.
pub fn precision_at_k(ranking: &[usize], truth: &[usize], k: usize) -> Result<f64> {
    check_ranking(ranking, k)?;
    let truth: HashSet<usize> = truth.iter().copied().collect();
    let hits = ranking[..k].iter().filter(|id| truth.contains(id)).count();
    Ok(hits as f64 / k as f64)
}

/// Propensity-scored precision at k: each top-k hit contributes 1/p_l
/// instead of 1. Reported raw, exactly as the per-hit sum over k; see
/// [`psp_at_k_normalized`] for the variant divided by the ideal score.
pub fn psp_at_k(
    ranking: &[usize],
    truth: &[usize],
    k: usize,
    props: &PropensityTable,
) -> Result<f64> {
    check_ranking(ranking, k)?;
    let truth: HashSet<usize> = truth.iter().copied().collect();
    let mut sum = 0.0;
    for &id in &ranking[..k] {
        if truth.contains(&id) {
            sum += 1.0 / props.get(id)?;
        }
    }
    Ok(sum / k as f64)
}

/// PSP@k divided by the best achievable PSP@k for this truth set (the
/// truth labels ordered by descending 1/p_l). Off by default in the
/// tooling; the raw formula is the reported one.
pub fn psp_at_k_normalized(
    ranking: &[usize],
    truth: &[usize],
    k: usize,
    props: &PropensityTable,
) -> Result<f64> {
    let raw = psp_at_k(ranking, truth, k, props)?;
    let mut gains = truth
        .iter()
        .collect::<HashSet<_>>()
        .into_iter()
        .map(|&id| props.get(id).map(|p| 1.0 / p))
        .collect::<Result<Vec<f64>>>()?;
    gains.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let ideal: f64 = gains.iter().take(k).sum::<f64>() / k as f64;
    if ideal == 0.0 {
        return Ok(0.0);
    }
    Ok(raw / ideal)
}

/// The two Table-style compression figures comparing a circular-head
/// model against a plain fully-connected model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompressionReport {
    /// 1 - (F*h_c + h_c^2 + h_c*2d + d*L) / (F*h_f + h_f^2 + h_f*L).
    pub model_size_ratio: f64,
    /// 1 - d / L.
    pub output_dim_ratio: f64,
}

/// Compute both compression ratios for feature dim `f`, circular-model
/// hidden `h_c`, FC hidden `h_f`, code dim `d` and label count `l`.
pub fn compression_report(
    f: u64,
    h_c: u64,
    h_f: u64,
    d: u64,
    l: u64,
) -> Result<CompressionReport> {
    if f == 0 || h_c == 0 || h_f == 0 || d == 0 || l == 0 {
        return Err(VsaError::InvalidConfig(
            "compression report needs positive sizes".into(),
        ));
    }
    let (f, h_c, h_f, d, l) = (f as f64, h_c as f64, h_f as f64, d as f64, l as f64);
    let circular = (f * h_c + h_c * h_c) + (h_c * 2.0 * d + d * l);
    let dense = (f * h_f + h_f * h_f) + h_f * l;
    if dense == 0.0 {
        return Err(VsaError::InvalidConfig(
            "degenerate baseline model size".into(),
        ));
    }
    Ok(CompressionReport {
        model_size_ratio: 1.0 - circular / dense,
        output_dim_ratio: 1.0 - d / l,
    })
}

/// One metric value in an evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub metric: String,
    pub k: usize,
    pub value: f64,
}

/// A set of metric values, writable as CSV (`metric,k,value`) or JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub tool: String,
    pub subcommand: String,
    pub seed: u64,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn write_csv<W: Write>(&self, mut w: W, header: &str) -> Result<()> {
        writeln!(w, "# {}", header)?;
        writeln!(w, "metric,k,value")?;
        for row in &self.rows {
            writeln!(w, "{},{},{}", row.metric, row.k, row.value)?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)
            .map_err(|e| VsaError::BadFormat(format!("json encode: {}", e)))
    }
}
