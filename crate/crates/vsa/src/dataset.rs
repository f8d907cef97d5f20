//! Sparse multi-label datasets in the extreme-classification repository
//! text format, plus dataset statistics and a synthetic generator for
//! desk-scale experiments.
//!
//! File layout: the first line is `num_examples num_features num_labels`;
//! every following line is one example,
//! `l1,l2,...,lm f1:v1 f2:v2 ...` — a comma-separated label-id list
//! (possibly empty, leaving the line to start with a space) followed by
//! space-separated `feature:value` pairs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::VsaError;
use crate::seed::rng_from_seed;
use crate::Result;

/// One example: sorted label ids and sorted (feature id, value) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub labels: Vec<u32>,
    pub features: Vec<(u32, f64)>,
}

/// A parsed dataset. Label ids are < `num_labels`, feature ids are
/// < `num_features`, and the per-example lists are sorted and free of
/// duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    pub num_features: u32,
    pub num_labels: u32,
    pub examples: Vec<Example>,
}

/// Summary statistics: example/feature/label counts, the average number
/// of examples per label, and the average number of labels per example.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub num_examples: usize,
    pub num_features: u32,
    pub num_labels: u32,
    pub avg_examples_per_label: f64,
    pub avg_labels_per_example: f64,
}

impl SparseDataset {
    pub fn num_examples(&self) -> usize {
        self.examples.len()
    }

    /// Per-label occurrence counts across all examples.
    pub fn label_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.num_labels as usize];
        for ex in &self.examples {
            for &l in &ex.labels {
                counts[l as usize] += 1;
            }
        }
        counts
    }
}

/// Parse a dataset file, reporting malformed content with its line
/// number.
pub fn parse_xmc(path: impl AsRef<Path>) -> Result<SparseDataset> {
    let origin = path.as_ref().display().to_string();
    parse_xmc_reader(BufReader::new(File::open(&path)?), &origin)
}

/// Parse from any buffered reader; `origin` names the source in errors.
pub fn parse_xmc_reader<R: BufRead>(reader: R, origin: &str) -> Result<SparseDataset> {
    let err = |line: usize, message: String| VsaError::Parse {
        path: origin.to_string(),
        line,
        message,
    };

    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file, expected header".into()))?;
    let header = header?;
    let mut parts = header.split_whitespace();
    let mut next_count = |name: &str| -> Result<u64> {
        parts
            .next()
            .ok_or_else(|| err(1, format!("header missing {}", name)))?
            .parse::<u64>()
            .map_err(|_| err(1, format!("header has non-numeric {}", name)))
    };
    let declared_examples = next_count("example count")?;
    let num_features = next_count("feature count")? as u32;
    let num_labels = next_count("label count")? as u32;
    if parts.next().is_some() {
        return Err(err(1, "header has trailing tokens".into()));
    }

    let mut examples = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let mut tokens = line.split(' ');
        // The first space-separated token is the label field; an empty
        // token (line starting with a space, or an empty line) means an
        // empty label set.
        let label_field = tokens.next().unwrap_or("");

        let mut labels = Vec::new();
        for tok in label_field.split(',') {
            if tok.is_empty() {
                continue;
            }
            let id: u32 = tok
                .parse()
                .map_err(|_| err(lineno, format!("non-numeric label '{}'", tok)))?;
            if id >= num_labels {
                return Err(err(
                    lineno,
                    format!("label {} out of range (header declares {})", id, num_labels),
                ));
            }
            labels.push(id);
        }
        labels.sort_unstable();
        if let Some(dup) = first_duplicate(&labels) {
            return Err(err(lineno, format!("duplicate label {}", dup)));
        }

        let mut features: Vec<(u32, f64)> = Vec::new();
        for tok in tokens {
            if tok.is_empty() {
                continue;
            }
            let (id_str, value_str) = tok
                .split_once(':')
                .ok_or_else(|| err(lineno, format!("malformed feature pair '{}'", tok)))?;
            let id: u32 = id_str
                .parse()
                .map_err(|_| err(lineno, format!("non-numeric feature id '{}'", id_str)))?;
            if id >= num_features {
                return Err(err(
                    lineno,
                    format!(
                        "feature {} out of range (header declares {})",
                        id, num_features
                    ),
                ));
            }
            let value: f64 = value_str
                .parse()
                .map_err(|_| err(lineno, format!("non-numeric value '{}'", value_str)))?;
            if !value.is_finite() {
                return Err(err(lineno, format!("non-finite value '{}'", value_str)));
            }
            features.push((id, value));
        }
        features.sort_unstable_by_key(|&(id, _)| id);
        if let Some(dup) = first_duplicate_by_key(&features) {
            return Err(err(lineno, format!("duplicate feature {}", dup)));
        }

        examples.push(Example { labels, features });
    }

    if examples.len() as u64 != declared_examples {
        return Err(err(
            examples.len() + 2,
            format!(
                "header declares {} examples, file has {}",
                declared_examples,
                examples.len()
            ),
        ));
    }

    Ok(SparseDataset {
        num_features,
        num_labels,
        examples,
    })
}

fn first_duplicate(sorted: &[u32]) -> Option<u32> {
    sorted.windows(2).find(|w| w[0] == w[1]).map(|w| w[0])
}

fn first_duplicate_by_key(sorted: &[(u32, f64)]) -> Option<u32> {
    sorted
        .windows(2)
        .find(|w| w[0].0 == w[1].0)
        .map(|w| w[0].0)
}

/// Write a dataset in the text format, bit-exactly re-parseable.
/// Values use the shortest representation that round-trips.
pub fn emit_xmc(ds: &SparseDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    emit_xmc_writer(ds, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn emit_xmc_writer<W: Write>(ds: &SparseDataset, w: &mut W) -> Result<()> {
    writeln!(
        w,
        "{} {} {}",
        ds.examples.len(),
        ds.num_features,
        ds.num_labels
    )?;
    for ex in &ds.examples {
        let labels: Vec<String> = ex.labels.iter().map(|l| l.to_string()).collect();
        write!(w, "{}", labels.join(","))?;
        for &(id, value) in &ex.features {
            write!(w, " {}:{}", id, value)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Compute [`DatasetStats`]. The average-examples-per-label figure is
/// total label occurrences divided by the label count; empty datasets
/// report 0 for both averages.
pub fn dataset_stats(ds: &SparseDataset) -> DatasetStats {
    let total_occurrences: u64 = ds.examples.iter().map(|e| e.labels.len() as u64).sum();
    let avg_examples_per_label = if ds.num_labels == 0 {
        0.0
    } else {
        total_occurrences as f64 / ds.num_labels as f64
    };
    let avg_labels_per_example = if ds.examples.is_empty() {
        0.0
    } else {
        total_occurrences as f64 / ds.examples.len() as f64
    };
    DatasetStats {
        num_examples: ds.examples.len(),
        num_features: ds.num_features,
        num_labels: ds.num_labels,
        avg_examples_per_label,
        avg_labels_per_example,
    }
}

/// Generate a synthetic separable dataset. Each label owns a disjoint
/// block of floor(F/L) feature ids; an example activates the owned
/// features of each of its `labels_per_example` labels with value 1,
/// then every feature's presence is flipped with probability `noise`.
/// Label sets are drawn uniformly without replacement.
pub fn generate_synthetic(
    num_examples: usize,
    num_features: u32,
    num_labels: u32,
    labels_per_example: usize,
    noise: f64,
    seed: u64,
) -> Result<SparseDataset> {
    if num_labels == 0 || num_features < num_labels {
        return Err(VsaError::InvalidConfig(
            "need 1 <= num_labels <= num_features".into(),
        ));
    }
    if labels_per_example == 0 || labels_per_example > num_labels as usize {
        return Err(VsaError::InvalidConfig(
            "need 1 <= labels_per_example <= num_labels".into(),
        ));
    }
    if !(0.0..1.0).contains(&noise) {
        return Err(VsaError::InvalidConfig("noise must be in [0, 1)".into()));
    }

    let block = num_features / num_labels;
    let mut rng = rng_from_seed(seed);
    let mut examples = Vec::with_capacity(num_examples);
    for _ in 0..num_examples {
        let mut labels: Vec<u32> =
            rand::seq::index::sample(&mut rng, num_labels as usize, labels_per_example)
                .into_iter()
                .map(|i| i as u32)
                .collect();
        labels.sort_unstable();

        let mut features = Vec::new();
        for fid in 0..num_features {
            let owner = fid / block;
            let owned = owner < num_labels && labels.binary_search(&owner).is_ok();
            let flip = rand::Rng::gen::<f64>(&mut rng) < noise;
            if owned != flip {
                features.push((fid, 1.0));
            }
        }
        examples.push(Example { labels, features });
    }
    Ok(SparseDataset {
        num_features,
        num_labels,
        examples,
    })
}
