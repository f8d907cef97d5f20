//! Monte-Carlo capacity experiments.
//!
//! Two drivers: a retrieval-accuracy sweep over a (dimension, set size)
//! grid producing heatmap data, and a similarity variance/mean sweep at
//! fixed dimension comparing raw real vectors, projected real vectors
//! and circular vectors.
//!
//! Every grid cell derives its own seed from the base seed and the cell
//! coordinates, so results are independent of evaluation order and of
//! how many worker threads were used.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::codec::{Algebra, Codebook};
use crate::error::VsaError;
use crate::seed::{mix, rng_from_seed};
use crate::Result;

/// Seed-domain tags keeping the two experiments' random streams apart.
const DOMAIN_RETRIEVAL: u64 = 1;
const DOMAIN_VARIANCE: u64 = 2;

/// Grid definition shared by both sweeps.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub algebras: Vec<Algebra>,
    /// Vector dimensions to test. The variance sweep requires exactly one.
    pub dims: Vec<usize>,
    /// Label-set sizes to test.
    pub ks: Vec<usize>,
    /// Database size N.
    pub num_labels: usize,
    /// Independent codebooks per grid cell.
    pub trials: usize,
    pub base_seed: u64,
    /// Worker threads for grid evaluation; results do not depend on it.
    pub threads: usize,
}

impl SweepConfig {
    /// The default retrieval grid: power-of-two dimensions up to 1024
    /// against set sizes {1, 5, 10, ..., 50}, 100 trials per cell,
    /// N = 1000.
    pub fn default_retrieval() -> Self {
        let mut ks = vec![1];
        ks.extend((1..=10).map(|i| i * 5));
        Self {
            algebras: vec![Algebra::Hrr, Algebra::Chrr],
            dims: (0..=10).map(|p| 1usize << p).collect(),
            ks,
            num_labels: 1000,
            trials: 100,
            base_seed: 0,
            threads: 1,
        }
    }

    /// The default variance configuration: d = 400, k = 1..=50,
    /// 200 trials.
    pub fn default_variance() -> Self {
        Self {
            algebras: vec![Algebra::Hrr, Algebra::Chrr],
            dims: vec![400],
            ks: (1..=50).collect(),
            num_labels: 1000,
            trials: 200,
            base_seed: 0,
            threads: 1,
        }
    }

    /// Sort and dedup the grid axes; the output ordering contract is by
    /// (algebra, d, k) regardless of how the axes were given.
    fn normalized(&self) -> Self {
        let mut cfg = self.clone();
        cfg.algebras.sort_unstable();
        cfg.algebras.dedup();
        cfg.dims.sort_unstable();
        cfg.dims.dedup();
        cfg.ks.sort_unstable();
        cfg.ks.dedup();
        cfg
    }

    fn validate(&self) -> Result<()> {
        if self.algebras.is_empty() {
            return Err(VsaError::InvalidConfig("no algebras selected".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d == 0) {
            return Err(VsaError::InvalidConfig(
                "dimensions must be nonempty and positive".into(),
            ));
        }
        if self.ks.is_empty() || self.ks.iter().any(|&k| k == 0) {
            return Err(VsaError::InvalidConfig(
                "k values must be nonempty and positive".into(),
            ));
        }
        if let Some(&bad) = self.ks.iter().find(|&&k| k > self.num_labels) {
            return Err(VsaError::InvalidConfig(format!(
                "k = {} exceeds the label count {}",
                bad, self.num_labels
            )));
        }
        if self.trials == 0 {
            return Err(VsaError::InvalidConfig("trials must be positive".into()));
        }
        Ok(())
    }
}

/// One retrieval-accuracy grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalCell {
    pub algebra: Algebra,
    pub dim: usize,
    pub k: usize,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
}

/// Retrieval sweep output, ordered by (algebra, d, k).
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalSweep {
    pub cells: Vec<RetrievalCell>,
}

impl RetrievalSweep {
    pub fn cell(&self, algebra: Algebra, dim: usize, k: usize) -> Option<&RetrievalCell> {
        self.cells
            .iter()
            .find(|c| c.algebra == algebra && c.dim == dim && c.k == k)
    }
}

/// The three arms of the variance experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Raw Gaussian real vectors, no projection.
    Hrr,
    /// Projected real vectors.
    HrrWithProjection,
    /// Circular vectors.
    Chrr,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Hrr => "hrr",
            Variant::HrrWithProjection => "hrr_proj",
            Variant::Chrr => "chrr",
        }
    }

    pub const ALL: [Variant; 3] = [Variant::Hrr, Variant::HrrWithProjection, Variant::Chrr];

    fn tag(self) -> u64 {
        match self {
            Variant::Hrr => 0,
            Variant::HrrWithProjection => 1,
            Variant::Chrr => 2,
        }
    }
}

/// Pooled similarity statistics for one (variant, k) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceCell {
    pub variant: Variant,
    pub dim: usize,
    pub k: usize,
    pub mean: f64,
    pub variance: f64,
    /// Number of pooled similarity samples (trials * k).
    pub samples: usize,
}

/// Variance sweep output, ordered by (variant, k).
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceSweep {
    pub cells: Vec<VarianceCell>,
}

impl VarianceSweep {
    pub fn cell(&self, variant: Variant, k: usize) -> Option<&VarianceCell> {
        self.cells
            .iter()
            .find(|c| c.variant == variant && c.k == k)
    }
}

/// Mean retrieval accuracy per (algebra, d, k) cell over independent
/// trials. Each trial draws a fresh codebook and label set from a seed
/// mixed out of (base, algebra, d, k, trial).
pub fn run_retrieval_sweep(cfg: &SweepConfig) -> Result<RetrievalSweep> {
    let cfg = cfg.normalized();
    cfg.validate()?;

    let mut keys = Vec::new();
    for &algebra in &cfg.algebras {
        for &dim in &cfg.dims {
            for &k in &cfg.ks {
                keys.push((algebra, dim, k));
            }
        }
    }

    let eval_cell = |&(algebra, dim, k): &(Algebra, usize, usize)| -> Result<RetrievalCell> {
        let mut accs = Vec::with_capacity(cfg.trials);
        for trial in 0..cfg.trials {
            let trial_seed = mix(
                cfg.base_seed,
                &[
                    DOMAIN_RETRIEVAL,
                    algebra.tag() as u64,
                    dim as u64,
                    k as u64,
                    trial as u64,
                ],
            );
            let codebook =
                Codebook::generate(algebra, dim, cfg.num_labels, mix(trial_seed, &[0]))?;
            let mut rng = rng_from_seed(mix(trial_seed, &[1]));
            let ids = rand::seq::index::sample(&mut rng, cfg.num_labels, k).into_vec();
            accs.push(codebook.retrieval_accuracy(&ids)?);
        }
        let (mean, std) = mean_and_std(&accs);
        Ok(RetrievalCell {
            algebra,
            dim,
            k,
            mean,
            std,
            trials: cfg.trials,
        })
    };

    let cells = if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| VsaError::InvalidConfig(format!("thread pool: {}", e)))?;
        pool.install(|| keys.par_iter().map(eval_cell).collect::<Result<Vec<_>>>())?
    } else {
        keys.iter().map(eval_cell).collect::<Result<Vec<_>>>()?
    };

    Ok(RetrievalSweep { cells })
}

/// Pooled similarity mean and variance per (variant, k) at one fixed
/// dimension. Each trial builds a database of k vectors plus a concept,
/// encodes all k, decodes once, and records the similarity of the
/// decoded vector to each of the k members.
pub fn run_variance_sweep(cfg: &SweepConfig, variants: &[Variant]) -> Result<VarianceSweep> {
    let cfg = cfg.normalized();
    cfg.validate()?;
    if cfg.dims.len() != 1 {
        return Err(VsaError::InvalidConfig(
            "the variance sweep runs at one fixed dimension".into(),
        ));
    }
    let dim = cfg.dims[0];
    let mut variants = variants.to_vec();
    variants.sort_unstable();
    variants.dedup();
    if variants.is_empty() {
        return Err(VsaError::InvalidConfig("no variants selected".into()));
    }

    let mut cells = Vec::new();
    for &variant in &variants {
        for &k in &cfg.ks {
            let mut samples = Vec::with_capacity(cfg.trials * k);
            for trial in 0..cfg.trials {
                let trial_seed = mix(
                    cfg.base_seed,
                    &[
                        DOMAIN_VARIANCE,
                        variant.tag(),
                        dim as u64,
                        k as u64,
                        trial as u64,
                    ],
                );
                let codebook = match variant {
                    Variant::Hrr => Codebook::generate_hrr_unprojected(dim, k, trial_seed)?,
                    Variant::HrrWithProjection => {
                        Codebook::generate(Algebra::Hrr, dim, k, trial_seed)?
                    }
                    Variant::Chrr => Codebook::generate(Algebra::Chrr, dim, k, trial_seed)?,
                };
                let ids: Vec<usize> = (0..k).collect();
                let encoded = codebook.encode(&ids)?;
                // The unprojected arm is the original system, which
                // unbinds with the approximate inverse (the involution).
                // For unit-spectrum vectors the two inverses coincide,
                // so only this arm is affected.
                let decoded = match (variant, &encoded) {
                    (Variant::Hrr, crate::codec::SymbolVector::Hrr(m)) => {
                        let (concept, _) = codebook.hrr_parts().expect("hrr codebook");
                        crate::codec::SymbolVector::Hrr(m.bind(&concept.approx_inverse())?)
                    }
                    _ => codebook.decode(&encoded)?,
                };
                for id in ids {
                    samples.push(decoded.similarity(&codebook.label_vector(id)?)?);
                }
            }
            let (mean, variance) = mean_and_variance(&samples);
            cells.push(VarianceCell {
                variant,
                dim,
                k,
                mean,
                variance,
                samples: samples.len(),
            });
        }
    }
    Ok(VarianceSweep { cells })
}

fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    (mean, variance)
}

fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    let (mean, variance) = mean_and_variance(xs);
    (mean, variance.sqrt())
}

/// Write the retrieval grid as CSV (`algebra,d,k,mean,std,trials`) and a
/// self-contained SVG heatmap with one panel per algebra. `header` goes
/// in verbatim as the first comment line of both files.
pub fn emit_heatmap(
    sweep: &RetrievalSweep,
    csv_path: impl AsRef<Path>,
    svg_path: impl AsRef<Path>,
    header: &str,
) -> Result<()> {
    let mut csv = BufWriter::new(File::create(csv_path)?);
    writeln!(csv, "# {}", header)?;
    writeln!(csv, "algebra,d,k,mean,std,trials")?;
    for c in &sweep.cells {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            c.algebra, c.dim, c.k, c.mean, c.std, c.trials
        )?;
    }
    csv.flush()?;

    let mut svg = BufWriter::new(File::create(svg_path)?);
    write_heatmap_svg(sweep, &mut svg, header)?;
    svg.flush()?;
    Ok(())
}

/// Parse a CSV produced by [`emit_heatmap`]; comment lines are skipped.
/// The float columns round-trip exactly because they are written in
/// shortest-representation form.
pub fn read_retrieval_csv(path: impl AsRef<Path>) -> Result<RetrievalSweep> {
    let path_str = path.as_ref().display().to_string();
    let reader = BufReader::new(File::open(&path)?);
    let mut cells = Vec::new();
    let mut saw_columns = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if !saw_columns {
            saw_columns = true;
            continue;
        }
        let parse_err = |message: String| VsaError::Parse {
            path: path_str.clone(),
            line: lineno,
            message,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(parse_err(format!(
                "expected 6 columns, got {}",
                fields.len()
            )));
        }
        cells.push(RetrievalCell {
            algebra: fields[0]
                .parse()
                .map_err(|_| parse_err(format!("bad algebra '{}'", fields[0])))?,
            dim: fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad dimension '{}'", fields[1])))?,
            k: fields[2]
                .parse()
                .map_err(|_| parse_err(format!("bad k '{}'", fields[2])))?,
            mean: fields[3]
                .parse()
                .map_err(|_| parse_err(format!("bad mean '{}'", fields[3])))?,
            std: fields[4]
                .parse()
                .map_err(|_| parse_err(format!("bad std '{}'", fields[4])))?,
            trials: fields[5]
                .parse()
                .map_err(|_| parse_err(format!("bad trials '{}'", fields[5])))?,
        });
    }
    Ok(RetrievalSweep { cells })
}

/// Write the variance sweep as CSV (`variant,d,k,mean,variance,samples`).
pub fn emit_variance_csv(
    sweep: &VarianceSweep,
    path: impl AsRef<Path>,
    header: &str,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {}", header)?;
    writeln!(w, "variant,d,k,mean,variance,samples")?;
    for c in &sweep.cells {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            c.variant.name(),
            c.dim,
            c.k,
            c.mean,
            c.variance,
            c.samples
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Map a mean accuracy in [0, 1] through the "hot" colormap
/// (black -> red -> yellow -> white).
fn hot_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let channel = |x: f64| (x.clamp(0.0, 1.0) * 255.0).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        channel(3.0 * t),
        channel(3.0 * t - 1.0),
        channel(3.0 * t - 2.0)
    )
}

fn write_heatmap_svg<W: Write>(sweep: &RetrievalSweep, w: &mut W, header: &str) -> Result<()> {
    let mut algebras: Vec<Algebra> = sweep.cells.iter().map(|c| c.algebra).collect();
    algebras.sort_unstable();
    algebras.dedup();
    let mut dims: Vec<usize> = sweep.cells.iter().map(|c| c.dim).collect();
    dims.sort_unstable();
    dims.dedup();
    let mut ks: Vec<usize> = sweep.cells.iter().map(|c| c.k).collect();
    ks.sort_unstable();
    ks.dedup();

    const CELL: usize = 24;
    const MARGIN_LEFT: usize = 64;
    const MARGIN_TOP: usize = 48;
    const MARGIN_BOTTOM: usize = 36;
    const PANEL_GAP: usize = 48;

    let panel_w = MARGIN_LEFT + ks.len() * CELL;
    let panel_h = MARGIN_TOP + dims.len() * CELL + MARGIN_BOTTOM;
    let total_w = if algebras.is_empty() {
        320
    } else {
        algebras.len() * panel_w + (algebras.len() - 1) * PANEL_GAP + 16
    };
    let total_h = panel_h.max(120);

    writeln!(w, "<!-- {} -->", header)?;
    writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">",
        total_w, total_h, total_w, total_h
    )?;
    writeln!(
        w,
        "  <!-- cell fill: mean retrieval accuracy through the hot colormap \
         (0 = black, 1 = white) -->"
    )?;

    for (panel_idx, &algebra) in algebras.iter().enumerate() {
        let x0 = panel_idx * (panel_w + PANEL_GAP);
        writeln!(w, "  <g data-algebra=\"{}\">", algebra)?;
        writeln!(
            w,
            "    <text x=\"{}\" y=\"20\" font-size=\"14\">{} retrieval accuracy</text>",
            x0 + MARGIN_LEFT,
            algebra.name().to_uppercase()
        )?;
        for (row, &dim) in dims.iter().enumerate() {
            // Largest dimension on the top row.
            let y = MARGIN_TOP + (dims.len() - 1 - row) * CELL;
            writeln!(
                w,
                "    <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
                x0 + MARGIN_LEFT - 6,
                y + CELL / 2 + 4,
                dim
            )?;
            for (col, &k) in ks.iter().enumerate() {
                let x = x0 + MARGIN_LEFT + col * CELL;
                let (fill, title) = match sweep.cell(algebra, dim, k) {
                    Some(cell) => (
                        hot_color(cell.mean),
                        format!("d={} k={} mean={:.4}", dim, k, cell.mean),
                    ),
                    None => ("#cccccc".to_string(), format!("d={} k={} (no data)", dim, k)),
                };
                writeln!(
                    w,
                    "    <rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" \
                     fill=\"{}\"><title>{}</title></rect>",
                    x, y, CELL, CELL, fill, title
                )?;
            }
        }
        for (col, &k) in ks.iter().enumerate() {
            let x = x0 + MARGIN_LEFT + col * CELL;
            writeln!(
                w,
                "    <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                x + CELL / 2,
                MARGIN_TOP + dims.len() * CELL + 16,
                k
            )?;
        }
        writeln!(
            w,
            "    <text x=\"{}\" y=\"{}\">k</text>",
            x0 + MARGIN_LEFT + ks.len() * CELL / 2,
            MARGIN_TOP + dims.len() * CELL + 32
        )?;
        writeln!(
            w,
            "    <text x=\"{}\" y=\"{}\" text-anchor=\"end\">d</text>",
            x0 + MARGIN_LEFT - 6,
            MARGIN_TOP - 10
        )?;
        writeln!(w, "  </g>")?;
    }
    writeln!(w, "</svg>")?;
    Ok(())
}
