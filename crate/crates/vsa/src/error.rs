//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors raised by the algebra, codec, experiment, dataset, metric and
/// neural layers.
#[derive(Debug, Error)]
pub enum VsaError {
    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("algebra mismatch: expected {expected}, got {got}")]
    AlgebraMismatch { expected: &'static str, got: &'static str },

    #[error("near-singular spectrum: bin {bin} has magnitude {magnitude:.3e}")]
    NearSingularSpectrum { bin: usize, magnitude: f64 },

    #[error("zero-norm vector has no cosine similarity")]
    ZeroNorm,

    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),

    #[error("component must be finite")]
    NonFiniteComponent,

    #[error("empty label set")]
    EmptyLabelSet,

    #[error("cannot superpose an empty list of vectors")]
    EmptySuperposition,

    #[error("label id {id} out of range ({count} labels)")]
    LabelOutOfRange { id: usize, count: usize },

    #[error("feature id {id} out of range ({count} features)")]
    FeatureOutOfRange { id: usize, count: usize },

    #[error("top_k must be in 1..={max}, got {got}")]
    InvalidTopK { got: usize, max: usize },

    #[error("ranking has {len} entries, need at least {k}")]
    RankingTooShort { len: usize, k: usize },

    #[error("duplicate id {id} in ranking")]
    DuplicateInRanking { id: usize },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("bad file format: {0}")]
    BadFormat(String),

    #[error("non-finite activations in {layer}")]
    NonFiniteActivation { layer: &'static str },

    #[error("training diverged (non-finite loss) at epoch {epoch}, batch {batch}")]
    Divergence { epoch: usize, batch: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
