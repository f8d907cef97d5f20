//! Vector-symbolic algebra toolkit built around two holographic
//! representations: real-valued vectors bound by circular convolution
//! ([`hrr`]) and circular vectors of angles bound by modular addition
//! ([`chrr`]).
//!
//! On top of the algebras sit a label-set codec ([`codec`]) that packs a
//! set of label ids into one memory vector and retrieves them by
//! similarity ranking, Monte-Carlo capacity experiments ([`experiments`]),
//! a sparse multi-label dataset format ([`dataset`]), ranking metrics
//! ([`metrics`]), and a small feed-forward trainer with circular-vector
//! output heads ([`neural`]).
//!
//! All randomness is drawn from explicitly seeded generators; every
//! function in this crate is deterministic given its seeds.

pub mod chrr;
pub mod codec;
pub mod dataset;
pub mod error;
pub mod experiments;
mod fft;
pub mod hrr;
pub mod metrics;
pub mod neural;
pub mod seed;

pub use error::VsaError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, VsaError>;
