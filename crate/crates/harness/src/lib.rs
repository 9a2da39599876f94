//! Seeded random instances, experiment orchestration and reports for
//! `seqmeas-core`.
//!
//! [`suite::run_suite`] draws every trial from its own ChaCha8 stream keyed by
//! `(seed, check, trial)`, so reports are bit-reproducible regardless of how
//! rayon schedules the trials.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod generate;
pub mod rng;
pub mod suite;

pub use config::{CheckName, ExperimentConfig};
pub use suite::{replay, run_check, run_suite, ExperimentReport, FailureBundle};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] seqmeas_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
