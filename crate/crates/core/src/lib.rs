//! Error-versus-Discard Characteristic evaluation of biometric quality
//! assessment algorithms.
//!
//! The crate covers score ingestion, EDC computation, partial-area ranking,
//! quality score normalisation, ranking stability grids, synthetic data
//! generation and a set of alternative discard-based metrics. The `edc-eval`
//! binary exposes all of it on the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alt_metrics;
pub mod curve;
pub mod edc;
pub mod error;
pub mod normalisation;
pub mod pauc;
pub mod report;
pub mod score_data;
pub mod stability;
pub mod svg;
pub mod synthetic;

pub use curve::CurvePoint;
pub use edc::{compute_edc, random_baseline, threshold_for_fmr, threshold_for_starting_error, EdcCurve, ErrorMode};
pub use error::{Error, Result};
pub use pauc::{pauc, rank, Adjustment, Interpolation, PaucConfig, RankingReport};
pub use score_data::{ComparisonKind, ComparisonSet, QualityScoreTable};
