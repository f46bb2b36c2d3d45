//! Human evaluation of machine translation with MQM error annotation and
//! side-by-side judgments.
//!
//! The statistics are generic over a float type ([`scalar::Scalar`]); the
//! aliases below fix it to `f64`.

pub mod agreement;
pub mod campaign;
pub mod consistency;
pub mod error;
pub mod ingest;
pub mod model;
pub mod profiling;
pub mod ranking;
pub mod scalar;
pub mod scoring;

pub use error::{Error, Result};

pub type ScoreCell = scoring::ScoreCell<f64>;
pub type ScoreTable = scoring::ScoreTable<f64>;
pub type AgreementResult = agreement::AgreementResult<f64>;
pub type AgreementRow = agreement::AgreementRow<f64>;
pub type ItcResult = consistency::ItcResult<f64>;
pub type ItcReportRow = consistency::ItcReportRow<f64>;
pub type SignificanceResult = ranking::SignificanceResult<f64>;
pub type RankingRow = ranking::RankingRow<f64>;
pub type CrossBleu = ranking::CrossBleu<f64>;
pub type PairSelection = ranking::PairSelection<f64>;
pub type PairDiagnostic = ranking::PairDiagnostic<f64>;
pub type ErrorDistribution = profiling::ErrorDistribution<f64>;
pub type AnnotatorStats = profiling::AnnotatorStats<f64>;
pub type AnnotatorScores = profiling::AnnotatorScores<f64>;
