//! Analytics for moderated multi-party conversations.
//!
//! The crate covers the whole path from raw transcripts to moderation
//! statistics:
//!
//! * [`corpus`] holds the transcript model (episodes, turns, sentences) and
//!   the source-format adapters.
//! * [`schema`] defines the label space: three motive flags, six dialogue
//!   acts and the per-episode target-speaker vocabulary.
//! * [`aggregate`] turns several annotators into a consensus and measures
//!   their agreement with Krippendorff's alpha.
//! * [`llm`] builds annotation prompts, parses model answers and runs
//!   cached annotation jobs against a chat-completion endpoint.
//! * [`eval`] scores model labels against consensus labels.
//! * [`analysis`] computes motive/act conditionals, speaker-state
//!   transitions, target-speaker metrics and significance tests.
//!
//! Numeric routines are generic over [`Scalar`], so the same code runs in
//! `f64` for reporting and in exact rationals ([`Exact`]) for verification.

pub mod aggregate;
pub mod analysis;
pub mod corpus;
pub mod eval;
pub mod llm;
pub mod scalar;
pub mod schema;

pub use scalar::Scalar;

/// Exact rational scalar used for verification paths.
pub type Exact = num_rational::Ratio<i64>;

pub type AlphaReport = aggregate::AlphaReport<f64>;
pub type ConditionalTable = analysis::ConditionalTable<f64>;
pub type TransitionMatrix = analysis::TransitionMatrix<f64>;
pub type WhoMetrics = analysis::WhoMetrics<f64>;
pub type ActTransitions = analysis::ActTransitions<f64>;
pub type EvalReport = eval::EvalReport<f64>;
pub type TestOutcome = analysis::TestOutcome<f64>;
pub type SourceComparison = analysis::SourceComparison<f64>;
