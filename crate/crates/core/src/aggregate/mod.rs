//! Consensus labels and inter-annotator agreement.

mod alpha;
mod cooccurrence;
mod vote;

pub use alpha::{annotator_alpha, krippendorff_alpha, reliability_matrix, AlphaReport, Level};
pub use cooccurrence::{cooccurrence_from_units, vote_cooccurrence, CooccurrenceMatrix};
pub use vote::{
    aggregate_all, majority_vote, AggregatedAnnotation, ExternalResolutions, TiebreakPolicy,
    VoteDetail, CONSENSUS_ANNOTATOR,
};

use serde::Serialize;
use thiserror::Error;

use crate::schema::SentenceKey;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AggregateError {
    #[error("no annotations to aggregate")]
    Empty,
    #[error("annotations for different sentences: {expected} and {found}")]
    MixedKeys {
        expected: SentenceKey,
        found: SentenceKey,
    },
    #[error("annotation references unknown episode `{0}`")]
    UnknownEpisode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize)]
pub enum AlphaError {
    #[error("degenerate: agreement undefined (every value identical)")]
    Degenerate,
    #[error("fewer than two pairable values")]
    InsufficientData,
    #[error("binary level with {0} distinct values")]
    NotBinary(usize),
}
