//! Moderation-strategy statistics over labelled episodes.

mod conditional;
mod labels;
mod significance;
mod states;
mod transitions;
mod who;

pub use conditional::{
    compare_sources, compare_tables, conditional_table, Cell, CellTest, ConditionalTable,
    EpisodeSample, SourceComparison,
};
pub use labels::{moderator_turn_views, LabelIndex, ModeratorTurnView, SentenceLabel};
pub use significance::{cross_corpus_test, Side, TestOutcome, SIGNIFICANCE_LEVEL};
pub use states::{classify_states, state_sequence, SpeakerState, StateSequence};
pub use transitions::{
    act_conditioned_transitions, transition_matrix, ActRow, ActTransitions, TransitionMatrix,
};
pub use who::{
    who_metrics, WhoMetrics, EPISODE_FINAL_IS_INTERACTIVE, EPISODE_INITIAL_IS_PROACTIVE,
};

use thiserror::Error;

use crate::schema::SentenceKey;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("no sequence with two or more turns")]
    NoTransitions,
    #[error("episode `{episode}`: impossible transition {from} -> {to} at turn {turn}")]
    ImpossibleTransition {
        episode: String,
        turn: usize,
        from: SpeakerState,
        to: SpeakerState,
    },
    #[error("sentence {0} is labelled twice")]
    DuplicateLabel(SentenceKey),
}
