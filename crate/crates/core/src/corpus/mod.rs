//! Transcript model and ingestion.

mod ingest;
mod model;
mod segment;

pub use ingest::{
    ingest_transcript, ingest_transcript_with_stats, read_corpus_dir, write_whow_jsonl,
    IngestStats, SourceFormat,
};
pub use model::{
    moderator_turns, Corpus, DomainTag, Episode, EpisodeHeader, RawTurn, Role, Sentence, Speaker,
    Split, Turn,
};
pub use segment::segment_text;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: invalid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("episode `{episode}`, turn {turn}: unknown speaker `{speaker}`")]
    UnknownSpeaker {
        episode: String,
        turn: usize,
        speaker: String,
    },
    #[error(
        "episode `{episode}` has no moderator; exactly one speaker must have role `moderator`"
    )]
    NoModerator { episode: String },
    #[error("episode `{episode}` has several moderators ({ids}); exactly one is allowed")]
    MultipleModerators { episode: String, ids: String },
    #[error("episode `{episode}` declares speaker `{speaker}` twice")]
    DuplicateSpeaker { episode: String, speaker: String },
    #[error("episode `{episode}` has no non-moderator speakers")]
    NoParticipants { episode: String },
    #[error("episode `{episode}` has no turns")]
    EmptyEpisode { episode: String },
    #[error("episode `{episode}`, turn {turn}: no sentences")]
    EmptyTurn { episode: String, turn: usize },
    #[error("duplicate episode id `{episode}`")]
    DuplicateEpisode { episode: String },
    #[error("{path}: {source}")]
    File {
        path: String,
        source: Box<CorpusError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
