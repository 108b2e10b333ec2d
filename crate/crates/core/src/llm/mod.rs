//! Automatic annotation through a chat-completion endpoint.

mod cache;
mod client;
mod job;
mod prompt;
mod response;

pub use cache::{cache_key, CacheEntry, CachedRequest, ResponseCache};
pub use client::{
    extract_content, ChatClient, ChatRequest, ClientError, HttpChatClient, API_KEY_ENV,
};
pub use job::{run_job, AnnotationJob, Gap, JobMode, JobReport};
pub use prompt::{
    build_prompt, target_options, PromptMode, PromptSpec, Templates, PROMPT_ACT_ORDER,
    PROMPT_MOTIVE_ORDER,
};
pub use response::{
    first_json_object, parse_response, parse_target, render_response, ParseError, ParseErrorKind,
    ResponseFragment,
};

use thiserror::Error;

use crate::schema::SentenceKey;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("prompt templates: {0}")]
    Template(String),
    #[error("sentence {0}: {1}")]
    BadKey(SentenceKey, &'static str),
    #[error("unknown episode `{0}`")]
    UnknownEpisode(String),
    #[error("response cache: {0}")]
    Cache(String),
}
