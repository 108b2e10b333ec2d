use std::fmt;

use serde::Serialize;

use crate::corpus::Episode;

/// Per-turn speaker state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeakerState {
    Moderation,
    Continuation,
    Rotation,
}

impl SpeakerState {
    pub const ALL: [SpeakerState; 3] = [
        SpeakerState::Moderation,
        SpeakerState::Continuation,
        SpeakerState::Rotation,
    ];

    pub fn code(self) -> &'static str {
        match self {
            SpeakerState::Moderation => "moderation",
            SpeakerState::Continuation => "continuation",
            SpeakerState::Rotation => "rotation",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SpeakerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateSequence {
    pub episode_id: String,
    pub states: Vec<SpeakerState>,
}

/// States for a speaker sequence. A participant turn continues when its
/// speaker matches the last participant before it; otherwise (including
/// the first participant turn) it is a rotation.
pub fn classify_states<S: PartialEq>(speakers: &[S], moderator: &S) -> Vec<SpeakerState> {
    let mut last: Option<&S> = None;
    speakers
        .iter()
        .map(|p| {
            if p == moderator {
                SpeakerState::Moderation
            } else {
                let state = match last {
                    Some(prev) if prev == p => SpeakerState::Continuation,
                    _ => SpeakerState::Rotation,
                };
                last = Some(p);
                state
            }
        })
        .collect()
}

pub fn state_sequence(ep: &Episode) -> StateSequence {
    let speakers: Vec<&str> = ep.turns().iter().map(|t| t.speaker_id.as_str()).collect();
    StateSequence {
        episode_id: ep.id().to_string(),
        states: classify_states(&speakers, &ep.moderator().id.as_str()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SpeakerState::*;

    #[test]
    fn alternating_pair() {
        assert_eq!(
            classify_states(&["M", "A", "M", "A"], &"M"),
            vec![Moderation, Rotation, Moderation, Continuation]
        );
    }

    #[test]
    fn rotation_then_continuation() {
        assert_eq!(
            classify_states(&["M", "A", "B", "M", "B"], &"M"),
            vec![Moderation, Rotation, Rotation, Moderation, Continuation]
        );
    }

    #[test]
    fn first_participant_turn_rotates() {
        assert_eq!(
            classify_states(&["A", "M", "A"], &"M"),
            vec![Rotation, Moderation, Continuation]
        );
    }
}
