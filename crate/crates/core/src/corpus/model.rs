use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Moderator,
    ForTeam,
    AgainstTeam,
    Participant,
    AudienceMember,
}

impl Role {
    /// Short tag used when a speaker is rendered as `Name (tag)`.
    pub fn tag(self) -> &'static str {
        match self {
            Role::Moderator => "mod",
            Role::ForTeam => "for",
            Role::AgainstTeam => "against",
            Role::Participant => "speaker",
            Role::AudienceMember => "audience",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    Debate,
    Panel,
    Generic,
}

impl DomainTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainTag::Debate => "debate",
            DomainTag::Panel => "panel",
            DomainTag::Generic => "generic",
        }
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Dev,
    Test,
    Unsplit,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
            Split::Unsplit => "unsplit",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Some(Split::Train),
            "dev" | "development" => Some(Split::Dev),
            "test" => Some(Split::Test),
            "unsplit" | "" => Some(Split::Unsplit),
            _ => None,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Speaker {
    pub id: String,
    #[serde(rename = "name")]
    pub display_name: String,
    pub role: Role,
}

impl Speaker {
    pub fn new(id: impl Into<String>, display_name: impl Into<String>, role: Role) -> Self {
        Speaker {
            id: id.into(),
            display_name: display_name.into(),
            role,
        }
    }

    pub fn is_moderator(&self) -> bool {
        self.role == Role::Moderator
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub index: usize,
    pub speaker_id: String,
    pub sentences: Vec<Sentence>,
}

impl Turn {
    /// Sentence texts joined by single spaces.
    pub fn text(&self) -> String {
        let parts: Vec<&str> = self.sentences.iter().map(|s| s.text.as_str()).collect();
        parts.join(" ")
    }
}

/// Episode-level metadata, everything except the turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeHeader {
    pub id: String,
    pub domain: DomainTag,
    pub topic: String,
    pub split: Split,
    pub speakers: Vec<Speaker>,
}

/// A turn as it comes out of a source adapter, before merging.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTurn {
    pub speaker_id: String,
    pub sentences: Vec<String>,
}

impl RawTurn {
    pub fn new(speaker_id: impl Into<String>, sentences: Vec<String>) -> Self {
        RawTurn {
            speaker_id: speaker_id.into(),
            sentences,
        }
    }
}

/// A validated, merged transcript.
///
/// Invariants enforced by [`Episode::new`]: exactly one moderator, unique
/// speaker ids, at least one non-moderator speaker, at least one turn, every
/// turn references a declared speaker and has non-empty sentences, and no two
/// consecutive turns share a speaker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Episode {
    header: EpisodeHeader,
    turns: Vec<Turn>,
    moderator: usize,
}

impl Episode {
    /// Validates the header, merges consecutive same-speaker turns and
    /// re-indexes turns and sentences. Returns the episode and the number of
    /// merges performed.
    pub fn new(
        header: EpisodeHeader,
        raw_turns: Vec<RawTurn>,
    ) -> Result<(Episode, usize), CorpusError> {
        let episode = header.id.clone();
        let mut seen = HashSet::new();
        for s in &header.speakers {
            if !seen.insert(s.id.as_str()) {
                return Err(CorpusError::DuplicateSpeaker {
                    episode,
                    speaker: s.id.clone(),
                });
            }
        }
        let moderators: Vec<usize> = header
            .speakers
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_moderator())
            .map(|(i, _)| i)
            .collect();
        let moderator = match moderators.as_slice() {
            [] => return Err(CorpusError::NoModerator { episode }),
            [one] => *one,
            many => {
                let ids = many
                    .iter()
                    .map(|&i| header.speakers[i].id.clone())
                    .collect::<Vec<_>>()
                    .join(", ");
                return Err(CorpusError::MultipleModerators { episode, ids });
            }
        };
        if header.speakers.len() < 2 {
            return Err(CorpusError::NoParticipants { episode });
        }
        if raw_turns.is_empty() {
            return Err(CorpusError::EmptyEpisode { episode });
        }

        let mut turns: Vec<Turn> = Vec::with_capacity(raw_turns.len());
        let mut merges = 0;
        for (raw_index, raw) in raw_turns.into_iter().enumerate() {
            if !seen.contains(raw.speaker_id.as_str()) {
                return Err(CorpusError::UnknownSpeaker {
                    episode,
                    turn: raw_index,
                    speaker: raw.speaker_id,
                });
            }
            let texts: Vec<String> = raw
                .sentences
                .into_iter()
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if texts.is_empty() {
                return Err(CorpusError::EmptyTurn {
                    episode,
                    turn: raw_index,
                });
            }
            match turns.last_mut() {
                Some(prev) if prev.speaker_id == raw.speaker_id => {
                    merges += 1;
                    let offset = prev.sentences.len();
                    prev.sentences
                        .extend(texts.into_iter().enumerate().map(|(i, text)| Sentence {
                            index: offset + i,
                            text,
                        }));
                }
                _ => {
                    let sentences = texts
                        .into_iter()
                        .enumerate()
                        .map(|(index, text)| Sentence { index, text })
                        .collect();
                    turns.push(Turn {
                        index: turns.len(),
                        speaker_id: raw.speaker_id,
                        sentences,
                    });
                }
            }
        }
        Ok((
            Episode {
                header,
                turns,
                moderator,
            },
            merges,
        ))
    }

    pub fn id(&self) -> &str {
        &self.header.id
    }

    pub fn domain(&self) -> DomainTag {
        self.header.domain
    }

    pub fn topic(&self) -> &str {
        &self.header.topic
    }

    pub fn split(&self) -> Split {
        self.header.split
    }

    pub fn header(&self) -> &EpisodeHeader {
        &self.header
    }

    pub fn speakers(&self) -> &[Speaker] {
        &self.header.speakers
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn moderator(&self) -> &Speaker {
        &self.header.speakers[self.moderator]
    }

    pub fn speaker(&self, id: &str) -> Option<&Speaker> {
        self.header.speakers.iter().find(|s| s.id == id)
    }

    /// Non-moderator speakers in declaration order.
    pub fn participants(&self) -> impl Iterator<Item = &Speaker> {
        self.header.speakers.iter().filter(|s| !s.is_moderator())
    }

    pub fn is_moderator_turn(&self, turn: &Turn) -> bool {
        turn.speaker_id == self.moderator().id
    }

    /// Turns spoken by the moderator, in order.
    pub fn moderator_turns(&self) -> Vec<&Turn> {
        self.turns
            .iter()
            .filter(|t| self.is_moderator_turn(t))
            .collect()
    }

    pub fn sentence(&self, turn: usize, sentence: usize) -> Option<&Sentence> {
        self.turns.get(turn)?.sentences.get(sentence)
    }

    /// Number of moderator sentences in the episode.
    pub fn moderator_sentence_count(&self) -> usize {
        self.moderator_turns()
            .iter()
            .map(|t| t.sentences.len())
            .sum()
    }
}

/// A named collection of episodes with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    episodes: Vec<Episode>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, episodes: Vec<Episode>) -> Result<Corpus, CorpusError> {
        let mut seen = HashSet::new();
        for ep in &episodes {
            if !seen.insert(ep.id().to_string()) {
                return Err(CorpusError::DuplicateEpisode {
                    episode: ep.id().to_string(),
                });
            }
        }
        Ok(Corpus {
            name: name.into(),
            episodes,
        })
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn episode(&self, id: &str) -> Option<&Episode> {
        self.episodes.iter().find(|e| e.id() == id)
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    /// Episodes matching the predicate, as a new corpus.
    pub fn filter(&self, mut keep: impl FnMut(&Episode) -> bool) -> Corpus {
        Corpus {
            name: self.name.clone(),
            episodes: self.episodes.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }

    /// Episodes sorted by id; pooled statistics iterate in this order.
    pub fn sorted_episodes(&self) -> Vec<&Episode> {
        let mut eps: Vec<&Episode> = self.episodes.iter().collect();
        eps.sort_by(|a, b| a.id().cmp(b.id()));
        eps
    }
}

/// Turns spoken by the episode's moderator, preserving order.
pub fn moderator_turns(ep: &Episode) -> Vec<&Turn> {
    ep.moderator_turns()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn header(domain: DomainTag) -> EpisodeHeader {
        EpisodeHeader {
            id: "ep".into(),
            domain,
            topic: "t".into(),
            split: Split::Test,
            speakers: vec![
                Speaker::new("m", "Mod", Role::Moderator),
                Speaker::new("a", "Ann", Role::ForTeam),
                Speaker::new("b", "Bob", Role::AgainstTeam),
            ],
        }
    }

    fn raw(ids: &[&str]) -> Vec<RawTurn> {
        ids.iter()
            .enumerate()
            .map(|(i, id)| RawTurn::new(*id, vec![format!("s{i}.")]))
            .collect()
    }

    #[test]
    fn alternating_speakers_need_no_merge() {
        let (ep, merges) =
            Episode::new(header(DomainTag::Debate), raw(&["m", "a", "m", "b"])).unwrap();
        assert_eq!(ep.turns().len(), 4);
        assert_eq!(merges, 0);
    }

    #[test]
    fn consecutive_turns_merge_in_order() {
        let (ep, merges) =
            Episode::new(header(DomainTag::Debate), raw(&["m", "a", "a", "b"])).unwrap();
        assert_eq!(merges, 1);
        assert_eq!(ep.turns().len(), 3);
        let merged = &ep.turns()[1];
        assert_eq!(merged.index, 1);
        assert_eq!(
            merged
                .sentences
                .iter()
                .map(|s| s.text.as_str())
                .collect::<Vec<_>>(),
            ["s1.", "s2."]
        );
        assert_eq!(
            merged.sentences.iter().map(|s| s.index).collect::<Vec<_>>(),
            [0, 1]
        );
        assert_eq!(ep.turns()[2].index, 2);
    }

    #[test]
    fn moderator_turns_preserve_order() {
        let (ep, _) = Episode::new(header(DomainTag::Debate), raw(&["m", "a", "m", "b"])).unwrap();
        let idx: Vec<usize> = moderator_turns(&ep).iter().map(|t| t.index).collect();
        assert_eq!(idx, [0, 2]);

        let (ep, _) =
            Episode::new(header(DomainTag::Debate), raw(&["m", "a", "b", "a", "m"])).unwrap();
        let idx: Vec<usize> = moderator_turns(&ep).iter().map(|t| t.index).collect();
        assert_eq!(idx, [0, 4]);
    }

    #[test]
    fn rejects_bad_moderator_counts() {
        let mut h = header(DomainTag::Debate);
        h.speakers[0].role = Role::Participant;
        assert!(matches!(
            Episode::new(h, raw(&["m"])),
            Err(CorpusError::NoModerator { .. })
        ));

        let mut h = header(DomainTag::Debate);
        h.speakers[1].role = Role::Moderator;
        assert!(matches!(
            Episode::new(h, raw(&["m"])),
            Err(CorpusError::MultipleModerators { .. })
        ));
    }

    #[test]
    fn rejects_unknown_speaker_and_lone_moderator() {
        let err = Episode::new(header(DomainTag::Debate), raw(&["m", "zed"])).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownSpeaker { turn: 1, .. }));

        let mut h = header(DomainTag::Generic);
        h.speakers.truncate(1);
        assert!(matches!(
            Episode::new(h, raw(&["m"])),
            Err(CorpusError::NoParticipants { .. })
        ));
    }

    #[test]
    fn duplicate_episode_ids_rejected() {
        let (ep, _) = Episode::new(header(DomainTag::Debate), raw(&["m", "a"])).unwrap();
        assert!(Corpus::new("c", vec![ep.clone(), ep]).is_err());
    }
}
