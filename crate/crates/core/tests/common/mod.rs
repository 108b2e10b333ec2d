//! Fixture builders for integration tests.
#![allow(dead_code)]

use whow_core::corpus::{Corpus, DomainTag, Episode, EpisodeHeader, RawTurn, Role, Speaker, Split};
use whow_core::schema::{Annotation, DialogueAct, MotiveSet, SentenceKey, TargetLabel};

/// Episode whose moderator is `m` and whose other speakers are the
/// remaining distinct ids in `turns`. Each turn is `(speaker, sentences)`.
pub fn episode(id: &str, domain: DomainTag, turns: &[(&str, usize)]) -> Episode {
    let mut speakers = vec![Speaker::new("m", "Mod", Role::Moderator)];
    for (s, _) in turns {
        if !speakers.iter().any(|sp| sp.id == *s) {
            speakers.push(Speaker::new(*s, s.to_uppercase(), Role::Participant));
        }
    }
    let header = EpisodeHeader {
        id: id.into(),
        domain,
        topic: "Cities".into(),
        split: Split::Test,
        speakers,
    };
    let raw = turns
        .iter()
        .map(|(s, n)| {
            RawTurn::new(
                *s,
                (0..*n).map(|i| format!("Sentence {i} by {s}.")).collect(),
            )
        })
        .collect();
    Episode::new(header, raw).unwrap().0
}

pub fn corpus(episodes: Vec<Episode>) -> Corpus {
    Corpus::new("test", episodes).unwrap()
}

pub fn label(
    ep: &str,
    turn: usize,
    sentence: usize,
    motives: MotiveSet,
    act: DialogueAct,
    target: TargetLabel,
) -> Annotation {
    Annotation {
        key: SentenceKey::new(ep, turn, sentence),
        annotator: "consensus".into(),
        motives,
        act,
        target,
        rationale: None,
    }
}

pub fn im() -> MotiveSet {
    MotiveSet::new(true, false, false)
}

pub fn speaker(id: &str) -> TargetLabel {
    TargetLabel::Speaker(id.into())
}
