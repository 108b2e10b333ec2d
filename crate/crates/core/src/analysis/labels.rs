use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::AnalysisError;
use crate::corpus::Episode;
use crate::schema::{DialogueAct, Labeled, MotiveSet, SentenceKey, TargetLabel};

/// The labels analysis needs for one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceLabel {
    pub motives: MotiveSet,
    pub act: DialogueAct,
    pub target: TargetLabel,
}

/// One label per sentence from a single source (consensus or one model).
#[derive(Debug, Clone, Default)]
pub struct LabelIndex {
    by_key: HashMap<SentenceKey, SentenceLabel>,
}

impl LabelIndex {
    pub fn from_labeled<L: Labeled>(items: &[L]) -> Result<LabelIndex, AnalysisError> {
        let mut by_key = HashMap::with_capacity(items.len());
        for it in items {
            let label = SentenceLabel {
                motives: it.motives(),
                act: it.act(),
                target: it.target().clone(),
            };
            if by_key.insert(it.key().clone(), label).is_some() {
                return Err(AnalysisError::DuplicateLabel(it.key().clone()));
            }
        }
        Ok(LabelIndex { by_key })
    }

    pub fn get(&self, key: &SentenceKey) -> Option<&SentenceLabel> {
        self.by_key.get(key)
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &SentenceKey> {
        self.by_key.keys()
    }
}

/// A moderator turn with its labelled sentences folded together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeratorTurnView {
    pub turn: usize,
    /// Act occurrences over the turn's labelled sentences. The keys are
    /// the act set `d_t`.
    pub act_counts: BTreeMap<DialogueAct, usize>,
    /// Union of the sentence targets.
    pub targets: BTreeSet<TargetLabel>,
    pub labelled_sentences: usize,
    pub prev_speaker: Option<String>,
    pub next_speaker: Option<String>,
}

impl ModeratorTurnView {
    pub fn acts(&self) -> impl Iterator<Item = DialogueAct> + '_ {
        self.act_counts.keys().copied()
    }
}

/// Views of every moderator turn with at least one labelled sentence,
/// plus the keys of moderator sentences that carry no label.
pub fn moderator_turn_views(
    ep: &Episode,
    labels: &LabelIndex,
) -> (Vec<ModeratorTurnView>, Vec<SentenceKey>) {
    let turns = ep.turns();
    let mut views = Vec::new();
    let mut missing = Vec::new();
    for (t, turn) in turns.iter().enumerate() {
        if !ep.is_moderator_turn(turn) {
            continue;
        }
        let mut act_counts = BTreeMap::new();
        let mut targets = BTreeSet::new();
        let mut labelled = 0;
        for s in &turn.sentences {
            let key = SentenceKey::new(ep.id(), t, s.index);
            match labels.get(&key) {
                Some(l) => {
                    *act_counts.entry(l.act).or_insert(0) += 1;
                    targets.insert(l.target.clone());
                    labelled += 1;
                }
                None => missing.push(key),
            }
        }
        if labelled == 0 {
            continue;
        }
        views.push(ModeratorTurnView {
            turn: t,
            act_counts,
            targets,
            labelled_sentences: labelled,
            prev_speaker: t.checked_sub(1).map(|p| turns[p].speaker_id.clone()),
            next_speaker: turns.get(t + 1).map(|n| n.speaker_id.clone()),
        });
    }
    (views, missing)
}
