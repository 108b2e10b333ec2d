use std::collections::BTreeMap;

use serde::Serialize;

use super::labels::{moderator_turn_views, LabelIndex};
use super::states::{state_sequence, SpeakerState, StateSequence};
use super::AnalysisError;
use crate::corpus::Corpus;
use crate::schema::{DialogueAct, SentenceKey};
use crate::Scalar;

/// Speaker-state transition probabilities.
///
/// `probs[from][to]` is `None` for structurally impossible cells, and the
/// whole row is `None` when `from` has no outgoing transitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix<T> {
    pub counts: [[u64; 3]; 3],
    pub probs: [Option<[Option<T>; 3]>; 3],
}

impl<T: Scalar> TransitionMatrix<T> {
    /// False for moderation->moderation, continuation->continuation and
    /// rotation->continuation, which merged transcripts cannot produce.
    pub fn is_possible(from: SpeakerState, to: SpeakerState) -> bool {
        use SpeakerState::*;
        !matches!(
            (from, to),
            (Moderation, Moderation) | (Continuation, Continuation) | (Rotation, Continuation)
        )
    }

    pub fn count(&self, from: SpeakerState, to: SpeakerState) -> u64 {
        self.counts[from.index()][to.index()]
    }

    pub fn prob(&self, from: SpeakerState, to: SpeakerState) -> Option<T> {
        self.probs[from.index()].and_then(|row| row[to.index()])
    }

    pub fn row_defined(&self, from: SpeakerState) -> bool {
        self.probs[from.index()].is_some()
    }

    fn from_counts(counts: [[u64; 3]; 3]) -> Self {
        let mut probs = [None; 3];
        for from in SpeakerState::ALL {
            let row = counts[from.index()];
            let total: u64 = row.iter().sum();
            if total == 0 {
                continue;
            }
            let mut cells = [None; 3];
            for to in SpeakerState::ALL {
                if Self::is_possible(from, to) {
                    cells[to.index()] = Some(T::ratio(row[to.index()] as usize, total as usize));
                }
            }
            probs[from.index()] = Some(cells);
        }
        TransitionMatrix { counts, probs }
    }
}

/// Pools consecutive state pairs over all sequences and row-normalises.
pub fn transition_matrix<T: Scalar>(
    seqs: &[StateSequence],
) -> Result<TransitionMatrix<T>, AnalysisError> {
    if !seqs.iter().any(|s| s.states.len() >= 2) {
        return Err(AnalysisError::NoTransitions);
    }
    let mut counts = [[0u64; 3]; 3];
    for seq in seqs {
        for (t, pair) in seq.states.windows(2).enumerate() {
            let (from, to) = (pair[0], pair[1]);
            if !TransitionMatrix::<T>::is_possible(from, to) {
                return Err(AnalysisError::ImpossibleTransition {
                    episode: seq.episode_id.clone(),
                    turn: t + 1,
                    from,
                    to,
                });
            }
            counts[from.index()][to.index()] += 1;
        }
    }
    Ok(TransitionMatrix::from_counts(counts))
}

/// Outcome counts following one dialogue act.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActRow<T> {
    pub continuation: u64,
    pub rotation: u64,
    /// Moderator turns that end the episode; not part of the distribution.
    pub episode_end: u64,
    /// `None` when the act is never followed by a participant turn.
    pub p_continuation: Option<T>,
    pub p_rotation: Option<T>,
}

/// Next-speaker state conditioned on the moderator's dialogue acts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActTransitions<T> {
    pub rows: BTreeMap<DialogueAct, ActRow<T>>,
    pub per_sentence_counts: bool,
    /// Moderator sentences without a label; excluded.
    pub unannotated: Vec<SentenceKey>,
}

impl<T> ActTransitions<T> {
    pub fn row(&self, act: DialogueAct) -> Option<&ActRow<T>> {
        self.rows.get(&act)
    }
}

/// For each moderator turn, every act in its act set adds one count to the
/// state of the following turn (or to the episode-end bucket). With
/// `per_sentence_counts` an act adds one count per sentence carrying it.
pub fn act_conditioned_transitions<T: Scalar>(
    corpus: &Corpus,
    labels: &LabelIndex,
    per_sentence_counts: bool,
) -> ActTransitions<T> {
    let mut tallies: BTreeMap<DialogueAct, [u64; 3]> = BTreeMap::new();
    let mut unannotated = Vec::new();
    for ep in corpus.sorted_episodes() {
        let states = state_sequence(ep).states;
        let (views, missing) = moderator_turn_views(ep, labels);
        unannotated.extend(missing);
        for view in views {
            // 0 continuation, 1 rotation, 2 episode end
            let bucket = match states.get(view.turn + 1) {
                Some(SpeakerState::Continuation) => 0,
                Some(SpeakerState::Rotation) => 1,
                Some(SpeakerState::Moderation) => {
                    unreachable!("merged episodes never repeat the moderator")
                }
                None => 2,
            };
            for (act, n) in &view.act_counts {
                let weight = if per_sentence_counts { *n as u64 } else { 1 };
                tallies.entry(*act).or_insert([0; 3])[bucket] += weight;
            }
        }
    }
    let rows = tallies
        .into_iter()
        .map(|(act, [cont, rot, end])| {
            let total = (cont + rot) as usize;
            let p = |n: u64| (total > 0).then(|| T::ratio(n as usize, total));
            (
                act,
                ActRow {
                    continuation: cont,
                    rotation: rot,
                    episode_end: end,
                    p_continuation: p(cont),
                    p_rotation: p(rot),
                },
            )
        })
        .collect();
    ActTransitions {
        rows,
        per_sentence_counts,
        unannotated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::classify_states;
    use num_rational::Ratio;
    use SpeakerState::*;

    type Q = Ratio<i64>;

    fn seq(speakers: &[&str]) -> StateSequence {
        StateSequence {
            episode_id: "e".into(),
            states: classify_states(speakers, &"M"),
        }
    }

    #[test]
    fn strict_alternation_with_one_participant() {
        let m: TransitionMatrix<Q> =
            transition_matrix(&[seq(&["M", "A", "M", "A", "M", "A"])]).unwrap();
        // the first A is a rotation, every later A a continuation
        assert_eq!(m.count(Moderation, Rotation), 1);
        assert_eq!(m.count(Moderation, Continuation), 2);
        assert_eq!(m.prob(Moderation, Moderation), None);
        assert_eq!(m.prob(Continuation, Moderation), Some(Q::from_integer(1)));
        // once A has spoken, the moderator row is pure continuation
        let m: TransitionMatrix<Q> = transition_matrix(&[seq(&["A", "M", "A", "M", "A"])]).unwrap();
        assert_eq!(m.prob(Moderation, Continuation), Some(Q::from_integer(1)));
        assert_eq!(m.prob(Moderation, Rotation), Some(Q::from_integer(0)));
    }

    #[test]
    fn empty_row_is_undefined_not_nan() {
        let m: TransitionMatrix<f64> = transition_matrix(&[seq(&["M", "A"])]).unwrap();
        assert!(!m.row_defined(Continuation));
        assert!(!m.row_defined(Rotation));
        assert_eq!(m.prob(Rotation, Moderation), None);
    }

    #[test]
    fn impossible_pairs_are_rejected() {
        let bad = StateSequence {
            episode_id: "x".into(),
            states: vec![Moderation, Moderation],
        };
        assert!(matches!(
            transition_matrix::<f64>(&[bad]),
            Err(AnalysisError::ImpossibleTransition { .. })
        ));
        let short = seq(&["M"]);
        assert_eq!(
            transition_matrix::<f64>(&[short]),
            Err(AnalysisError::NoTransitions)
        );
    }
}
