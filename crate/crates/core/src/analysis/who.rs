use serde::Serialize;

use super::labels::{moderator_turn_views, LabelIndex};
use crate::corpus::Corpus;
use crate::schema::{SentenceKey, TargetLabel};
use crate::Scalar;

/// A moderator turn that opens an episode has no previous speaker and
/// counts as pro-active.
pub const EPISODE_INITIAL_IS_PROACTIVE: bool = true;
/// A moderator turn that closes an episode has no next speaker and counts
/// as not interactive.
pub const EPISODE_FINAL_IS_INTERACTIVE: bool = false;

/// Turn-level target-speaker proportions over moderator turns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhoMetrics<T> {
    /// Previous speaker not among the targets.
    pub pro_activity: T,
    /// Next speaker among the targets.
    pub interactivity: T,
    /// Every target is an individual participant.
    pub specificity: T,
    /// Moderator turns with at least one labelled sentence.
    pub moderator_turns: usize,
    pub unannotated: Vec<SentenceKey>,
}

/// Pro-activity, interactivity and specificity. The target set of a turn
/// is the union of its sentence targets; a speaker is "in" the set only
/// through their own individual label.
pub fn who_metrics<T: Scalar>(corpus: &Corpus, labels: &LabelIndex) -> WhoMetrics<T> {
    let (mut m, mut pro, mut inter, mut spec) = (0usize, 0usize, 0usize, 0usize);
    let mut unannotated = Vec::new();
    for ep in corpus.sorted_episodes() {
        let (views, missing) = moderator_turn_views(ep, labels);
        unannotated.extend(missing);
        for v in views {
            m += 1;
            let targeted =
                |speaker: &String| v.targets.contains(&TargetLabel::Speaker(speaker.clone()));
            let proactive = match &v.prev_speaker {
                Some(p) => !targeted(p),
                None => EPISODE_INITIAL_IS_PROACTIVE,
            };
            let interactive = match &v.next_speaker {
                Some(n) => n != &ep.moderator().id && targeted(n),
                None => EPISODE_FINAL_IS_INTERACTIVE,
            };
            let specific = v.targets.iter().all(TargetLabel::is_individual);
            pro += usize::from(proactive);
            inter += usize::from(interactive);
            spec += usize::from(specific);
        }
    }
    let frac = |n: usize| if m == 0 { T::zero() } else { T::ratio(n, m) };
    WhoMetrics {
        pro_activity: frac(pro),
        interactivity: frac(inter),
        specificity: frac(spec),
        moderator_turns: m,
        unannotated,
    }
}
