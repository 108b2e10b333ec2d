use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::AggregateError;
use crate::corpus::Corpus;
use crate::schema::{
    target_vocabulary, Annotation, DialogueAct, Dimension, Labeled, Motive, MotiveSet, SentenceKey,
    TargetLabel,
};

/// Annotator id written on consensus records.
pub const CONSENSUS_ANNOTATOR: &str = "consensus";

/// How a dimension with a tied top vote is settled.
#[derive(Debug, Clone, Default)]
pub enum TiebreakPolicy {
    /// Fixed priority: positive motive over negative, acts in
    /// prob>conf>inst>inte>supp>util order, targets in vocabulary order.
    #[default]
    PriorityOrder,
    /// Same placeholder value as `PriorityOrder`, but the dimension is also
    /// listed as unresolved.
    FlagOnly,
    /// Manual resolutions keyed by sentence. Keys without a resolution fall
    /// back to priority order and are listed as unresolved.
    External(ExternalResolutions),
}

#[derive(Debug, Clone, Default)]
pub struct ExternalResolutions {
    by_key: HashMap<SentenceKey, Annotation>,
}

impl ExternalResolutions {
    pub fn new(resolutions: impl IntoIterator<Item = Annotation>) -> Self {
        ExternalResolutions {
            by_key: resolutions
                .into_iter()
                .map(|a| (a.key.clone(), a))
                .collect(),
        }
    }

    pub fn get(&self, key: &SentenceKey) -> Option<&Annotation> {
        self.by_key.get(key)
    }
}

/// Raw vote counts per dimension.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VoteDetail {
    /// (true votes, false votes) per motive code.
    pub motives: BTreeMap<String, (usize, usize)>,
    pub acts: BTreeMap<String, usize>,
    pub targets: BTreeMap<String, usize>,
}

/// Consensus label for one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregatedAnnotation {
    pub key: SentenceKey,
    pub motives: MotiveSet,
    pub act: DialogueAct,
    pub target: TargetLabel,
    /// Dimensions whose top vote count was shared by two or more labels.
    pub tie_flags: BTreeSet<Dimension>,
    /// Tied dimensions the policy did not settle.
    pub unresolved: BTreeSet<Dimension>,
    pub votes: VoteDetail,
    pub annotator_count: usize,
}

impl AggregatedAnnotation {
    pub fn to_annotation(&self) -> Annotation {
        Annotation {
            key: self.key.clone(),
            annotator: CONSENSUS_ANNOTATOR.to_string(),
            motives: self.motives,
            act: self.act,
            target: self.target.clone(),
            rationale: None,
        }
    }
}

impl Labeled for AggregatedAnnotation {
    fn key(&self) -> &SentenceKey {
        &self.key
    }
    fn motives(&self) -> MotiveSet {
        self.motives
    }
    fn act(&self) -> DialogueAct {
        self.act
    }
    fn target(&self) -> &TargetLabel {
        &self.target
    }
}

/// Winner of a count table. Ties go to the label with the lowest `rank`.
fn pick<L: Clone>(counts: &[(L, usize)], rank: impl Fn(&L) -> usize) -> (L, bool) {
    let top = counts
        .iter()
        .map(|(_, c)| *c)
        .max()
        .expect("non-empty counts");
    let mut leaders: Vec<&L> = counts
        .iter()
        .filter(|(_, c)| *c == top)
        .map(|(l, _)| l)
        .collect();
    leaders.sort_by_key(|l| rank(l));
    (leaders[0].clone(), leaders.len() > 1)
}

/// Per-dimension majority vote over one sentence's annotations.
///
/// `vocabulary` ranks target labels for the priority tie-break; labels not
/// in it rank after all vocabulary entries, by canonical string.
pub fn majority_vote(
    annotations: &[Annotation],
    policy: &TiebreakPolicy,
    vocabulary: &[TargetLabel],
) -> Result<AggregatedAnnotation, AggregateError> {
    let first = annotations.first().ok_or(AggregateError::Empty)?;
    let key = first.key.clone();
    if let Some(other) = annotations.iter().find(|a| a.key != key) {
        return Err(AggregateError::MixedKeys {
            expected: key,
            found: other.key.clone(),
        });
    }

    let mut votes = VoteDetail::default();
    let mut tie_flags = BTreeSet::new();
    let mut motives = MotiveSet::default();
    for m in Motive::ALL {
        let yes = annotations.iter().filter(|a| a.motives.get(m)).count();
        let no = annotations.len() - yes;
        votes.motives.insert(m.code().to_string(), (yes, no));
        let (value, tied) = pick(&[(true, yes), (false, no)], |&v| usize::from(!v));
        motives.set(m, value);
        if tied {
            tie_flags.insert(m.dimension());
        }
    }

    let mut act_counts: BTreeMap<DialogueAct, usize> = BTreeMap::new();
    for a in annotations {
        *act_counts.entry(a.act).or_default() += 1;
    }
    votes.acts = act_counts
        .iter()
        .map(|(k, v)| (k.code().to_string(), *v))
        .collect();
    let act_table: Vec<(DialogueAct, usize)> = act_counts.into_iter().collect();
    let (mut act, act_tied) = pick(&act_table, |a| *a as usize);
    if act_tied {
        tie_flags.insert(Dimension::DA);
    }

    let mut target_counts: BTreeMap<TargetLabel, usize> = BTreeMap::new();
    for a in annotations {
        *target_counts.entry(a.target.clone()).or_default() += 1;
    }
    votes.targets = target_counts
        .iter()
        .map(|(k, v)| (k.canonical(), *v))
        .collect();
    let mut target_table: Vec<(TargetLabel, usize)> = target_counts.into_iter().collect();
    // Stable secondary order for labels outside the vocabulary.
    target_table.sort_by_key(|a| a.0.canonical());
    let outside: Vec<String> = target_table.iter().map(|(t, _)| t.canonical()).collect();
    let rank = |t: &TargetLabel| match vocabulary.iter().position(|v| v == t) {
        Some(i) => i,
        None => {
            vocabulary.len()
                + outside
                    .iter()
                    .position(|c| *c == t.canonical())
                    .unwrap_or(0)
        }
    };
    let (mut target, target_tied) = pick(&target_table, rank);
    if target_tied {
        tie_flags.insert(Dimension::TS);
    }

    let mut unresolved = BTreeSet::new();
    match policy {
        TiebreakPolicy::PriorityOrder => {}
        TiebreakPolicy::FlagOnly => unresolved = tie_flags.clone(),
        TiebreakPolicy::External(res) => match res.get(&key) {
            Some(r) => {
                for dim in &tie_flags {
                    match dim {
                        Dimension::DA => act = r.act,
                        Dimension::TS => target = r.target.clone(),
                        m => {
                            let m = m.motive().expect("motive");
                            motives.set(m, r.motives.get(m));
                        }
                    }
                }
            }
            None => unresolved = tie_flags.clone(),
        },
    }

    Ok(AggregatedAnnotation {
        key,
        motives,
        act,
        target,
        tie_flags,
        unresolved,
        votes,
        annotator_count: annotations.len(),
    })
}

/// Groups annotations by sentence and votes each group. Output is sorted by
/// key. Episodes missing from the corpus are an error.
pub fn aggregate_all(
    annotations: &[Annotation],
    policy: &TiebreakPolicy,
    corpus: &Corpus,
) -> Result<Vec<AggregatedAnnotation>, AggregateError> {
    let mut groups: BTreeMap<&SentenceKey, Vec<Annotation>> = BTreeMap::new();
    for a in annotations {
        groups.entry(&a.key).or_default().push(a.clone());
    }
    let mut vocab_cache: HashMap<&str, Vec<TargetLabel>> = HashMap::new();
    let mut out = Vec::with_capacity(groups.len());
    for (key, group) in groups {
        let vocab = match vocab_cache.get(key.episode.as_str()) {
            Some(v) => v,
            None => {
                let ep = corpus
                    .episode(&key.episode)
                    .ok_or_else(|| AggregateError::UnknownEpisode(key.episode.clone()))?;
                vocab_cache
                    .entry(key.episode.as_str())
                    .or_insert_with(|| target_vocabulary(ep))
            }
        };
        out.push(majority_vote(&group, policy, vocab)?);
    }
    Ok(out)
}
