use std::collections::BTreeMap;

use num_traits::Float;
use serde::Serialize;

use super::labels::LabelIndex;
use super::significance::{cross_corpus_test, TestOutcome};
use crate::corpus::Corpus;
use crate::schema::{DialogueAct, Motive, SentenceKey};
use crate::Scalar;

/// One episode's contribution to a conditional table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeSample<T> {
    pub episode: String,
    /// Labelled moderator sentences.
    pub sentences: usize,
    pub motive_counts: BTreeMap<Motive, usize>,
    /// p(act | motive); `None` when the motive never occurs.
    pub conditional: BTreeMap<Motive, Option<BTreeMap<DialogueAct, T>>>,
    pub p_motive: BTreeMap<Motive, T>,
    pub p_act: BTreeMap<DialogueAct, T>,
}

/// Acts given motives, plus motive and act marginals, averaged over
/// episodes with equal weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalTable<T> {
    /// Mean p(act | motive); `None` when no episode contributes to the row.
    pub conditional: BTreeMap<Motive, Option<BTreeMap<DialogueAct, T>>>,
    /// Episodes averaged into each row.
    pub row_episodes: BTreeMap<Motive, usize>,
    pub p_motive: BTreeMap<Motive, T>,
    pub p_act: BTreeMap<DialogueAct, T>,
    pub episode_count: usize,
    /// Episodes without the motive count as zero rows instead of being
    /// left out.
    pub zero_fill: bool,
    pub samples: Vec<EpisodeSample<T>>,
    pub unannotated: Vec<SentenceKey>,
}

/// A cell of a conditional table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cell {
    Conditional { motive: Motive, act: DialogueAct },
    Motive { motive: Motive },
    Act { act: DialogueAct },
}

impl Cell {
    /// Every cell in table order: conditional rows, motive marginals, act
    /// marginals.
    pub fn all() -> Vec<Cell> {
        let mut cells = Vec::new();
        for motive in Motive::ALL {
            for act in DialogueAct::ALL {
                cells.push(Cell::Conditional { motive, act });
            }
        }
        cells.extend(Motive::ALL.map(|motive| Cell::Motive { motive }));
        cells.extend(DialogueAct::ALL.map(|act| Cell::Act { act }));
        cells
    }
}

impl<T: Scalar> ConditionalTable<T> {
    pub fn p_act_given(&self, motive: Motive, act: DialogueAct) -> Option<T> {
        self.conditional.get(&motive)?.as_ref()?.get(&act).copied()
    }

    pub fn value(&self, cell: Cell) -> Option<T> {
        match cell {
            Cell::Conditional { motive, act } => self.p_act_given(motive, act),
            Cell::Motive { motive } => self.p_motive.get(&motive).copied(),
            Cell::Act { act } => self.p_act.get(&act).copied(),
        }
    }

    /// Per-episode values behind a cell, in episode-id order. Episodes
    /// left out of the cell's mean are left out here too.
    pub fn cell_samples(&self, cell: Cell) -> Vec<(String, T)> {
        self.samples
            .iter()
            .filter_map(|s| {
                let v = match cell {
                    Cell::Conditional { motive, act } => match &s.conditional[&motive] {
                        Some(row) => Some(row[&act]),
                        None if self.zero_fill => Some(T::zero()),
                        None => None,
                    },
                    Cell::Motive { motive } => Some(s.p_motive[&motive]),
                    Cell::Act { act } => Some(s.p_act[&act]),
                };
                v.map(|v| (s.episode.clone(), v))
            })
            .collect()
    }
}

fn episode_sample<T: Scalar>(
    ep: &crate::corpus::Episode,
    labels: &LabelIndex,
    missing: &mut Vec<SentenceKey>,
) -> Option<EpisodeSample<T>> {
    let mut n = 0usize;
    let mut motive_counts: BTreeMap<Motive, usize> = Motive::ALL.iter().map(|&m| (m, 0)).collect();
    let mut joint: BTreeMap<(Motive, DialogueAct), usize> = BTreeMap::new();
    let mut act_counts: BTreeMap<DialogueAct, usize> =
        DialogueAct::ALL.iter().map(|&a| (a, 0)).collect();
    for (t, turn) in ep.turns().iter().enumerate() {
        if !ep.is_moderator_turn(turn) {
            continue;
        }
        for s in &turn.sentences {
            let key = SentenceKey::new(ep.id(), t, s.index);
            let Some(label) = labels.get(&key) else {
                missing.push(key);
                continue;
            };
            n += 1;
            *act_counts.get_mut(&label.act).unwrap() += 1;
            for m in label.motives.present() {
                *motive_counts.get_mut(&m).unwrap() += 1;
                *joint.entry((m, label.act)).or_default() += 1;
            }
        }
    }
    if n == 0 {
        return None;
    }
    let conditional = Motive::ALL
        .iter()
        .map(|&m| {
            let cm = motive_counts[&m];
            let row = (cm > 0).then(|| {
                DialogueAct::ALL
                    .iter()
                    .map(|&a| (a, T::ratio(joint.get(&(m, a)).copied().unwrap_or(0), cm)))
                    .collect()
            });
            (m, row)
        })
        .collect();
    Some(EpisodeSample {
        episode: ep.id().to_string(),
        sentences: n,
        p_motive: motive_counts
            .iter()
            .map(|(&m, &c)| (m, T::ratio(c, n)))
            .collect(),
        p_act: act_counts
            .iter()
            .map(|(&a, &c)| (a, T::ratio(c, n)))
            .collect(),
        motive_counts,
        conditional,
    })
}

/// Per episode: p(d|m) = #(m and d) / #(m), p(m) and p(d) as fractions of
/// labelled moderator sentences. Table cells are unweighted means over
/// episodes; a row leaves out episodes without the motive unless
/// `zero_fill` is set.
pub fn conditional_table<T: Scalar>(
    corpus: &Corpus,
    labels: &LabelIndex,
    zero_fill: bool,
) -> ConditionalTable<T> {
    let mut unannotated = Vec::new();
    let samples: Vec<EpisodeSample<T>> = corpus
        .sorted_episodes()
        .into_iter()
        .filter_map(|ep| episode_sample(ep, labels, &mut unannotated))
        .collect();

    let mut conditional = BTreeMap::new();
    let mut row_episodes = BTreeMap::new();
    for m in Motive::ALL {
        let rows: Vec<Option<&BTreeMap<DialogueAct, T>>> = samples
            .iter()
            .map(|s| s.conditional[&m].as_ref())
            .filter(|r| r.is_some() || zero_fill)
            .collect();
        row_episodes.insert(m, rows.len());
        let row = (!rows.is_empty()).then(|| {
            DialogueAct::ALL
                .iter()
                .map(|&a| {
                    let vals: Vec<T> = rows
                        .iter()
                        .map(|r| r.map_or(T::zero(), |r| r[&a]))
                        .collect();
                    (a, T::mean(&vals).expect("non-empty"))
                })
                .collect()
        });
        conditional.insert(m, row);
    }
    let mean_of = |get: &dyn Fn(&EpisodeSample<T>) -> T| {
        let vals: Vec<T> = samples.iter().map(get).collect();
        T::mean(&vals).unwrap_or_else(T::zero)
    };
    let p_motive = Motive::ALL
        .iter()
        .map(|&m| (m, mean_of(&|s| s.p_motive[&m])))
        .collect();
    let p_act = DialogueAct::ALL
        .iter()
        .map(|&a| (a, mean_of(&|s| s.p_act[&a])))
        .collect();

    ConditionalTable {
        conditional,
        row_episodes,
        p_motive,
        p_act,
        episode_count: samples.len(),
        zero_fill,
        samples,
        unannotated,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellTest<F> {
    pub cell: Cell,
    pub outcome: TestOutcome<F>,
}

/// Two tables with a Welch test on every cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceComparison<F> {
    pub left: ConditionalTable<F>,
    pub right: ConditionalTable<F>,
    pub tests: Vec<CellTest<F>>,
    /// Sentences labelled by only one of the two sources, with the side
    /// that has them.
    pub coverage_mismatch: Vec<(SentenceKey, super::Side)>,
}

/// Welch test per cell between two tables' per-episode samples.
pub fn compare_tables<F: Scalar + Float>(
    a: &ConditionalTable<F>,
    b: &ConditionalTable<F>,
) -> Vec<CellTest<F>> {
    Cell::all()
        .into_iter()
        .map(|cell| {
            let xa: Vec<F> = a.cell_samples(cell).into_iter().map(|(_, v)| v).collect();
            let xb: Vec<F> = b.cell_samples(cell).into_iter().map(|(_, v)| v).collect();
            CellTest {
                cell,
                outcome: cross_corpus_test(&xa, &xb),
            }
        })
        .collect()
}

/// Conditional tables for two label sources over the same corpus, tested
/// cell by cell.
pub fn compare_sources<F: Scalar + Float>(
    corpus: &Corpus,
    left: &LabelIndex,
    right: &LabelIndex,
    zero_fill: bool,
) -> SourceComparison<F> {
    let mut coverage_mismatch: Vec<(SentenceKey, super::Side)> = left
        .keys()
        .filter(|k| right.get(k).is_none())
        .map(|k| (k.clone(), super::Side::A))
        .chain(
            right
                .keys()
                .filter(|k| left.get(k).is_none())
                .map(|k| (k.clone(), super::Side::B)),
        )
        .collect();
    coverage_mismatch.sort();
    let l = conditional_table(corpus, left, zero_fill);
    let r = conditional_table(corpus, right, zero_fill);
    let tests = compare_tables(&l, &r);
    SourceComparison {
        left: l,
        right: r,
        tests,
        coverage_mismatch,
    }
}
