//! Scoring predicted labels against gold (consensus) labels.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::aggregate::{krippendorff_alpha, AlphaError, Level};
use crate::corpus::Corpus;
use crate::schema::{
    ordered_labels, target_vocabulary, DialogueAct, Dimension, Labeled, SentenceKey,
};
use crate::Scalar;

/// Seeds used by the random baseline.
pub const BASELINE_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no prediction for gold sentence {0}")]
    MissingPrediction(SentenceKey),
    #[error("duplicate prediction for sentence {0}")]
    DuplicatePrediction(SentenceKey),
    #[error("no gold labels")]
    EmptyGold,
    #[error("gold sentence {0} belongs to an episode missing from the corpus")]
    UnknownEpisode(SentenceKey),
    #[error("agreement: {0}")]
    Alpha(AlphaError),
}

/// Which classes enter the macro average.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassUniverse {
    /// Every class seen in gold or predictions.
    #[default]
    Union,
    /// Only classes with gold support.
    GoldOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassScores<T> {
    pub class: String,
    pub precision: T,
    pub recall: T,
    pub f1: T,
    /// Gold count.
    pub support: usize,
    pub predicted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionScores<T> {
    pub macro_f1: T,
    pub classes: Vec<ClassScores<T>>,
    pub sentences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport<T> {
    pub universe: ClassUniverse,
    pub dimensions: BTreeMap<Dimension, DimensionScores<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub dimension: Dimension,
    /// Row and column labels (gold rows, predicted columns).
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn count(&self, gold: &str, pred: &str) -> u64 {
        let i = self.labels.iter().position(|l| l == gold);
        let j = self.labels.iter().position(|l| l == pred);
        match (i, j) {
            (Some(i), Some(j)) => self.counts[i][j],
            _ => 0,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &c)| i == j || c == 0))
    }

    /// Rows divided by gold support; empty rows stay zero.
    pub fn row_normalized<T: Scalar>(&self) -> Vec<Vec<T>> {
        self.counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| {
                        if total == 0 {
                            T::zero()
                        } else {
                            T::ratio(c as usize, total as usize)
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Pairs each gold item with its prediction. Predictions for sentences
/// outside the gold set are ignored.
pub fn align<'a, G: Labeled, P: Labeled>(
    gold: &'a [G],
    pred: &'a [P],
) -> Result<Vec<(&'a G, &'a P)>, EvalError> {
    let mut by_key: HashMap<&SentenceKey, &P> = HashMap::with_capacity(pred.len());
    for p in pred {
        if by_key.insert(p.key(), p).is_some() {
            return Err(EvalError::DuplicatePrediction(p.key().clone()));
        }
    }
    gold.iter()
        .map(|g| {
            by_key
                .get(g.key())
                .map(|p| (g, *p))
                .ok_or_else(|| EvalError::MissingPrediction(g.key().clone()))
        })
        .collect()
}

/// Per-class precision, recall and F1 over (gold, predicted) label pairs.
/// Classes are ordered for display by [`ordered_labels`].
pub fn class_scores<T: Scalar>(
    pairs: &[(String, String)],
    dim: Dimension,
    universe: ClassUniverse,
) -> Vec<ClassScores<T>> {
    let mut support: BTreeMap<&str, usize> = BTreeMap::new();
    let mut predicted: BTreeMap<&str, usize> = BTreeMap::new();
    let mut hits: BTreeMap<&str, usize> = BTreeMap::new();
    for (g, p) in pairs {
        *support.entry(g).or_default() += 1;
        *predicted.entry(p).or_default() += 1;
        if g == p {
            *hits.entry(g).or_default() += 1;
        }
    }
    let classes: Vec<String> = match universe {
        ClassUniverse::Union => ordered_labels(
            dim,
            support
                .keys()
                .chain(predicted.keys())
                .map(|s| s.to_string()),
        ),
        ClassUniverse::GoldOnly => ordered_labels(dim, support.keys().map(|s| s.to_string())),
    };
    classes
        .into_iter()
        .map(|class| {
            let tp = hits.get(class.as_str()).copied().unwrap_or(0);
            let sup = support.get(class.as_str()).copied().unwrap_or(0);
            let pred = predicted.get(class.as_str()).copied().unwrap_or(0);
            let frac = |n: usize, d: usize| if d == 0 { T::zero() } else { T::ratio(n, d) };
            ClassScores {
                precision: frac(tp, pred),
                recall: frac(tp, sup),
                // 2tp / (2tp + fp + fn) == 2tp / (pred + support)
                f1: frac(2 * tp, pred + sup),
                class,
                support: sup,
                predicted: pred,
            }
        })
        .collect()
}

fn mean_f1<T: Scalar>(scores: &[ClassScores<T>]) -> T {
    let f1s: Vec<T> = scores.iter().map(|c| c.f1).collect();
    T::mean(&f1s).unwrap_or_else(T::zero)
}

/// Unweighted mean of per-class F1 over label pairs.
pub fn macro_f1_pairs<T: Scalar>(
    pairs: &[(String, String)],
    dim: Dimension,
    universe: ClassUniverse,
) -> T {
    mean_f1(&class_scores::<T>(pairs, dim, universe))
}

fn label_pairs<G: Labeled, P: Labeled>(
    aligned: &[(&G, &P)],
    dim: Dimension,
) -> Vec<(String, String)> {
    aligned
        .iter()
        .map(|(g, p)| (g.label(dim), p.label(dim)))
        .collect()
}

/// Macro-F1 of predictions against gold on one dimension.
pub fn macro_f1<T: Scalar, G: Labeled, P: Labeled>(
    gold: &[G],
    pred: &[P],
    dim: Dimension,
    universe: ClassUniverse,
) -> Result<T, EvalError> {
    let aligned = align(gold, pred)?;
    Ok(macro_f1_pairs(&label_pairs(&aligned, dim), dim, universe))
}

/// Full per-class report for the requested dimensions.
pub fn evaluate<T: Scalar, G: Labeled, P: Labeled>(
    gold: &[G],
    pred: &[P],
    dims: &[Dimension],
    universe: ClassUniverse,
) -> Result<EvalReport<T>, EvalError> {
    let aligned = align(gold, pred)?;
    let dimensions = dims
        .iter()
        .map(|&dim| {
            let classes = class_scores::<T>(&label_pairs(&aligned, dim), dim, universe);
            (
                dim,
                DimensionScores {
                    macro_f1: mean_f1(&classes),
                    classes,
                    sentences: aligned.len(),
                },
            )
        })
        .collect();
    Ok(EvalReport {
        universe,
        dimensions,
    })
}

pub fn confusion<G: Labeled, P: Labeled>(
    gold: &[G],
    pred: &[P],
    dim: Dimension,
) -> Result<ConfusionMatrix, EvalError> {
    let pairs = label_pairs(&align(gold, pred)?, dim);
    let mut labels = ordered_labels(dim, pairs.iter().flat_map(|(g, p)| [g.clone(), p.clone()]));
    if dim.motive().is_some() {
        // motives are always 2x2
        labels = vec!["false".to_string(), "true".to_string()];
    }
    let pos: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut counts = vec![vec![0u64; labels.len()]; labels.len()];
    for (g, p) in &pairs {
        counts[pos[g.as_str()]][pos[p.as_str()]] += 1;
    }
    Ok(ConfusionMatrix {
        dimension: dim,
        labels,
        counts,
    })
}

/// Label space a uniform random annotator draws from, per gold item.
fn label_space<G: Labeled>(
    gold: &[G],
    corpus: &Corpus,
    dim: Dimension,
) -> Result<Vec<Vec<String>>, EvalError> {
    match dim {
        Dimension::DA => {
            let acts: Vec<String> = DialogueAct::ALL
                .iter()
                .map(|a| a.code().to_string())
                .collect();
            Ok(vec![acts; gold.len()])
        }
        Dimension::TS => {
            let mut cache: HashMap<&str, Vec<String>> = HashMap::new();
            gold.iter()
                .map(|g| {
                    let key = g.key();
                    if let Some(v) = cache.get(key.episode.as_str()) {
                        return Ok(v.clone());
                    }
                    let ep = corpus
                        .episode(&key.episode)
                        .ok_or_else(|| EvalError::UnknownEpisode(key.clone()))?;
                    let v: Vec<String> = target_vocabulary(ep)
                        .iter()
                        .map(|t| t.canonical())
                        .collect();
                    cache.insert(key.episode.as_str(), v.clone());
                    Ok(v)
                })
                .collect()
        }
        _ => Ok(vec![
            vec!["true".to_string(), "false".to_string()];
            gold.len()
        ]),
    }
}

/// Macro-F1 of one uniform random annotator seeded with `seed`.
pub fn random_run<T: Scalar, G: Labeled>(
    gold: &[G],
    corpus: &Corpus,
    dim: Dimension,
    seed: u64,
    universe: ClassUniverse,
) -> Result<T, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let spaces = label_space(gold, corpus, dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(String, String)> = gold
        .iter()
        .zip(&spaces)
        .map(|(g, space)| (g.label(dim), space[rng.gen_range(0..space.len())].clone()))
        .collect();
    Ok(macro_f1_pairs(&pairs, dim, universe))
}

/// Mean macro-F1 of uniform random annotators over `seeds`.
pub fn random_baseline<T: Scalar, G: Labeled>(
    gold: &[G],
    corpus: &Corpus,
    dim: Dimension,
    seeds: &[u64],
    universe: ClassUniverse,
) -> Result<T, EvalError> {
    let runs = seeds
        .iter()
        .map(|&s| random_run::<T, G>(gold, corpus, dim, s, universe))
        .collect::<Result<Vec<T>, _>>()?;
    T::mean(&runs).ok_or(EvalError::EmptyGold)
}

/// Krippendorff's alpha with the gold labels and the predictions as two
/// annotators.
pub fn model_human_alpha<T: Scalar, G: Labeled, P: Labeled>(
    gold: &[G],
    pred: &[P],
    dim: Dimension,
) -> Result<T, EvalError> {
    let units: Vec<Vec<Option<String>>> = align(gold, pred)?
        .iter()
        .map(|(g, p)| vec![Some(g.label(dim)), Some(p.label(dim))])
        .collect();
    let level = if dim.motive().is_some() {
        Level::Binary
    } else {
        Level::Nominal
    };
    krippendorff_alpha(&units, level).map_err(EvalError::Alpha)
}
