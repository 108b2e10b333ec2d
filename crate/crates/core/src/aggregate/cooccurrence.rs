use std::collections::BTreeMap;

use serde::Serialize;

use crate::schema::{ordered_labels, Annotation, Dimension, SentenceKey};
use crate::Scalar;

/// Symmetric label-by-label vote pair counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CooccurrenceMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl CooccurrenceMatrix {
    pub fn count(&self, a: &str, b: &str) -> u64 {
        let i = self.labels.iter().position(|l| l == a);
        let j = self.labels.iter().position(|l| l == b);
        match (i, j) {
            (Some(i), Some(j)) => self.counts[i][j],
            _ => 0,
        }
    }

    /// Each row divided by its sum; all-zero rows stay zero.
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

/// Co-occurrence from per-unit label lists. Each unordered pair of votes in
/// a unit adds one to cell `(a, b)` and, when `a != b`, to `(b, a)`.
pub fn cooccurrence_from_units(units: &[Vec<String>], labels: Vec<String>) -> CooccurrenceMatrix {
    let pos: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut counts = vec![vec![0u64; labels.len()]; labels.len()];
    for unit in units {
        for i in 0..unit.len() {
            for j in i + 1..unit.len() {
                let (a, b) = (pos[unit[i].as_str()], pos[unit[j].as_str()]);
                counts[a][b] += 1;
                if a != b {
                    counts[b][a] += 1;
                }
            }
        }
    }
    CooccurrenceMatrix { labels, counts }
}

/// Vote co-occurrence over all sentences with two or more annotations.
pub fn vote_cooccurrence(annotations: &[Annotation], dim: Dimension) -> CooccurrenceMatrix {
    let mut units: BTreeMap<&SentenceKey, Vec<String>> = BTreeMap::new();
    for a in annotations {
        units
            .entry(&a.key)
            .or_default()
            .push(crate::schema::Labeled::label(a, dim));
    }
    let units: Vec<Vec<String>> = units.into_values().filter(|u| u.len() >= 2).collect();
    let labels = ordered_labels(dim, units.iter().flatten().cloned());
    cooccurrence_from_units(&units, labels)
}
