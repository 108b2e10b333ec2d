use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::AlphaError;
use crate::schema::{Annotation, Dimension, Labeled, SentenceKey};
use crate::Scalar;

/// Measurement level. Binary data is nominal data with at most two values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Nominal,
    Binary,
}

/// Krippendorff's alpha with the nominal distance.
///
/// `units[u][a]` is annotator `a`'s value for unit `u`, `None` when
/// missing. Units with fewer than two values are not pairable and are
/// ignored. The coincidence matrix is
/// `o[c][k] = sum_u n_uc * (n_uk - [c == k]) / (m_u - 1)` and
/// `alpha = 1 - (n - 1) * sum_{c != k} o[c][k] / sum_{c != k} n_c * n_k`.
pub fn krippendorff_alpha<L, T>(units: &[Vec<Option<L>>], level: Level) -> Result<T, AlphaError>
where
    L: Ord + Clone,
    T: Scalar,
{
    let mut index: BTreeMap<&L, usize> = BTreeMap::new();
    for v in units.iter().flatten().flatten() {
        let next = index.len();
        index.entry(v).or_insert(next);
    }
    if level == Level::Binary && index.len() > 2 {
        return Err(AlphaError::NotBinary(index.len()));
    }
    let k = index.len();
    let mut coincidence = vec![vec![T::zero(); k]; k];
    let mut pairable = 0usize;
    for unit in units {
        let mut counts = vec![0usize; k];
        let mut m = 0usize;
        for v in unit.iter().flatten() {
            counts[index[v]] += 1;
            m += 1;
        }
        if m < 2 {
            continue;
        }
        pairable += m;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            for d in 0..k {
                let pairs = if c == d {
                    counts[c] * (counts[c] - 1)
                } else {
                    counts[c] * counts[d]
                };
                if pairs > 0 {
                    coincidence[c][d] = coincidence[c][d] + T::ratio(pairs, m - 1);
                }
            }
        }
    }
    if pairable < 2 {
        return Err(AlphaError::InsufficientData);
    }
    let marginals: Vec<T> = coincidence
        .iter()
        .map(|row| row.iter().fold(T::zero(), |a, &b| a + b))
        .collect();
    let n = marginals.iter().fold(T::zero(), |a, &b| a + b);
    let mut observed = T::zero();
    let mut expected = T::zero();
    for c in 0..k {
        for d in 0..k {
            if c != d {
                observed = observed + coincidence[c][d];
                expected = expected + marginals[c] * marginals[d];
            }
        }
    }
    if expected == T::zero() {
        return Err(AlphaError::Degenerate);
    }
    Ok(T::one() - (n - T::one()) * observed / expected)
}

/// Agreement per dimension across annotators.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaReport<T> {
    pub alpha: BTreeMap<Dimension, Result<T, AlphaError>>,
    /// Units (sentences) with at least two annotations.
    pub unit_count: usize,
    pub annotator_count: usize,
}

/// Builds the unit-by-annotator matrix for one dimension. Rows follow
/// `keys`, columns follow `annotators`.
pub fn reliability_matrix<A: Labeled>(
    items: &[(&str, &A)],
    keys: &[SentenceKey],
    annotators: &[String],
    dim: Dimension,
) -> Vec<Vec<Option<String>>> {
    let row_of: BTreeMap<&SentenceKey, usize> =
        keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let col_of: BTreeMap<&str, usize> = annotators
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    let mut m = vec![vec![None; annotators.len()]; keys.len()];
    for (who, a) in items {
        if let (Some(&r), Some(&c)) = (row_of.get(a.key()), col_of.get(who)) {
            m[r][c] = Some(a.label(dim));
        }
    }
    m
}

/// Alpha for each requested dimension, treating every distinct annotator id
/// as a coder and every annotated sentence as a unit.
pub fn annotator_alpha<T: Scalar>(
    annotations: &[Annotation],
    dims: &[Dimension],
) -> AlphaReport<T> {
    let keys: Vec<SentenceKey> = annotations
        .iter()
        .map(|a| a.key.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let annotators: Vec<String> = annotations
        .iter()
        .map(|a| a.annotator.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let items: Vec<(&str, &Annotation)> = annotations
        .iter()
        .map(|a| (a.annotator.as_str(), a))
        .collect();
    let mut per_key: BTreeMap<&SentenceKey, usize> = BTreeMap::new();
    for a in annotations {
        *per_key.entry(&a.key).or_default() += 1;
    }
    let unit_count = per_key.values().filter(|&&n| n >= 2).count();
    let alpha = dims
        .iter()
        .map(|&dim| {
            let m = reliability_matrix(&items, &keys, &annotators, dim);
            let level = if dim.motive().is_some() {
                Level::Binary
            } else {
                Level::Nominal
            };
            (dim, krippendorff_alpha::<String, T>(&m, level))
        })
        .collect();
    AlphaReport {
        alpha,
        unit_count,
        annotator_count: annotators.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    type Q = Ratio<i64>;

    fn m(rows: &[&[Option<u8>]]) -> Vec<Vec<Option<u8>>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn perfect_agreement_is_one() {
        let units: Vec<Vec<Option<u8>>> = (0..10).map(|u| vec![Some((u % 2) as u8); 3]).collect();
        assert_eq!(
            krippendorff_alpha::<_, Q>(&units, Level::Nominal).unwrap(),
            Q::from_integer(1)
        );
        assert_eq!(
            krippendorff_alpha::<_, f64>(&units, Level::Nominal).unwrap(),
            1.0
        );
    }

    #[test]
    fn all_identical_is_degenerate() {
        let units = vec![vec![Some(1u8); 3]; 4];
        assert_eq!(
            krippendorff_alpha::<_, f64>(&units, Level::Nominal),
            Err(AlphaError::Degenerate)
        );
    }

    #[test]
    fn nothing_pairable_is_insufficient() {
        let units = m(&[&[Some(1), None], &[None, Some(2)]]);
        assert_eq!(
            krippendorff_alpha::<_, f64>(&units, Level::Nominal),
            Err(AlphaError::InsufficientData)
        );
    }

    #[test]
    fn binary_rejects_third_value() {
        let units = m(&[&[Some(1), Some(2)], &[Some(3), Some(3)]]);
        assert_eq!(
            krippendorff_alpha::<_, f64>(&units, Level::Binary),
            Err(AlphaError::NotBinary(3))
        );
    }

    #[test]
    fn zero_when_observed_equals_expected() {
        // Found by enumerating all 2-label tables for 2 coders x 4 units
        // with the pairwise-disagreement route (see tests/agreement.rs).
        let units = m(&[
            &[Some(0), Some(0)],
            &[Some(0), Some(0)],
            &[Some(0), Some(0)],
            &[Some(0), Some(1)],
        ]);
        let alpha: Q = krippendorff_alpha(&units, Level::Nominal).unwrap();
        assert_eq!(alpha, Q::from_integer(0));

        let units = m(&[
            &[Some(0), Some(0)],
            &[Some(0), Some(1)],
            &[Some(1), Some(0)],
            &[Some(0), Some(1)],
        ]);
        let alpha: Q = krippendorff_alpha(&units, Level::Nominal).unwrap();
        assert_eq!(alpha, Q::new(-2, 5));
    }

    #[test]
    fn reference_value_with_missing_cells() {
        // Krippendorff's canonical nominal example (12 units, 4 coders,
        // missing data): alpha = 0.743.
        let d = [
            [
                Some(1),
                Some(2),
                Some(3),
                Some(3),
                Some(2),
                Some(1),
                Some(4),
                Some(1),
                Some(2),
                None,
                None,
                None,
            ],
            [
                Some(1),
                Some(2),
                Some(3),
                Some(3),
                Some(2),
                Some(2),
                Some(4),
                Some(1),
                Some(2),
                Some(5),
                None,
                Some(3),
            ],
            [
                None,
                Some(3),
                Some(3),
                Some(3),
                Some(2),
                Some(3),
                Some(4),
                Some(2),
                Some(2),
                Some(5),
                Some(1),
                None,
            ],
            [
                Some(1),
                Some(2),
                Some(3),
                Some(3),
                Some(2),
                Some(4),
                Some(4),
                Some(1),
                Some(2),
                Some(5),
                Some(1),
                None,
            ],
        ];
        let units: Vec<Vec<Option<u8>>> = (0..12)
            .map(|u| d.iter().map(|row| row[u]).collect())
            .collect();
        let alpha: f64 = krippendorff_alpha(&units, Level::Nominal).unwrap();
        assert!((alpha - 0.743).abs() < 5e-4, "{alpha}");
    }

    proptest! {
        #[test]
        fn relabeling_binary_values_preserves_alpha(
            cells in prop::collection::vec(prop::collection::vec(prop::option::of(any::<bool>()), 3), 2..12)
        ) {
            let flipped: Vec<Vec<Option<bool>>> =
                cells.iter().map(|u| u.iter().map(|v| v.map(|b| !b)).collect()).collect();
            let a = krippendorff_alpha::<_, Q>(&cells, Level::Binary);
            let b = krippendorff_alpha::<_, Q>(&flipped, Level::Binary);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn alpha_never_exceeds_one(
            cells in prop::collection::vec(prop::collection::vec(prop::option::of(0u8..4), 4), 2..10)
        ) {
            if let Ok(a) = krippendorff_alpha::<_, Q>(&cells, Level::Nominal) {
                prop_assert!(a <= Q::from_integer(1));
            }
        }

        #[test]
        fn duplicating_coders_keeps_perfect_agreement(
            labels in prop::collection::vec(0u8..3, 3..10), coders in 2usize..4
        ) {
            let units: Vec<Vec<Option<u8>>> = labels.iter().map(|&l| vec![Some(l); coders]).collect();
            let doubled: Vec<Vec<Option<u8>>> = labels.iter().map(|&l| vec![Some(l); 2 * coders]).collect();
            let a = krippendorff_alpha::<_, Q>(&units, Level::Nominal);
            let b = krippendorff_alpha::<_, Q>(&doubled, Level::Nominal);
            prop_assert_eq!(a, b);
        }
    }
}
