//! Brute-force reference implementations shared by the integration and
//! acceptance tests. Each one follows the textbook definition directly and
//! shares no code with the library.
#![allow(dead_code)]

use num_rational::Ratio;
use rand::Rng;

pub type Q = Ratio<i64>;

/// Krippendorff's alpha from pairwise disagreements:
/// `D_o = 1/n * sum_u 1/(m_u - 1) * #{ordered pairs i != j in u with v_i != v_j}`,
/// `D_e = 1/(n (n - 1)) * #{ordered pairs of pairable values that differ}`.
/// `None` when fewer than two values are pairable or `D_e = 0`.
pub fn alpha_pairwise(units: &[Vec<Option<u8>>]) -> Option<Q> {
    let pairable: Vec<Vec<u8>> = units
        .iter()
        .map(|u| u.iter().flatten().copied().collect::<Vec<u8>>())
        .filter(|v| v.len() >= 2)
        .collect();
    let all: Vec<u8> = pairable.iter().flatten().copied().collect();
    let n = all.len() as i64;
    if n < 2 {
        return None;
    }
    let mut d_o = Q::from_integer(0);
    for u in &pairable {
        let m = u.len() as i64;
        let mut diff = 0i64;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j && u[i] != u[j] {
                    diff += 1;
                }
            }
        }
        d_o += Q::new(diff, m - 1);
    }
    d_o /= Q::from_integer(n);
    let mut diff = 0i64;
    for i in 0..all.len() {
        for j in 0..all.len() {
            if i != j && all[i] != all[j] {
                diff += 1;
            }
        }
    }
    if diff == 0 {
        return None;
    }
    let d_e = Q::new(diff, n * (n - 1));
    Some(Q::from_integer(1) - d_o / d_e)
}

pub fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Random reliability matrix: up to `max_units` units, up to
/// `max_coders` coders, `labels` values, roughly a fifth of cells missing.
pub fn random_units(
    rng: &mut impl Rng,
    max_units: usize,
    max_coders: usize,
    labels: u8,
) -> Vec<Vec<Option<u8>>> {
    let units = rng.gen_range(2..=max_units);
    let coders = rng.gen_range(2..=max_coders);
    (0..units)
        .map(|_| {
            (0..coders)
                .map(|_| (rng.gen_range(0..5) != 0).then(|| rng.gen_range(0..labels)))
                .collect()
        })
        .collect()
}

/// Speaker states by the case definition: moderation if the speaker is
/// the moderator; otherwise look back for the last non-moderator turn t';
/// continuation if it exists and has the same speaker, else rotation.
pub fn states_by_cases(speakers: &[usize], moderator: usize) -> Vec<&'static str> {
    (0..speakers.len())
        .map(|t| {
            if speakers[t] == moderator {
                return "moderation";
            }
            let prev = (0..t).rev().find(|&u| speakers[u] != moderator);
            match prev {
                Some(u) if speakers[u] == speakers[t] => "continuation",
                _ => "rotation",
            }
        })
        .collect()
}

/// Random merged speaker sequence: `turns` turns over speakers
/// `0..speakers`, speaker 0 is the moderator, no speaker twice in a row.
pub fn random_merged_speakers(rng: &mut impl Rng, turns: usize, speakers: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(turns);
    while out.len() < turns {
        let s = rng.gen_range(0..speakers);
        if out.last() != Some(&s) {
            out.push(s);
        }
    }
    out
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Exact two-sided permutation test on the absolute difference of means,
/// enumerating every split of the pooled values into groups of the
/// original sizes.
pub fn permutation_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let k = a.len();
    let observed = (mean(a) - mean(b)).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (i, v) in pooled.iter().enumerate() {
            if mask >> i & 1 == 1 {
                x.push(*v)
            } else {
                y.push(*v)
            }
        }
        total += 1;
        if (mean(&x) - mean(&y)).abs() >= observed - 1e-12 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}
