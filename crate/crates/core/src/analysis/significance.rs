use num_traits::Float;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn swapped(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TestOutcome<F> {
    Tested {
        t: F,
        df: F,
        /// Two-sided.
        p_value: F,
        /// Side with the larger mean; `None` when the means are equal.
        larger: Option<Side>,
        significant: bool,
    },
    NotTestable {
        reason: String,
    },
}

impl<F: Float> TestOutcome<F> {
    pub fn p_value(&self) -> Option<F> {
        match self {
            TestOutcome::Tested { p_value, .. } => Some(*p_value),
            TestOutcome::NotTestable { .. } => None,
        }
    }

    /// The side to star, if any.
    pub fn flagged(&self) -> Option<Side> {
        match self {
            TestOutcome::Tested {
                larger,
                significant: true,
                ..
            } => *larger,
            _ => None,
        }
    }
}

fn mean_var<F: Float>(xs: &[F]) -> (F, F) {
    let n = F::from(xs.len()).unwrap();
    let mean = xs.iter().fold(F::zero(), |a, &b| a + b) / n;
    let ss = xs
        .iter()
        .fold(F::zero(), |a, &x| a + (x - mean) * (x - mean));
    (mean, ss / (n - F::one()))
}

/// Welch's two-sample t-test with Welch-Satterthwaite degrees of freedom.
///
/// When both samples have zero variance the statistic is undefined; equal
/// means give p = 1 and different means give p = 0 with the larger side
/// flagged (the limit of the statistic as the variances vanish).
pub fn cross_corpus_test<F: Float>(a: &[F], b: &[F]) -> TestOutcome<F> {
    if a.len() < 2 || b.len() < 2 {
        return TestOutcome::NotTestable {
            reason: format!(
                "need at least two values per side, got {} and {}",
                a.len(),
                b.len()
            ),
        };
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return TestOutcome::NotTestable {
            reason: "non-finite sample value".into(),
        };
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (F::from(a.len()).unwrap(), F::from(b.len()).unwrap());
    let larger = if ma > mb {
        Some(Side::A)
    } else if mb > ma {
        Some(Side::B)
    } else {
        None
    };
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    let alpha = F::from(SIGNIFICANCE_LEVEL).unwrap();
    if se2 == F::zero() {
        let df = na + nb - F::from(2).unwrap();
        let (t, p) = match larger {
            None => (F::zero(), F::one()),
            Some(Side::A) => (F::infinity(), F::zero()),
            Some(Side::B) => (F::neg_infinity(), F::zero()),
        };
        return TestOutcome::Tested {
            t,
            df,
            p_value: p,
            larger,
            significant: larger.is_some(),
        };
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - F::one()) + sb * sb / (nb - F::one()));
    let dist = StudentsT::new(0.0, 1.0, df.to_f64().unwrap()).expect("positive degrees of freedom");
    let p = F::from((2.0 * dist.sf(t.abs().to_f64().unwrap())).min(1.0)).unwrap();
    TestOutcome::Tested {
        t,
        df,
        p_value: p,
        larger,
        significant: larger.is_some() && p <= alpha,
    }
}
