use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Field-like scalar used by the counting statistics.
///
/// Everything in this crate that only needs `+ - * /` on counts (alpha,
/// F1, conditional and transition probabilities) is written against this
/// trait. `f64`, `f32` and `Ratio<i64>` all qualify.
pub trait Scalar:
    Num + FromPrimitive + ToPrimitive + Copy + PartialOrd + Debug + Send + Sync
{
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar")
    }

    fn ratio(num: usize, den: usize) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Arithmetic mean; `None` for an empty slice.
    fn mean(values: &[Self]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let sum = values.iter().fold(Self::zero(), |acc, &v| acc + v);
        Some(sum / Self::from_count(values.len()))
    }
}

impl<T> Scalar for T where
    T: Num + FromPrimitive + ToPrimitive + Copy + PartialOrd + Debug + Send + Sync
{
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn exact_ratio_is_exact() {
        let third: Ratio<i64> = Scalar::ratio(1, 3);
        assert_eq!(third * Ratio::from_integer(3), Ratio::from_integer(1));
    }

    #[test]
    fn mean_of_empty_is_none() {
        assert_eq!(<f64 as Scalar>::mean(&[]), None);
        assert_eq!(<f64 as Scalar>::mean(&[1.0, 2.0]), Some(1.5));
    }
}
