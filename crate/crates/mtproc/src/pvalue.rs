//! P-value vectors, significance levels, and the sorted view used by the
//! stepwise evaluators.

use serde::Serialize;
use thiserror::Error;

/// Validation failures for p-value vectors and significance levels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("p-value vector must contain at least one entry")]
    Empty,
    #[error("p-value at position {position} is outside [0, 1]: {value}")]
    PValueOutOfRange { position: usize, value: f64 },
    #[error("significance level is outside [0, 1]: {0}")]
    LevelOutOfRange(f64),
}

/// A vector of m p-values, each in the closed interval [0, 1], with m >= 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValueVector(Vec<f64>);

impl PValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self, InputError> {
        if values.is_empty() {
            return Err(InputError::Empty);
        }
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                // NaN fails the range test as well.
                return Err(InputError::PValueOutOfRange {
                    position: i + 1,
                    value: v,
                });
            }
        }
        Ok(PValueVector(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // m >= 1 by construction
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Value of the hypothesis with 1-based index `index`.
    pub fn value(&self, index: usize) -> f64 {
        self.0[index - 1]
    }

    /// The coordinate-wise transform 1 - p, used by the complement construction.
    pub fn one_minus(&self) -> PValueVector {
        PValueVector(self.0.iter().map(|v| 1.0 - v).collect())
    }
}

/// A significance level alpha in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level(f64);

impl Level {
    pub fn new(alpha: f64) -> Result<Self, InputError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(InputError::LevelOutOfRange(alpha));
        }
        Ok(Level(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Sorted view of a p-value vector: the order statistics together with the
/// permutation back to original indices. Ties keep ascending original index.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedView {
    order: Vec<usize>,
    sorted: Vec<f64>,
}

impl SortedView {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// The rank-th smallest p-value, rank in 1..=m.
    pub fn value(&self, rank: usize) -> f64 {
        self.sorted[rank - 1]
    }

    /// Original 1-based index of the hypothesis at the given sorted rank.
    pub fn original_index(&self, rank: usize) -> usize {
        self.order[rank - 1]
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// Sort a p-value vector, breaking ties by ascending original index.
pub fn sort_pvalues(p: &PValueVector) -> SortedView {
    let mut order: Vec<usize> = (1..=p.len()).collect();
    // sort_by is stable, so equal values keep ascending original index.
    order.sort_by(|&a, &b| p.value(a).total_cmp(&p.value(b)));
    let sorted = order.iter().map(|&i| p.value(i)).collect();
    SortedView { order, sorted }
}
