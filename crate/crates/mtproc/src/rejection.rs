//! Rejection sets: subsets of the hypothesis indices {1, ..., m}.

use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

/// The set of 1-based indices of rejected hypotheses, always relative to the
/// original (unsorted) p-value vector.
#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct RejectionSet {
    m: usize,
    indices: BTreeSet<usize>,
}

impl RejectionSet {
    pub fn empty(m: usize) -> Self {
        RejectionSet {
            m,
            indices: BTreeSet::new(),
        }
    }

    pub fn full(m: usize) -> Self {
        RejectionSet {
            m,
            indices: (1..=m).collect(),
        }
    }

    /// Builds a set from 1-based indices. Panics on an index outside 1..=m;
    /// callers construct these from evaluator output, never raw user input.
    pub fn from_indices<I: IntoIterator<Item = usize>>(m: usize, indices: I) -> Self {
        let indices: BTreeSet<usize> = indices.into_iter().collect();
        if let Some(&max) = indices.iter().next_back() {
            assert!(max >= 1 && max <= m, "index {max} outside 1..={m}");
        }
        if let Some(&min) = indices.iter().next() {
            assert!(min >= 1, "index {min} outside 1..={m}");
        }
        RejectionSet { m, indices }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    /// Ascending 1-based indices.
    pub fn to_vec(&self) -> Vec<usize> {
        self.indices.iter().copied().collect()
    }

    pub fn is_subset(&self, other: &RejectionSet) -> bool {
        debug_assert_eq!(self.m, other.m);
        self.indices.is_subset(&other.indices)
    }

    pub fn union(&self, other: &RejectionSet) -> RejectionSet {
        assert_eq!(self.m, other.m, "set operations require equal m");
        RejectionSet {
            m: self.m,
            indices: self.indices.union(&other.indices).copied().collect(),
        }
    }

    pub fn intersect(&self, other: &RejectionSet) -> RejectionSet {
        assert_eq!(self.m, other.m, "set operations require equal m");
        RejectionSet {
            m: self.m,
            indices: self.indices.intersection(&other.indices).copied().collect(),
        }
    }

    pub fn difference(&self, other: &RejectionSet) -> RejectionSet {
        assert_eq!(self.m, other.m, "set operations require equal m");
        RejectionSet {
            m: self.m,
            indices: self.indices.difference(&other.indices).copied().collect(),
        }
    }

    /// {1, ..., m} \ self.
    pub fn complement(&self) -> RejectionSet {
        RejectionSet {
            m: self.m,
            indices: (1..=self.m).filter(|i| !self.indices.contains(i)).collect(),
        }
    }
}

impl fmt::Debug for RejectionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.indices.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}/m={}", self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_operations() {
        let a = RejectionSet::from_indices(4, [1, 2]);
        let b = RejectionSet::from_indices(4, [2, 3]);
        assert_eq!(a.union(&b).to_vec(), vec![1, 2, 3]);
        assert_eq!(a.intersect(&b).to_vec(), vec![2]);
        assert_eq!(a.difference(&b).to_vec(), vec![1]);
        assert_eq!(a.complement().to_vec(), vec![3, 4]);
        assert!(a.intersect(&b).is_subset(&a));
        assert_eq!(RejectionSet::empty(3).complement(), RejectionSet::full(3));
    }
}
