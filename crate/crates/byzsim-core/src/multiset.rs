//! Ordered multisets of positions.

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::scalar::Scalar;

/// A multiset of scalars held as a nondecreasing sequence.
///
/// Duplicates are kept, so occupancy counts are always visible to observers
/// (full multiplicity information, not just an occupied/multiple flag).
/// Indexing helpers are 1-based to line up with the order-statistic notation
/// used throughout the checkers (`nth(1)` is the minimum).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointMultiset {
    elements: Vec<Scalar>,
}

impl PointMultiset {
    pub fn new(mut elements: Vec<Scalar>) -> Self {
        elements.sort();
        PointMultiset { elements }
    }

    pub fn empty() -> Self {
        PointMultiset {
            elements: Vec::new(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// 1-based order statistic; `nth(1)` is the minimum, `nth(cardinality())`
    /// the maximum.
    pub fn nth(&self, index: usize) -> Option<&Scalar> {
        if index == 0 {
            return None;
        }
        self.elements.get(index - 1)
    }

    pub fn min(&self) -> Option<&Scalar> {
        self.elements.first()
    }

    pub fn max(&self) -> Option<&Scalar> {
        self.elements.last()
    }

    /// `max - min`; zero for singletons and all-equal multisets.
    pub fn diameter(&self) -> Result<Scalar, SimError> {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => Ok(hi - lo),
            _ => Err(SimError::EmptyMultiset),
        }
    }

    /// The closed interval `[min, max]` as a pair.
    pub fn range(&self) -> Result<(Scalar, Scalar), SimError> {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => Ok((lo.clone(), hi.clone())),
            _ => Err(SimError::EmptyMultiset),
        }
    }

    pub fn insert(&mut self, value: Scalar) {
        let pos = self.elements.partition_point(|x| x <= &value);
        self.elements.insert(pos, value);
    }

    /// Remove one occurrence of `value`. Returns whether anything was removed.
    pub fn remove(&mut self, value: &Scalar) -> bool {
        match self.elements.binary_search(value) {
            Ok(pos) => {
                self.elements.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn count(&self, value: &Scalar) -> usize {
        self.elements.iter().filter(|x| *x == value).count()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scalar> {
        self.elements.iter()
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.elements
    }

    /// Multiset union (sum of multiplicities).
    pub fn merge(&self, other: &PointMultiset) -> PointMultiset {
        let mut elements = self.elements.clone();
        elements.extend(other.elements.iter().cloned());
        PointMultiset::new(elements)
    }
}

impl FromIterator<Scalar> for PointMultiset {
    fn from_iter<I: IntoIterator<Item = Scalar>>(iter: I) -> Self {
        PointMultiset::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a PointMultiset {
    type Item = &'a Scalar;
    type IntoIter = std::slice::Iter<'a, Scalar>;
    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}
