//! Sparse instances and the binary representation used by every explainer.
//!
//! Instances are stored as strictly increasing `(index, value)` pairs with
//! implicit zeros. A feature is *active* when it has a stored value. Every
//! explainer in this crate perturbs instances by zeroing a subset of their
//! active features, and measures closeness on the binarized instance.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Zero-based feature identifier in the model's input space.
pub type FeatureId = usize;

/// An instance as ordered `(feature, value)` pairs; all stored values are nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseInstance {
    dimension: usize,
    indices: Vec<FeatureId>,
    values: Vec<f64>,
}

impl SparseInstance {
    /// Builds an instance from entries already sorted by strictly increasing index.
    pub fn new<I>(dimension: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FeatureId, f64)>,
    {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (index, value) in entries {
            if index >= dimension {
                return Err(Error::IndexOutOfRange { index, dimension });
            }
            if let Some(&prev) = indices.last() {
                if prev == index {
                    return Err(Error::DuplicateIndex(index));
                }
                if prev > index {
                    return Err(Error::UnsortedIndices { prev, next: index });
                }
            }
            if value == 0.0 {
                return Err(Error::ZeroValue(index));
            }
            if !value.is_finite() {
                return Err(Error::NonFiniteValue(index));
            }
            indices.push(index);
            values.push(value);
        }
        Ok(Self {
            dimension,
            indices,
            values,
        })
    }

    /// Like [`SparseInstance::new`] but accepts entries in any order.
    /// Duplicate indices are still rejected.
    pub fn from_unsorted<I>(dimension: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FeatureId, f64)>,
    {
        let mut entries: Vec<_> = entries.into_iter().collect();
        entries.sort_by_key(|&(index, _)| index);
        Self::new(dimension, entries)
    }

    pub fn empty(dimension: usize) -> Self {
        Self {
            dimension,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of active (stored, nonzero) features.
    pub fn active_count(&self) -> usize {
        self.indices.len()
    }

    /// Active feature ids in increasing order.
    pub fn indices(&self) -> &[FeatureId] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (FeatureId, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Value of feature `index`, zero when inactive.
    pub fn get(&self, index: FeatureId) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn is_active(&self, index: FeatureId) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Maps the instance onto its binary representation: one bit per active feature.
    pub fn binarize(&self) -> BinaryMask {
        BinaryMask {
            dimension: self.dimension,
            bits: self.indices.clone(),
        }
    }

    /// Zeroes every feature in `removed`.
    ///
    /// Fails with [`Error::NotActive`] when `removed` names a feature that is
    /// not active in `self`; that always indicates a bug in the caller.
    pub fn perturb(&self, removed: &PerturbationSet) -> Result<Self> {
        let mut indices = Vec::with_capacity(self.indices.len().saturating_sub(removed.len()));
        let mut values = Vec::with_capacity(indices.capacity());
        let mut drop = removed.as_slice().iter().peekable();
        for (index, value) in self.iter() {
            match drop.peek() {
                Some(&&next) if next < index => return Err(Error::NotActive(next)),
                Some(&&next) if next == index => {
                    drop.next();
                }
                _ => {
                    indices.push(index);
                    values.push(value);
                }
            }
        }
        if let Some(&next) = drop.next() {
            return Err(Error::NotActive(next));
        }
        Ok(Self {
            dimension: self.dimension,
            indices,
            values,
        })
    }
}

/// Sorted, duplicate-free set of feature ids to zero out.
///
/// Ordering is lexicographic on the sorted id sequence, which is the
/// tie-break order used throughout the search code.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PerturbationSet(Vec<FeatureId>);

impl PerturbationSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn singleton(index: FeatureId) -> Self {
        Self(vec![index])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: FeatureId) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn as_slice(&self) -> &[FeatureId] {
        &self.0
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = FeatureId> + '_ {
        self.0.iter().copied()
    }

    /// Returns a copy extended with `index` (no-op if already present).
    pub fn with(&self, index: FeatureId) -> Self {
        let mut out = self.clone();
        out.insert(index);
        out
    }

    pub fn insert(&mut self, index: FeatureId) -> bool {
        match self.0.binary_search(&index) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, index);
                true
            }
        }
    }

    pub fn into_vec(self) -> Vec<FeatureId> {
        self.0
    }
}

impl FromIterator<FeatureId> for PerturbationSet {
    fn from_iter<T: IntoIterator<Item = FeatureId>>(iter: T) -> Self {
        let mut ids: Vec<_> = iter.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }
}

impl<'a> IntoIterator for &'a PerturbationSet {
    type Item = &'a FeatureId;
    type IntoIter = std::slice::Iter<'a, FeatureId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Binary representation `x'` of an instance: the set of its active features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryMask {
    dimension: usize,
    bits: Vec<FeatureId>,
}

impl BinaryMask {
    pub fn from_indices<I>(dimension: usize, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = FeatureId>,
    {
        let mut bits: Vec<_> = indices.into_iter().collect();
        bits.sort_unstable();
        bits.dedup();
        if let Some(&index) = bits.last() {
            if index >= dimension {
                return Err(Error::IndexOutOfRange { index, dimension });
            }
        }
        Ok(Self { dimension, bits })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, index: FeatureId) -> bool {
        self.bits.binary_search(&index).is_ok()
    }

    pub fn bits(&self) -> &[FeatureId] {
        &self.bits
    }

    /// The mask with every bit in `removed` cleared.
    pub fn without(&self, removed: &PerturbationSet) -> Self {
        Self {
            dimension: self.dimension,
            bits: self
                .bits
                .iter()
                .copied()
                .filter(|&b| !removed.contains(b))
                .collect(),
        }
    }

    fn intersection_count(&self, other: &Self) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.bits.len() && j < other.bits.len() {
            match self.bits[i].cmp(&other.bits[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    pub fn cosine_similarity(&self, other: &Self) -> Result<f64> {
        cosine_similarity(self, other)
    }
}

/// Cosine similarity `|a ∩ b| / (sqrt|a| sqrt|b|)` of two binary masks.
///
/// Returns 0 when exactly one mask is empty; undefined (error) when both are.
pub fn cosine_similarity(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.dimension != b.dimension {
        return Err(Error::DimensionMismatch {
            expected: a.dimension,
            actual: b.dimension,
        });
    }
    if a.is_empty() && b.is_empty() {
        return Err(Error::EmptyMasks);
    }
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    let shared = a.intersection_count(b) as f64;
    Ok(shared / ((a.len() as f64) * (b.len() as f64)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(dim: usize, entries: &[(FeatureId, f64)]) -> SparseInstance {
        SparseInstance::new(dim, entries.iter().copied()).unwrap()
    }

    fn mask(dim: usize, bits: &[FeatureId]) -> BinaryMask {
        BinaryMask::from_indices(dim, bits.iter().copied()).unwrap()
    }

    #[test]
    fn construction_rejects_bad_entries() {
        assert_eq!(
            SparseInstance::new(4, [(4, 1.0)]),
            Err(Error::IndexOutOfRange {
                index: 4,
                dimension: 4
            })
        );
        assert_eq!(
            SparseInstance::new(4, [(2, 1.0), (1, 1.0)]),
            Err(Error::UnsortedIndices { prev: 2, next: 1 })
        );
        assert_eq!(
            SparseInstance::new(4, [(1, 1.0), (1, 2.0)]),
            Err(Error::DuplicateIndex(1))
        );
        assert_eq!(SparseInstance::new(4, [(1, 0.0)]), Err(Error::ZeroValue(1)));
        assert!(SparseInstance::from_unsorted(4, [(3, 1.0), (0, 2.0)]).is_ok());
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(inst(8, &[(2, 0.7), (5, 1.0)]).binarize().bits(), &[2, 5]);
        assert!(inst(8, &[]).binarize().is_empty());
        assert_eq!(inst(4, &[(0, -3.1)]).binarize().bits(), &[0]);
    }

    #[test]
    fn perturb_examples() {
        let x = inst(8, &[(2, 0.7), (5, 1.0)]);
        let z = x.perturb(&PerturbationSet::singleton(5)).unwrap();
        assert_eq!(z, inst(8, &[(2, 0.7)]));

        let x = inst(8, &[(2, 0.7)]);
        assert_eq!(x.perturb(&PerturbationSet::new()).unwrap(), x);

        let x = inst(8, &[(1, 1.0), (3, 2.0), (4, 1.0)]);
        let z = x.perturb(&[1, 4].into_iter().collect()).unwrap();
        assert_eq!(z, inst(8, &[(3, 2.0)]));
    }

    #[test]
    fn perturb_rejects_inactive_index() {
        let x = inst(8, &[(2, 0.7), (5, 1.0)]);
        assert_eq!(
            x.perturb(&PerturbationSet::singleton(3)),
            Err(Error::NotActive(3))
        );
        assert_eq!(
            x.perturb(&PerturbationSet::singleton(7)),
            Err(Error::NotActive(7))
        );
        assert_eq!(
            x.perturb(&PerturbationSet::singleton(0)),
            Err(Error::NotActive(0))
        );
    }

    #[test]
    fn cosine_examples() {
        let a = mask(8, &[1, 2, 3]);
        assert_eq!(cosine_similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(
            cosine_similarity(&mask(8, &[1, 2]), &mask(8, &[3, 4])).unwrap(),
            0.0
        );
        // |a ∩ b| = 1, |a| = 2, |b| = 1
        let expected = 1.0 / (2.0f64.sqrt() * 1.0);
        let got = cosine_similarity(&mask(8, &[1, 2]), &mask(8, &[1])).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got * got - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cosine_errors() {
        assert_eq!(
            cosine_similarity(&mask(8, &[]), &mask(8, &[])),
            Err(Error::EmptyMasks)
        );
        assert!(matches!(
            cosine_similarity(&mask(8, &[1]), &mask(9, &[1])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(cosine_similarity(&mask(8, &[]), &mask(8, &[1])), Ok(0.0));
    }

    fn instance_and_subset() -> impl Strategy<Value = (SparseInstance, PerturbationSet)> {
        proptest::collection::btree_map(0usize..64, 0.1f64..5.0, 1..20).prop_flat_map(|m| {
            let x = SparseInstance::new(64, m).unwrap();
            let n = x.active_count();
            let idx = x.indices().to_vec();
            proptest::sample::subsequence(idx, 0..=n).prop_map(move |sub| {
                (x.clone(), sub.into_iter().collect::<PerturbationSet>())
            })
        })
    }

    proptest! {
        #[test]
        fn perturb_preserves_shape((x, set) in instance_and_subset()) {
            let z = x.perturb(&set).unwrap();
            prop_assert_eq!(z.dimension(), x.dimension());
            prop_assert_eq!(z.active_count(), x.active_count() - set.len());
            prop_assert!(z.indices().iter().all(|&j| x.is_active(j) && !set.contains(j)));
            prop_assert_eq!(z.binarize(), x.binarize().without(&set));
        }

        #[test]
        fn similarity_decreases_with_removed_count((x, set) in instance_and_subset()) {
            prop_assume!(set.len() < x.active_count());
            let full = x.binarize();
            let sim = |k: usize| {
                let sub: PerturbationSet = set.iter().take(k).collect();
                cosine_similarity(&full, &x.perturb(&sub).unwrap().binarize()).unwrap()
            };
            for k in 1..=set.len() {
                prop_assert!(sim(k) < sim(k - 1));
            }
        }

        #[test]
        fn cosine_is_symmetric_and_bounded(
            a in proptest::collection::btree_set(0usize..32, 1..10),
            b in proptest::collection::btree_set(0usize..32, 1..10),
        ) {
            let a = BinaryMask::from_indices(32, a).unwrap();
            let b = BinaryMask::from_indices(32, b).unwrap();
            let ab = cosine_similarity(&a, &b).unwrap();
            prop_assert_eq!(ab, cosine_similarity(&b, &a).unwrap());
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        }
    }
}
