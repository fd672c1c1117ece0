use crate::error::{Error, Result};

/// Integer id of a k-mer or spatial-sample feature.
pub type FeatureId = u64;

/// Sparse feature vector with entries sorted by feature id.
///
/// The sort order is what makes [`dot`] sum in a fixed order, so a kernel
/// value is bit-identical whichever operand comes first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(FeatureId, f64)>,
    total: f64,
}

impl FeatureVector {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a vector from unordered `(id, weight)` pairs, summing duplicate
    /// ids and dropping zero weights.
    pub fn from_pairs(mut pairs: Vec<(FeatureId, f64)>) -> Self {
        pairs.sort_unstable_by_key(|&(id, _)| id);
        let mut entries: Vec<(FeatureId, f64)> = Vec::with_capacity(pairs.len());
        for (id, w) in pairs {
            match entries.last_mut() {
                Some((last, acc)) if *last == id => *acc += w,
                _ => entries.push((id, w)),
            }
        }
        entries.retain(|&(_, w)| w != 0.0);
        Self::from_sorted(entries)
    }

    /// Counts occurrences of each id.
    pub fn from_ids(mut ids: Vec<FeatureId>) -> Self {
        ids.sort_unstable();
        let mut entries: Vec<(FeatureId, f64)> = Vec::new();
        for id in ids {
            match entries.last_mut() {
                Some((last, count)) if *last == id => *count += 1.0,
                _ => entries.push((id, 1.0)),
            }
        }
        Self::from_sorted(entries)
    }

    fn from_sorted(entries: Vec<(FeatureId, f64)>) -> Self {
        let total = entries.iter().map(|&(_, w)| w).sum();
        Self { entries, total }
    }

    pub fn entries(&self) -> &[(FeatureId, f64)] {
        &self.entries
    }

    pub fn get(&self, id: FeatureId) -> f64 {
        self.entries
            .binary_search_by_key(&id, |&(i, _)| i)
            .map_or(0.0, |pos| self.entries[pos].1)
    }

    /// Sum of all weights (the raw count mass for count vectors).
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Number of non-zero features.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum()
    }
}

/// Sparse dot product by merge-join over the sorted ids.
pub fn dot(x: &FeatureVector, y: &FeatureVector) -> f64 {
    let (a, b) = (&x.entries, &y.entries);
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

/// Univariate kernel between two feature vectors of the same space.
pub fn univariate_kernel(fx: &FeatureVector, fy: &FeatureVector) -> f64 {
    dot(fx, fy)
}

/// L1-normalizes `phi` and takes elementwise square roots, placing it on the
/// multinomial manifold; dot products of embedded vectors are Bhattacharyya
/// affinities. The empty vector embeds to the empty vector.
pub fn manifold_embed(phi: &FeatureVector) -> Result<FeatureVector> {
    if let Some(&(feature, weight)) = phi.entries.iter().find(|&&(_, w)| w < 0.0) {
        return Err(Error::NegativeWeight { feature, weight });
    }
    if phi.is_empty() {
        return Ok(FeatureVector::empty());
    }
    let mass = phi.total;
    let entries = phi.entries.iter().map(|&(id, w)| (id, (w / mass).sqrt())).collect();
    Ok(FeatureVector::from_sorted(entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_lookup() {
        let v = FeatureVector::from_ids(vec![5, 1, 5, 9, 5]);
        assert_eq!(v.entries(), &[(1, 1.0), (5, 3.0), (9, 1.0)]);
        assert_eq!(v.get(5), 3.0);
        assert_eq!(v.get(4), 0.0);
        assert_eq!(v.total(), 5.0);
    }

    #[test]
    fn from_pairs_merges() {
        let v = FeatureVector::from_pairs(vec![(3, 1.0), (1, 2.0), (3, 0.5), (2, 0.0)]);
        assert_eq!(v.entries(), &[(1, 2.0), (3, 1.5)]);
    }

    #[test]
    fn dot_examples() {
        // {(1,2):2, (2,1):1} . {(1,2):1} = 2
        let fx = FeatureVector::from_pairs(vec![(10, 2.0), (20, 1.0)]);
        let fy = FeatureVector::from_pairs(vec![(10, 1.0)]);
        assert_eq!(univariate_kernel(&fx, &fy), 2.0);
        assert_eq!(univariate_kernel(&FeatureVector::empty(), &fy), 0.0);
        assert_eq!(univariate_kernel(&fx, &fx), fx.squared_norm());
        assert_eq!(fx.squared_norm(), 5.0);
    }

    #[test]
    fn embed_one_three() {
        let phi = FeatureVector::from_pairs(vec![(0, 1.0), (1, 3.0)]);
        let e = manifold_embed(&phi).unwrap();
        assert_eq!(e.get(0), 0.5);
        assert!((e.get(1) - 0.866_025_403_784_438_6).abs() < 1e-15);
        assert!((dot(&e, &e) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embed_empty_and_negative() {
        let e = manifold_embed(&FeatureVector::empty()).unwrap();
        assert!(e.is_empty());
        let other = FeatureVector::from_pairs(vec![(1, 1.0)]);
        assert_eq!(dot(&e, &manifold_embed(&other).unwrap()), 0.0);
        let neg = FeatureVector::from_pairs(vec![(1, -1.0), (2, 2.0)]);
        assert!(matches!(
            manifold_embed(&neg),
            Err(Error::NegativeWeight { feature: 1, .. })
        ));
    }
}
