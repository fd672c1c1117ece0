//! Contiguous k-mer feature maps: spectrum and mismatch.
//!
//! A k-mer `(s_1, ..., s_k)` has id `sum_i s_i * A^(i-1)` for alphabet size
//! `A`, so `s_1` is the least significant digit.

use super::feature::{FeatureId, FeatureVector};
use crate::error::{Error, Result};
use crate::sequence::Symbol;

/// Size of the k-mer id space, `A^k`, if it fits in a feature id.
pub fn kmer_space(alphabet_size: u32, k: usize) -> Result<u64> {
    u32::try_from(k)
        .ok()
        .and_then(|k| u64::from(alphabet_size).checked_pow(k))
        .ok_or_else(|| Error::InvalidParams(format!("{alphabet_size}^{k} k-mers overflow the feature id space")))
}

pub fn encode_kmer(kmer: &[Symbol], alphabet_size: u32) -> FeatureId {
    kmer.iter()
        .rev()
        .fold(0, |id, &s| id * FeatureId::from(alphabet_size) + FeatureId::from(s))
}

pub fn decode_kmer(mut id: FeatureId, k: usize, alphabet_size: u32) -> Vec<Symbol> {
    let a = FeatureId::from(alphabet_size);
    (0..k)
        .map(|_| {
            let s = (id % a) as Symbol;
            id /= a;
            s
        })
        .collect()
}

pub(crate) fn check_symbols(row: &[Symbol], alphabet_size: u32) -> Result<()> {
    match row.iter().find(|&&s| s >= alphabet_size) {
        Some(&symbol) => Err(Error::SymbolOutOfRange { symbol, alphabet_size }),
        None => Ok(()),
    }
}

/// Ids of every k-mer window in `row`, in position order.
fn window_ids(row: &[Symbol], k: usize, alphabet_size: u32) -> Vec<FeatureId> {
    if row.len() < k {
        return Vec::new();
    }
    let a = FeatureId::from(alphabet_size);
    let top = a.pow(k as u32 - 1);
    let mut id = encode_kmer(&row[..k], alphabet_size);
    let mut ids = Vec::with_capacity(row.len() - k + 1);
    ids.push(id);
    for p in 0..row.len() - k {
        // drop the least significant symbol, append the new one on top
        id = (id - FeatureId::from(row[p])) / a + FeatureId::from(row[p + k]) * top;
        ids.push(id);
    }
    ids
}

/// k-mer occurrence counts of `row`.
pub fn spectrum_features(row: &[Symbol], k: usize, alphabet_size: u32) -> Result<FeatureVector> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be positive".into()));
    }
    kmer_space(alphabet_size, k)?;
    check_symbols(row, alphabet_size)?;
    Ok(FeatureVector::from_ids(window_ids(row, k, alphabet_size)))
}

/// Mismatch-(k, m) features: every k-mer in `row` adds one to each k-mer
/// within Hamming distance `m` of it.
pub fn mismatch_features(row: &[Symbol], k: usize, m: usize, alphabet_size: u32) -> Result<FeatureVector> {
    if m >= k {
        return Err(Error::InvalidParams(format!("mismatches m={m} must be below k={k}")));
    }
    let spectrum = spectrum_features(row, k, alphabet_size)?;
    if m == 0 {
        return Ok(spectrum);
    }
    let powers: Vec<FeatureId> = (0..k as u32).map(|i| FeatureId::from(alphabet_size).pow(i)).collect();
    let mut pairs = Vec::with_capacity(spectrum.len() * neighborhood_size(k, m, alphabet_size));
    for &(id, count) in spectrum.entries() {
        let digits = decode_kmer(id, k, alphabet_size);
        pairs.push((id, count));
        expand(id, &digits, 0, m, &powers, alphabet_size, count, &mut pairs);
    }
    Ok(FeatureVector::from_pairs(pairs))
}

/// `|N_{k,m}| = sum_{i<=m} C(k,i) (A-1)^i`.
pub fn neighborhood_size(k: usize, m: usize, alphabet_size: u32) -> usize {
    let mut binom = 1usize;
    let mut total = 1usize;
    for i in 1..=m.min(k) {
        binom = binom * (k - i + 1) / i;
        total += binom * (alphabet_size as usize - 1).pow(i as u32);
    }
    total
}

/// Emits every k-mer that differs from `digits` at 1..=budget positions, all
/// at or after `start`. Each neighbor is produced exactly once because the
/// substituted positions are chosen in increasing order.
#[allow(clippy::too_many_arguments)]
fn expand(
    id: FeatureId,
    digits: &[Symbol],
    start: usize,
    budget: usize,
    powers: &[FeatureId],
    alphabet_size: u32,
    weight: f64,
    out: &mut Vec<(FeatureId, f64)>,
) {
    for p in start..digits.len() {
        let base = id - FeatureId::from(digits[p]) * powers[p];
        for s in (0..alphabet_size).filter(|&s| s != digits[p]) {
            let neighbor = base + FeatureId::from(s) * powers[p];
            out.push((neighbor, weight));
            if budget > 1 {
                expand(neighbor, digits, p + 1, budget - 1, powers, alphabet_size, weight, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::feature::dot;
    use proptest::prelude::*;

    fn id(kmer: &[Symbol], a: u32) -> FeatureId {
        encode_kmer(kmer, a)
    }

    #[test]
    fn encode_decode() {
        assert_eq!(id(&[1, 2], 3), 7);
        assert_eq!(decode_kmer(7, 2, 3), vec![1, 2]);
        assert_eq!(id(&[2, 0, 1], 4), 2 + 16);
    }

    #[test]
    fn spectrum_examples() {
        let f = spectrum_features(&[1, 2, 1, 2], 2, 3).unwrap();
        assert_eq!(f.entries().len(), 2);
        assert_eq!(f.get(id(&[1, 2], 3)), 2.0);
        assert_eq!(f.get(id(&[2, 1], 3)), 1.0);
        assert_eq!(f.total(), 3.0);

        assert!(spectrum_features(&[1, 2, 3], 5, 4).unwrap().is_empty());

        let u = spectrum_features(&[7, 7, 7], 1, 8).unwrap();
        assert_eq!(u.entries(), &[(7, 3.0)]);
    }

    #[test]
    fn spectrum_errors() {
        assert!(matches!(
            spectrum_features(&[0, 5], 1, 5),
            Err(Error::SymbolOutOfRange {
                symbol: 5,
                alphabet_size: 5
            })
        ));
        assert!(spectrum_features(&[0], 0, 5).is_err());
        assert!(spectrum_features(&[0], 20, 2048).is_err());
    }

    #[test]
    fn mismatch_neighborhood() {
        // row [1,2] over the two-letter alphabet {1,2}, relabeled to {0,1}
        let f = mismatch_features(&[0, 1], 2, 1, 2).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.get(id(&[0, 1], 2)), 1.0);
        assert_eq!(f.get(id(&[1, 1], 2)), 1.0);
        assert_eq!(f.get(id(&[0, 0], 2)), 1.0);
        assert_eq!(f.get(id(&[1, 0], 2)), 0.0);
        assert_eq!(neighborhood_size(2, 1, 2), 3);
    }

    #[test]
    fn mismatch_dot_example() {
        // X = [1,2], Y = [2,2] over {1,2}, relabeled to {0,1}
        let fx = mismatch_features(&[0, 1], 2, 1, 2).unwrap();
        let fy = mismatch_features(&[1, 1], 2, 1, 2).unwrap();
        assert_eq!(dot(&fx, &fy), 2.0);
    }

    #[test]
    fn mismatch_requires_m_below_k() {
        assert!(matches!(
            mismatch_features(&[0, 1], 2, 2, 3),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn neighborhood_sizes() {
        assert_eq!(neighborhood_size(6, 1, 34), 1 + 6 * 33);
        assert_eq!(neighborhood_size(3, 2, 4), 1 + 3 * 3 + 3 * 9);
    }

    proptest! {
        #[test]
        fn m_zero_is_spectrum(row in proptest::collection::vec(0u32..6, 0..40), k in 1usize..5) {
            prop_assert_eq!(mismatch_features(&row, k, 0, 6).unwrap(), spectrum_features(&row, k, 6).unwrap());
        }

        #[test]
        fn mismatch_mass(row in proptest::collection::vec(0u32..5, 0..30), k in 2usize..4, m in 1usize..2) {
            let f = mismatch_features(&row, k, m, 5).unwrap();
            let windows = row.len().saturating_sub(k - 1);
            prop_assert_eq!(f.total(), (windows * neighborhood_size(k, m, 5)) as f64);
        }
    }
}
