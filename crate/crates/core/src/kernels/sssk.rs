//! Sparse spatial sample features: ordered tuples of `t` single symbols at
//! increasing positions, each gap between consecutive samples in `1..=d`.
//!
//! A tuple `(a_1, g_1, a_2[, g_2, a_3])` encodes over the mixed radix
//! `(A, d, A[, d, A])`, least significant digit first, with gaps stored as
//! `g - 1`.

use super::feature::{FeatureId, FeatureVector};
use super::spectrum::check_symbols;
use crate::error::{Error, Result};
use crate::sequence::Symbol;

pub fn sssk_space(t: usize, d: usize, alphabet_size: u32) -> Result<u64> {
    if !(2..=3).contains(&t) {
        return Err(Error::InvalidParams(format!("sssk t must be 2 or 3, got {t}")));
    }
    if d == 0 {
        return Err(Error::InvalidParams("sssk distance d must be positive".into()));
    }
    let a = u64::from(alphabet_size);
    let d = d as u64;
    let space = if t == 2 {
        a.checked_mul(d).and_then(|x| x.checked_mul(a))
    } else {
        a.checked_mul(d)
            .and_then(|x| x.checked_mul(a))
            .and_then(|x| x.checked_mul(d))
            .and_then(|x| x.checked_mul(a))
    };
    space.ok_or_else(|| Error::InvalidParams("sssk feature space overflows the feature id space".into()))
}

/// Encodes a sample given its symbols and gaps (`symbols.len() == gaps.len() + 1`).
pub fn encode_sample(symbols: &[Symbol], gaps: &[usize], d: usize, alphabet_size: u32) -> FeatureId {
    let a = FeatureId::from(alphabet_size);
    let d = d as FeatureId;
    let mut id = FeatureId::from(symbols[symbols.len() - 1]);
    for i in (0..gaps.len()).rev() {
        id = id * d + (gaps[i] as FeatureId - 1);
        id = id * a + FeatureId::from(symbols[i]);
    }
    id
}

pub fn sssk_features(row: &[Symbol], t: usize, d: usize, alphabet_size: u32) -> Result<FeatureVector> {
    sssk_space(t, d, alphabet_size)?;
    check_symbols(row, alphabet_size)?;
    let n = row.len();
    let mut ids = Vec::with_capacity(n * d.pow(t as u32 - 1));
    for p1 in 0..n {
        for g1 in 1..=d.min(n - 1 - p1) {
            let p2 = p1 + g1;
            if t == 2 {
                ids.push(encode_sample(&[row[p1], row[p2]], &[g1], d, alphabet_size));
                continue;
            }
            for g2 in 1..=d.min(n - 1 - p2) {
                ids.push(encode_sample(
                    &[row[p1], row[p2], row[p2 + g2]],
                    &[g1, g2],
                    d,
                    alphabet_size,
                ));
            }
        }
    }
    Ok(FeatureVector::from_ids(ids))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_with_gap_two() {
        let (a, d) = (3, 2);
        let f = sssk_features(&[1, 2, 1], 2, d, a).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.get(encode_sample(&[1, 2], &[1], d, a)), 1.0);
        assert_eq!(f.get(encode_sample(&[2, 1], &[1], d, a)), 1.0);
        assert_eq!(f.get(encode_sample(&[1, 1], &[2], d, a)), 1.0);
    }

    #[test]
    fn too_short_rows() {
        assert!(sssk_features(&[4], 2, 5, 6).unwrap().is_empty());
        assert!(sssk_features(&[5, 5], 3, 5, 6).unwrap().is_empty());
        assert!(sssk_features(&[], 3, 5, 6).unwrap().is_empty());
    }

    #[test]
    fn triple_counts() {
        // positions 0,1,2 with gaps (1,1) only
        let f = sssk_features(&[5, 5, 5], 3, 5, 6).unwrap();
        assert_eq!(f.entries(), &[(encode_sample(&[5, 5, 5], &[1, 1], 5, 6), 1.0)]);
    }

    #[test]
    fn encoding_is_injective() {
        let (a, d) = (3u32, 3usize);
        let mut seen = std::collections::HashSet::new();
        for a1 in 0..a {
            for g1 in 1..=d {
                for a2 in 0..a {
                    for g2 in 1..=d {
                        for a3 in 0..a {
                            let id = encode_sample(&[a1, a2, a3], &[g1, g2], d, a);
                            assert!(id < sssk_space(3, d, a).unwrap());
                            assert!(seen.insert(id));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_params() {
        assert!(sssk_features(&[1, 2], 4, 5, 6).is_err());
        assert!(sssk_features(&[1, 2], 2, 0, 6).is_err());
        assert!(matches!(
            sssk_features(&[1, 9], 2, 2, 6),
            Err(Error::SymbolOutOfRange { symbol: 9, .. })
        ));
    }
}
