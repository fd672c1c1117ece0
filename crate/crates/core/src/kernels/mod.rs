//! String kernels over discrete multivariate sequences.
//!
//! The multivariate kernel sums a univariate k-mer kernel over the `R`
//! parallel rows of two discrete sequences:
//!
//! ```text
//! K(X, Y) = sum_r < F(X_r), F(Y_r) >
//! ```
//!
//! where `F` is the spectrum, mismatch or spatial-sample feature map,
//! optionally followed by the multinomial-manifold embedding applied to
//! each row on its own.

mod feature;
mod spectrum;
mod sssk;

use crate::error::{Error, Result};
use crate::sequence::{DiscreteSequence, Symbol};

pub use feature::{dot, manifold_embed, univariate_kernel, FeatureId, FeatureVector};
pub use spectrum::{decode_kmer, encode_kmer, kmer_space, mismatch_features, neighborhood_size, spectrum_features};
pub use sssk::{encode_sample, sssk_features, sssk_space};

pub const DEFAULT_K: usize = 6;
pub const DEFAULT_M: usize = 1;
pub const DEFAULT_SSSK_T: usize = 3;
pub const DEFAULT_SSSK_D: usize = 5;

/// Row-level feature map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKernel {
    Spectrum {
        k: usize,
    },
    Mismatch {
        k: usize,
        m: usize,
    },
    /// Spatial samples of `t` single symbols with gaps up to `d`.
    Sssk {
        t: usize,
        d: usize,
    },
}

impl BaseKernel {
    pub fn name(&self) -> &'static str {
        match self {
            BaseKernel::Spectrum { .. } => "spectrum",
            BaseKernel::Mismatch { .. } => "mismatch",
            BaseKernel::Sssk { .. } => "sssk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelSpec {
    pub base: BaseKernel,
    pub manifold: bool,
    pub cosine_normalize: bool,
    /// `|Σ|`: `B + 2` for DFQ rows, `D + 1` for codeword rows.
    pub alphabet_size: u32,
}

impl KernelSpec {
    pub fn new(base: BaseKernel, alphabet_size: u32) -> Self {
        Self {
            base,
            manifold: false,
            cosine_normalize: false,
            alphabet_size,
        }
    }

    pub fn with_manifold(mut self, on: bool) -> Self {
        self.manifold = on;
        self
    }

    pub fn with_normalize(mut self, on: bool) -> Self {
        self.cosine_normalize = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphabet_size == 0 {
            return Err(Error::InvalidParams("alphabet size must be positive".into()));
        }
        match self.base {
            BaseKernel::Spectrum { k } => {
                if k == 0 {
                    return Err(Error::InvalidParams("k must be positive".into()));
                }
                kmer_space(self.alphabet_size, k)?;
            }
            BaseKernel::Mismatch { k, m } => {
                if k == 0 || m >= k {
                    return Err(Error::InvalidParams(format!("need 0 <= m < k, got k={k} m={m}")));
                }
                kmer_space(self.alphabet_size, k)?;
            }
            BaseKernel::Sssk { t, d } => {
                sssk_space(t, d, self.alphabet_size)?;
            }
        }
        Ok(())
    }

    /// Feature vector of one row, manifold-embedded if requested.
    pub fn row_features(&self, row: &[Symbol]) -> Result<FeatureVector> {
        let raw = match self.base {
            BaseKernel::Spectrum { k } => spectrum_features(row, k, self.alphabet_size)?,
            BaseKernel::Mismatch { k, m } => mismatch_features(row, k, m, self.alphabet_size)?,
            BaseKernel::Sssk { t, d } => sssk_features(row, t, d, self.alphabet_size)?,
        };
        if self.manifold {
            manifold_embed(&raw)
        } else {
            Ok(raw)
        }
    }

    /// Per-row features and self-kernel of a whole sequence.
    pub fn featurize(&self, seq: &DiscreteSequence) -> Result<SequenceFeatures> {
        if seq.alphabet_size() != self.alphabet_size {
            return Err(Error::AlphabetMismatch {
                left: seq.alphabet_size(),
                right: self.alphabet_size,
            });
        }
        let rows = seq
            .rows()
            .iter()
            .map(|row| self.row_features(row))
            .collect::<Result<Vec<_>>>()?;
        let self_kernel = raw_kernel(&rows, &rows);
        Ok(SequenceFeatures { rows, self_kernel })
    }

    /// Kernel value between two featurized sequences.
    pub fn kernel(&self, x: &SequenceFeatures, y: &SequenceFeatures) -> Result<f64> {
        if x.rows.len() != y.rows.len() {
            return Err(Error::DimensionMismatch {
                expected: x.rows.len(),
                found: y.rows.len(),
            });
        }
        let raw = raw_kernel(&x.rows, &y.rows);
        if !self.cosine_normalize {
            return Ok(raw);
        }
        let denom = (x.self_kernel * y.self_kernel).sqrt();
        Ok(if denom > 0.0 { raw / denom } else { 0.0 })
    }
}

/// Cached per-row feature vectors of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFeatures {
    rows: Vec<FeatureVector>,
    self_kernel: f64,
}

impl SequenceFeatures {
    pub fn rows(&self) -> &[FeatureVector] {
        &self.rows
    }

    /// Unnormalized `K(X, X)`.
    pub fn self_kernel(&self) -> f64 {
        self.self_kernel
    }
}

fn raw_kernel(x: &[FeatureVector], y: &[FeatureVector]) -> f64 {
    x.iter().zip(y).map(|(a, b)| dot(a, b)).sum()
}

/// Multivariate kernel between two discrete sequences.
pub fn mvdfq_kernel(dx: &DiscreteSequence, dy: &DiscreteSequence, spec: &KernelSpec) -> Result<f64> {
    spec.validate()?;
    if dx.dims() != dy.dims() {
        return Err(Error::DimensionMismatch {
            expected: dx.dims(),
            found: dy.dims(),
        });
    }
    if dx.alphabet_size() != dy.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            left: dx.alphabet_size(),
            right: dy.alphabet_size(),
        });
    }
    let fx = spec.featurize(dx)?;
    let fy = spec.featurize(dy)?;
    spec.kernel(&fx, &fy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dseq(rows: Vec<Vec<Symbol>>, a: u32) -> DiscreteSequence {
        DiscreteSequence::new("s", "c", a, rows).unwrap()
    }

    fn spectrum(k: usize, a: u32) -> KernelSpec {
        KernelSpec::new(BaseKernel::Spectrum { k }, a)
    }

    #[test]
    fn decomposes_over_rows() {
        let spec = spectrum(2, 5);
        let x = dseq(vec![vec![1, 2, 3, 1, 2], vec![1, 1, 1, 1, 1]], 5);
        let y = dseq(vec![vec![1, 2, 3, 1, 2], vec![4, 4, 4, 4, 4]], 5);
        let row1 = spec.row_features(x.row(0)).unwrap();
        let k = mvdfq_kernel(&x, &y, &spec).unwrap();
        assert_eq!(k, univariate_kernel(&row1, &row1));
    }

    #[test]
    fn manifold_self_kernel_is_r() {
        let spec = spectrum(2, 6).with_manifold(true);
        let x = dseq(vec![vec![1, 2, 3, 4], vec![5, 5, 5, 5], vec![0, 1, 0, 1]], 6);
        let k = mvdfq_kernel(&x, &x, &spec).unwrap();
        assert!((k - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_row_reduces_to_univariate() {
        let spec = KernelSpec::new(BaseKernel::Mismatch { k: 3, m: 1 }, 4);
        let x = dseq(vec![vec![0, 1, 2, 3, 2, 1]], 4);
        let y = dseq(vec![vec![3, 1, 2, 3, 0, 0]], 4);
        let expect = univariate_kernel(
            &mismatch_features(x.row(0), 3, 1, 4).unwrap(),
            &mismatch_features(y.row(0), 3, 1, 4).unwrap(),
        );
        assert_eq!(mvdfq_kernel(&x, &y, &spec).unwrap(), expect);
    }

    #[test]
    fn cosine_normalization() {
        let spec = spectrum(1, 4).with_normalize(true);
        let x = dseq(vec![vec![0, 1, 2]], 4);
        let y = dseq(vec![vec![0, 0, 3]], 4);
        let e = dseq(vec![vec![]], 4);
        assert!((mvdfq_kernel(&x, &x, &spec).unwrap() - 1.0).abs() < 1e-12);
        // <(1,1,1,0),(2,0,0,1)> / sqrt(3 * 5)
        let expect = 2.0 / 15f64.sqrt();
        assert!((mvdfq_kernel(&x, &y, &spec).unwrap() - expect).abs() < 1e-15);
        assert_eq!(mvdfq_kernel(&x, &e, &spec).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let spec = spectrum(1, 4);
        let x = dseq(vec![vec![0]], 4);
        let y2 = dseq(vec![vec![0], vec![1]], 4);
        let y5 = dseq(vec![vec![0]], 5);
        assert!(matches!(
            mvdfq_kernel(&x, &y2, &spec),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            mvdfq_kernel(&x, &y5, &spec),
            Err(Error::AlphabetMismatch { .. })
        ));
        let bad = KernelSpec::new(BaseKernel::Mismatch { k: 2, m: 2 }, 4);
        assert!(mvdfq_kernel(&x, &x, &bad).is_err());
    }

    fn arb_pair() -> impl Strategy<Value = (DiscreteSequence, DiscreteSequence)> {
        (1usize..5, 0usize..20, 0usize..20).prop_flat_map(|(r, nx, ny)| {
            (
                proptest::collection::vec(proptest::collection::vec(0u32..5, nx), r),
                proptest::collection::vec(proptest::collection::vec(0u32..5, ny), r),
            )
                .prop_map(|(a, b)| (dseq(a, 5), dseq(b, 5)))
        })
    }

    fn all_specs() -> Vec<KernelSpec> {
        let mut out = Vec::new();
        for base in [
            BaseKernel::Spectrum { k: 2 },
            BaseKernel::Mismatch { k: 3, m: 1 },
            BaseKernel::Sssk { t: 3, d: 3 },
        ] {
            for manifold in [false, true] {
                for norm in [false, true] {
                    out.push(KernelSpec::new(base, 5).with_manifold(manifold).with_normalize(norm));
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn symmetric_bitwise((x, y) in arb_pair()) {
            for spec in all_specs() {
                let a = mvdfq_kernel(&x, &y, &spec).unwrap();
                let b = mvdfq_kernel(&y, &x, &spec).unwrap();
                prop_assert_eq!(a.to_bits(), b.to_bits());
                prop_assert!(a >= 0.0);
            }
        }

        #[test]
        fn cauchy_schwarz((x, y) in arb_pair()) {
            for spec in all_specs() {
                let kxy = mvdfq_kernel(&x, &y, &spec).unwrap();
                let kxx = mvdfq_kernel(&x, &x, &spec).unwrap();
                let kyy = mvdfq_kernel(&y, &y, &spec).unwrap();
                prop_assert!(kxy * kxy <= kxx * kyy * (1.0 + 1e-9) + 1e-12);
            }
        }
    }
}
