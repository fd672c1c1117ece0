//! Direct feature quantization (DFQ) and the vector-quantization baseline.
//!
//! DFQ discretizes each of the `R` feature dimensions on its own, producing
//! `R` parallel symbol rows. In-range values map to symbols `1..=B`; values
//! below the training minimum map to `0` and values above the training
//! maximum map to `B + 1`.

mod kmeans1d;
mod uniform;
pub mod vq;

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sequence::{DiscreteSequence, MultivariateSequence, Symbol};
use crate::textfmt::{fmt_real, header_field, parse_int, parse_real, read_text, write_text};

pub use kmeans1d::fit_kmeans_quantizer;
pub use uniform::fit_uniform_quantizer;
pub use vq::{apply_vq, fit_vq_codebook, Codebook};

/// Default number of bins per dimension.
pub const DEFAULT_BINS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizerKind {
    Uniform,
    KMeans1d,
}

impl QuantizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QuantizerKind::Uniform => "uniform",
            QuantizerKind::KMeans1d => "kmeans1d",
        }
    }
}

/// Bin layout of one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum DimBins {
    Uniform {
        min: f64,
        max: f64,
        delta: f64,
    },
    /// Sorted interior cut points between adjacent 1-D cluster centers.
    Cuts {
        min: f64,
        max: f64,
        cuts: Vec<f64>,
    },
}

impl DimBins {
    pub fn uniform(min: f64, max: f64, bins: u32) -> Self {
        DimBins::Uniform {
            min,
            max,
            delta: (max - min) / f64::from(bins),
        }
    }

    pub fn range(&self) -> (f64, f64) {
        match *self {
            DimBins::Uniform { min, max, .. } | DimBins::Cuts { min, max, .. } => (min, max),
        }
    }
}

/// A fitted per-dimension quantizer.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerModel {
    kind: QuantizerKind,
    bins: u32,
    dims: Vec<DimBins>,
}

impl QuantizerModel {
    pub fn new(kind: QuantizerKind, bins: u32, dims: Vec<DimBins>) -> Result<Self> {
        validate_bins(bins)?;
        if dims.is_empty() {
            return Err(Error::InvalidParams("quantizer needs at least one dimension".into()));
        }
        for (j, d) in dims.iter().enumerate() {
            match (kind, d) {
                (QuantizerKind::Uniform, DimBins::Uniform { min, max, .. }) => {
                    if max.partial_cmp(min) != Some(std::cmp::Ordering::Greater) {
                        return Err(Error::ConstantDimension { dim: j, value: *min });
                    }
                }
                (QuantizerKind::KMeans1d, DimBins::Cuts { min, max, cuts }) => {
                    if cuts.len() != bins as usize - 1 {
                        return Err(Error::InvalidParams(format!(
                            "dimension {j}: {} cut points for {bins} bins",
                            cuts.len()
                        )));
                    }
                    if cuts
                        .windows(2)
                        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
                    {
                        return Err(Error::InvalidParams(format!(
                            "dimension {j}: cut points not strictly increasing"
                        )));
                    }
                    if min > max {
                        return Err(Error::InvalidParams(format!("dimension {j}: min > max")));
                    }
                }
                _ => {
                    return Err(Error::InvalidParams(format!(
                        "dimension {j} does not match quantizer kind {}",
                        kind.as_str()
                    )))
                }
            }
        }
        Ok(Self { kind, bins, dims })
    }

    pub fn kind(&self) -> QuantizerKind {
        self.kind
    }

    pub fn bins(&self) -> u32 {
        self.bins
    }

    pub fn dims(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, j: usize) -> &DimBins {
        &self.dims[j]
    }

    /// Size of the output alphabet, `B + 2` (two out-of-range sentinels).
    pub fn alphabet_size(&self) -> u32 {
        self.bins + 2
    }

    /// Maps one real of dimension `dim` to its symbol in `0..=B+1`.
    ///
    /// Panics if `dim` is out of range.
    pub fn quantize_value(&self, dim: usize, f: f64) -> Symbol {
        let b = self.bins;
        match &self.dims[dim] {
            DimBins::Uniform { min, max, delta } => {
                if f < *min {
                    0
                } else if f > *max {
                    b + 1
                } else {
                    let bin = ((f - min) / delta).floor();
                    // f == max (and rounding just below it) lands in the top bin
                    (bin as u32).min(b - 1) + 1
                }
            }
            DimBins::Cuts { min, max, cuts } => {
                if f < *min {
                    0
                } else if f > *max {
                    b + 1
                } else {
                    1 + cuts.partition_point(|&c| c < f) as Symbol
                }
            }
        }
    }

    /// Discretizes every dimension of `x`, keeping id, label and group.
    pub fn apply(&self, x: &MultivariateSequence) -> Result<DiscreteSequence> {
        if x.dims() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: x.dims(),
            });
        }
        let rows = x
            .rows()
            .iter()
            .enumerate()
            .map(|(r, row)| row.iter().map(|&f| self.quantize_value(r, f)).collect())
            .collect();
        Ok(DiscreteSequence::new(&x.id, &x.label, self.alphabet_size(), rows)?.with_group(x.group.clone()))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "dfq-quantizer v1 kind={} R={} B={}\n",
            self.kind.as_str(),
            self.dims(),
            self.bins
        );
        for (j, d) in self.dims.iter().enumerate() {
            let (min, max) = d.range();
            write!(out, "dim {j} min {} max {}", fmt_real(min), fmt_real(max)).unwrap();
            if let DimBins::Cuts { cuts, .. } = d {
                out.push_str(" cuts");
                for &c in cuts {
                    write!(out, " {}", fmt_real(c)).unwrap();
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::malformed(path, 1, "empty quantizer file"))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() < 2 || tokens[0] != "dfq-quantizer" || tokens[1] != "v1" {
            return Err(Error::malformed(path, ln, "expected `dfq-quantizer v1` header"));
        }
        let kind = match header_field(&tokens, "kind", path, ln)? {
            "uniform" => QuantizerKind::Uniform,
            "kmeans1d" => QuantizerKind::KMeans1d,
            other => return Err(Error::malformed(path, ln, format!("unknown kind {other:?}"))),
        };
        let r: usize = parse_int(header_field(&tokens, "R", path, ln)?, path, ln)?;
        let bins: u32 = parse_int(header_field(&tokens, "B", path, ln)?, path, ln)?;
        validate_bins(bins)?;

        let mut dims = Vec::with_capacity(r);
        for (ln, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() < 6 || t[0] != "dim" || t[2] != "min" || t[4] != "max" {
                return Err(Error::malformed(path, ln, "expected `dim <j> min <f> max <f>`"));
            }
            let j: usize = parse_int(t[1], path, ln)?;
            if j != dims.len() {
                return Err(Error::malformed(
                    path,
                    ln,
                    format!("expected dim {}, found {j}", dims.len()),
                ));
            }
            let min = parse_real(t[3], path, ln)?;
            let max = parse_real(t[5], path, ln)?;
            let d = match kind {
                QuantizerKind::Uniform => {
                    if t.len() != 6 {
                        return Err(Error::malformed(path, ln, "trailing tokens on uniform dim line"));
                    }
                    DimBins::uniform(min, max, bins)
                }
                QuantizerKind::KMeans1d => {
                    if t.get(6) != Some(&"cuts") {
                        return Err(Error::malformed(path, ln, "expected `cuts` on kmeans1d dim line"));
                    }
                    let cuts = t[7..]
                        .iter()
                        .map(|c| parse_real(c, path, ln))
                        .collect::<Result<Vec<_>>>()?;
                    DimBins::Cuts { min, max, cuts }
                }
            };
            dims.push(d);
        }
        if dims.len() != r {
            return Err(Error::malformed(
                path,
                ln,
                format!("header declares R={r}, found {} dim lines", dims.len()),
            ));
        }
        Self::new(kind, bins, dims)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }
}

/// Applies `model` to `x`. Free-function form of [`QuantizerModel::apply`].
pub fn apply_dfq(model: &QuantizerModel, x: &MultivariateSequence) -> Result<DiscreteSequence> {
    model.apply(x)
}

fn validate_bins(bins: u32) -> Result<()> {
    if bins == 0 || bins > u32::MAX - 2 {
        return Err(Error::InvalidParams(format!(
            "bins must be in 1..{}, got {bins}",
            u32::MAX - 2
        )));
    }
    Ok(())
}

/// Pools every observed value of each dimension across `dataset`.
pub(crate) fn pooled_dimensions(dataset: &[MultivariateSequence]) -> Result<Vec<Vec<f64>>> {
    let first = dataset.first().ok_or(Error::EmptyDataset)?;
    let r = first.dims();
    let mut pooled = vec![Vec::new(); r];
    for x in dataset {
        if x.dims() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: x.dims(),
            });
        }
        for (dst, row) in pooled.iter_mut().zip(x.rows()) {
            dst.extend_from_slice(row);
        }
    }
    if pooled[0].is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(pooled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model_0_10_b5() -> QuantizerModel {
        QuantizerModel::new(QuantizerKind::Uniform, 5, vec![DimBins::uniform(0.0, 10.0, 5)]).unwrap()
    }

    #[test]
    fn uniform_symbols() {
        let m = model_0_10_b5();
        assert_eq!(m.quantize_value(0, 3.9), 2);
        assert_eq!(m.quantize_value(0, 0.0), 1);
        assert_eq!(m.quantize_value(0, -1.0), 0);
        assert_eq!(m.quantize_value(0, 12.0), 6);
        assert_eq!(m.quantize_value(0, 10.0), 5);
        assert_eq!(m.quantize_value(0, 2.0), 2);
        assert_eq!(m.alphabet_size(), 7);
    }

    #[test]
    fn cut_symbols() {
        let m = QuantizerModel::new(
            QuantizerKind::KMeans1d,
            3,
            vec![DimBins::Cuts {
                min: 0.0,
                max: 9.0,
                cuts: vec![3.0, 6.0],
            }],
        )
        .unwrap();
        assert_eq!(m.quantize_value(0, -0.5), 0);
        assert_eq!(m.quantize_value(0, 0.0), 1);
        assert_eq!(m.quantize_value(0, 3.0), 1);
        assert_eq!(m.quantize_value(0, 3.5), 2);
        assert_eq!(m.quantize_value(0, 9.0), 3);
        assert_eq!(m.quantize_value(0, 9.5), 4);
    }

    #[test]
    fn apply_elementwise() {
        let m = model_0_10_b5();
        let x = MultivariateSequence::new("s", "c", vec![vec![0.0, 3.9, 12.0]]).unwrap();
        let d = apply_dfq(&m, &x).unwrap();
        assert_eq!(d.rows(), &[vec![1, 2, 6]]);
        assert_eq!((d.id.as_str(), d.label.as_str()), ("s", "c"));
        assert_eq!(d, apply_dfq(&m, &x).unwrap());
    }

    #[test]
    fn apply_empty_and_mismatch() {
        let m = model_0_10_b5();
        let x = MultivariateSequence::new("s", "c", vec![vec![]]).unwrap();
        let d = m.apply(&x).unwrap();
        assert_eq!(d.dims(), 1);
        assert!(d.is_empty());
        let y = MultivariateSequence::new("s", "c", vec![vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(
            m.apply(&y),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn text_round_trip() {
        let p = Path::new("q.txt");
        let u = QuantizerModel::new(
            QuantizerKind::Uniform,
            4,
            vec![DimBins::uniform(-0.1, 7.3, 4), DimBins::uniform(1.0, 2.0, 4)],
        )
        .unwrap();
        assert_eq!(QuantizerModel::parse(&u.to_text(), p).unwrap(), u);
        let k = QuantizerModel::new(
            QuantizerKind::KMeans1d,
            3,
            vec![DimBins::Cuts {
                min: 0.0,
                max: 1.0,
                cuts: vec![0.1, 0.7],
            }],
        )
        .unwrap();
        let text = k.to_text();
        assert_eq!(
            text,
            "dfq-quantizer v1 kind=kmeans1d R=1 B=3\ndim 0 min 0 max 1 cuts 0.10000000000000001 0.69999999999999996\n"
        );
        assert_eq!(QuantizerModel::parse(&text, p).unwrap(), k);
    }

    #[test]
    fn parse_rejects_bad_files() {
        let p = Path::new("q.txt");
        assert!(QuantizerModel::parse("", p).is_err());
        assert!(QuantizerModel::parse("dfq-quantizer v1 kind=uniform R=2 B=4\ndim 0 min 0 max 1\n", p).is_err());
        assert!(QuantizerModel::parse(
            "dfq-quantizer v1 kind=kmeans1d R=1 B=3\ndim 0 min 0 max 1 cuts 0.5\n",
            p
        )
        .is_err());
        assert!(QuantizerModel::parse("dfq-quantizer v1 kind=uniform R=1 B=4\ndim 0 min 1 max 1\n", p).is_err());
    }

    proptest! {
        #[test]
        fn uniform_monotone_and_total(
            lo in -100.0f64..100.0,
            width in 1e-3f64..50.0,
            bins in 1u32..64,
            a in -300.0f64..300.0,
            b in -300.0f64..300.0,
        ) {
            let m = QuantizerModel::new(QuantizerKind::Uniform, bins, vec![DimBins::uniform(lo, lo + width, bins)]).unwrap();
            let (f1, f2) = if a <= b { (a, b) } else { (b, a) };
            let (s1, s2) = (m.quantize_value(0, f1), m.quantize_value(0, f2));
            prop_assert!(s1 <= s2);
            prop_assert!(s2 <= bins + 1);
            if (lo..=lo + width).contains(&f1) {
                prop_assert!((1..=bins).contains(&s1));
            }
        }

        #[test]
        fn uniform_bin_bounds(lo in -10.0f64..10.0, width in 0.5f64..20.0, bins in 1u32..40, u in 0.0f64..1.0) {
            let m = QuantizerModel::new(QuantizerKind::Uniform, bins, vec![DimBins::uniform(lo, lo + width, bins)]).unwrap();
            let f = lo + u * width;
            let s = m.quantize_value(0, f);
            let delta = width / f64::from(bins);
            let left = lo + f64::from(s - 1) * delta;
            let right = lo + f64::from(s) * delta;
            let slack = 1e-9 * width;
            prop_assert!(left - slack <= f && f < right + slack, "f={f} s={s} [{left},{right})");
        }
    }
}
