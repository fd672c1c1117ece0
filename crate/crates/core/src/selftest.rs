//! Built-in consistency suite: feature maps against brute-force
//! enumerators, kernel algebra, quantizer contracts, a small SVM case and
//! metric hand cases. Used by the `selftest` command.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::time::Instant;

use rand::Rng as _;

use crate::error::Result;
use crate::gram::{compute_gram, min_eigenvalue};
use crate::kernels::{
    decode_kmer, encode_sample, mismatch_features, mvdfq_kernel, spectrum_features, sssk_features, univariate_kernel,
    BaseKernel, FeatureId, FeatureVector, KernelSpec,
};
use crate::learn::{evaluate, roc50, train_svm, SvmParams};
use crate::quantize::{DimBins, QuantizerKind, QuantizerModel};
use crate::rng::{rng_for, Rng};
use crate::sequence::{DiscreteSequence, Symbol};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Counts every k-mer in `A^k` by scanning all windows; a window counts
/// towards a k-mer when they differ in at most `m` positions.
pub fn brute_kmer_features(row: &[Symbol], k: usize, m: usize, alphabet_size: u32) -> FeatureVector {
    let space = u64::from(alphabet_size).pow(k as u32);
    let mut pairs = Vec::new();
    for id in 0..space {
        let kmer = decode_kmer(id, k, alphabet_size);
        let count = row
            .windows(k)
            .filter(|w| w.iter().zip(&kmer).filter(|(a, b)| a != b).count() <= m)
            .count();
        if count > 0 {
            pairs.push((id, count as f64));
        }
    }
    FeatureVector::from_pairs(pairs)
}

/// Enumerates every increasing position tuple of length `t` and keeps those
/// whose consecutive gaps are all at most `d`.
pub fn brute_sssk_features(row: &[Symbol], t: usize, d: usize, alphabet_size: u32) -> FeatureVector {
    let mut counts: BTreeMap<FeatureId, f64> = BTreeMap::new();
    let n = row.len();
    let mut visit = |positions: &[usize]| {
        let gaps: Vec<usize> = positions.windows(2).map(|w| w[1] - w[0]).collect();
        if gaps.iter().all(|&g| g <= d) {
            let symbols: Vec<Symbol> = positions.iter().map(|&p| row[p]).collect();
            *counts
                .entry(encode_sample(&symbols, &gaps, d, alphabet_size))
                .or_default() += 1.0;
        }
    };
    for a in 0..n {
        for b in a + 1..n {
            if t == 2 {
                visit(&[a, b]);
                continue;
            }
            for c in b + 1..n {
                visit(&[a, b, c]);
            }
        }
    }
    FeatureVector::from_pairs(counts.into_iter().collect())
}

fn random_row(rng: &mut Rng, len: RangeInclusive<usize>, a: u32) -> Vec<Symbol> {
    let n = rng.random_range(len);
    (0..n).map(|_| rng.random_range(0..a)).collect()
}

fn random_sequence(rng: &mut Rng, id: usize, dims: usize, len: RangeInclusive<usize>, a: u32) -> DiscreteSequence {
    let n = rng.random_range(len);
    let rows = (0..dims).map(|_| random_row(rng, n..=n, a)).collect();
    DiscreteSequence::new(format!("r{id}"), "x", a, rows).expect("symbols drawn below the alphabet size")
}

fn run(name: &'static str, f: impl FnOnce() -> Result<std::result::Result<String, String>>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(Ok(d)) => (true, d),
        Ok(Err(d)) => (false, d),
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn oracle_equivalence(seed: u64) -> Result<std::result::Result<String, String>> {
    let mut rng = rng_for(seed, 1);
    for case in 0..200 {
        let a = rng.random_range(2..=6u32);
        let n = rng.random_range(0..=30usize);
        let row = random_row(&mut rng, n..=n, a);
        let k = rng.random_range(1..=3usize);
        if spectrum_features(&row, k, a)? != brute_kmer_features(&row, k, 0, a) {
            return Ok(Err(format!("spectrum mismatch at case {case}: row {row:?} k={k}")));
        }
        if k > 1 && mismatch_features(&row, k, 1, a)? != brute_kmer_features(&row, k, 1, a) {
            return Ok(Err(format!("mismatch mismatch at case {case}: row {row:?} k={k}")));
        }
        let t = rng.random_range(2..=3usize);
        let d = rng.random_range(1..=4usize);
        if sssk_features(&row, t, d, a)? != brute_sssk_features(&row, t, d, a) {
            return Ok(Err(format!("sssk mismatch at case {case}: row {row:?} t={t} d={d}")));
        }
    }
    Ok(Ok("200 rows".into()))
}

fn reductions(seed: u64) -> Result<std::result::Result<String, String>> {
    let mut rng = rng_for(seed, 2);
    for _ in 0..100 {
        let a = rng.random_range(2..=8u32);
        let row = random_row(&mut rng, 0..=40, a);
        let k = rng.random_range(1..=4usize);
        if mismatch_features(&row, k, 0, a)? != spectrum_features(&row, k, a)? {
            return Ok(Err(format!("mismatch m=0 differs from spectrum on {row:?}")));
        }
        let other = random_row(&mut rng, 0..=40, a);
        let spec = KernelSpec::new(BaseKernel::Spectrum { k }, a);
        let x = DiscreteSequence::new("x", "l", a, vec![row.clone()])?;
        let y = DiscreteSequence::new("y", "l", a, vec![other.clone()])?;
        let uni = univariate_kernel(&spectrum_features(&row, k, a)?, &spectrum_features(&other, k, a)?);
        if mvdfq_kernel(&x, &y, &spec)? != uni {
            return Ok(Err("R=1 kernel differs from univariate kernel".into()));
        }
    }
    Ok(Ok("100 rows".into()))
}

fn decomposition(seed: u64) -> Result<std::result::Result<String, String>> {
    let mut rng = rng_for(seed, 3);
    for _ in 0..50 {
        let a = rng.random_range(2..=6u32);
        let dims = rng.random_range(1..=8usize);
        let x = random_sequence(&mut rng, 0, dims, 0..=30, a);
        let y = random_sequence(&mut rng, 1, dims, 0..=30, a);
        for manifold in [false, true] {
            let spec = KernelSpec::new(BaseKernel::Mismatch { k: 2, m: 1 }, a).with_manifold(manifold);
            let whole = mvdfq_kernel(&x, &y, &spec)?;
            let mut sum = 0.0;
            for r in 0..dims {
                let xr = DiscreteSequence::new("x", "l", a, vec![x.row(r).to_vec()])?;
                let yr = DiscreteSequence::new("y", "l", a, vec![y.row(r).to_vec()])?;
                sum += mvdfq_kernel(&xr, &yr, &spec)?;
            }
            if whole != sum {
                return Ok(Err(format!("kernel {whole} != row sum {sum}")));
            }
        }
    }
    Ok(Ok("50 pairs".into()))
}

fn kernel_validity(seed: u64) -> Result<std::result::Result<String, String>> {
    let mut rng = rng_for(seed, 4);
    let a = 6;
    let data: Vec<DiscreteSequence> = (0..20).map(|i| random_sequence(&mut rng, i, 3, 5..=40, a)).collect();
    let mut worst = f64::INFINITY;
    for base in [
        BaseKernel::Spectrum { k: 3 },
        BaseKernel::Mismatch { k: 3, m: 1 },
        BaseKernel::Sssk { t: 2, d: 3 },
    ] {
        for manifold in [false, true] {
            let spec = KernelSpec::new(base, a).with_manifold(manifold);
            let g = compute_gram(&data, &spec)?;
            let scaled = min_eigenvalue(&g)? / g.trace();
            worst = worst.min(scaled);
            if scaled < -1e-9 {
                return Ok(Err(format!(
                    "{} manifold={manifold}: min eigenvalue/trace {scaled:e}",
                    base.name()
                )));
            }
            for i in 0..g.len() {
                for j in 0..g.len() {
                    let kij = g.get(i, j);
                    if kij * kij > g.get(i, i) * g.get(j, j) * (1.0 + 1e-9) {
                        return Ok(Err(format!("Cauchy-Schwarz fails at ({i}, {j})")));
                    }
                }
            }
        }
    }
    Ok(Ok(format!("worst min eigenvalue/trace {worst:e}")))
}

fn manifold_identities(seed: u64) -> Result<std::result::Result<String, String>> {
    let mut rng = rng_for(seed, 5);
    for _ in 0..100 {
        let a = rng.random_range(2..=6u32);
        let dims = rng.random_range(1..=5usize);
        let x = random_sequence(&mut rng, 0, dims, 3..=30, a);
        let spec = KernelSpec::new(BaseKernel::Spectrum { k: 3 }, a).with_manifold(true);
        let v = mvdfq_kernel(&x, &x, &spec)?;
        if (v - dims as f64).abs() > 1e-12 * dims as f64 {
            return Ok(Err(format!("manifold self-kernel {v} for R={dims}")));
        }
    }
    Ok(Ok("100 sequences".into()))
}

fn quantizer_contracts(seed: u64) -> Result<std::result::Result<String, String>> {
    let mut rng = rng_for(seed, 6);
    for _ in 0..1_000 {
        let bins = rng.random_range(1..=40u32);
        let min = rng.random_range(-100.0..100.0f64);
        let max = min + rng.random_range(0.01..50.0f64);
        let model = QuantizerModel::new(QuantizerKind::Uniform, bins, vec![DimBins::uniform(min, max, bins)])?;
        if model.quantize_value(0, max) != bins || model.quantize_value(0, min) != 1 {
            return Ok(Err(format!("range endpoints misbinned for [{min}, {max}] B={bins}")));
        }
        let below = min - rng.random_range(1e-9..10.0f64);
        let above = max + rng.random_range(1e-9..10.0f64);
        if model.quantize_value(0, below) != 0 || model.quantize_value(0, above) != bins + 1 {
            return Ok(Err("sentinels wrong".into()));
        }
        let mut values: Vec<f64> = (0..10).map(|_| rng.random_range(min - 5.0..max + 5.0)).collect();
        values.sort_by(f64::total_cmp);
        let symbols: Vec<Symbol> = values.iter().map(|&v| model.quantize_value(0, v)).collect();
        if symbols.windows(2).any(|w| w[0] > w[1]) {
            return Ok(Err(format!("not monotone: {values:?} -> {symbols:?}")));
        }
    }
    Ok(Ok("10000 values".into()))
}

fn svm_two_point() -> Result<std::result::Result<String, String>> {
    let g = crate::gram::GramMatrix::from_rows(vec!["a".into(), "b".into()], vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let t = train_svm(&g, &[true, false], &SvmParams::default())?;
    let m = &t.model;
    let alpha = |id: &str| m.support_ids.iter().position(|s| s == id).map_or(0.0, |i| m.alphas[i]);
    let ok = (alpha("a") - 1.0).abs() < 1e-6 && (alpha("b") + 1.0).abs() < 1e-6 && m.bias.abs() < 1e-6;
    let detail = format!("alphas ({}, {}), bias {}", alpha("a"), alpha("b"), m.bias);
    Ok(if ok { Ok(detail) } else { Err(detail) })
}

fn metric_cases() -> Result<std::result::Result<String, String>> {
    let labels = [true, false, true, false];
    let cases = [
        (roc50(&[4.0, 1.0, 3.0, 2.0], &labels)?, 1.0),
        (roc50(&[1.0, 4.0, 2.0, 3.0], &labels)?, 0.0),
        (roc50(&[0.9, 0.8, 0.7, 0.6], &labels)?, 0.75),
        (
            evaluate(&["A", "A", "A", "A"], &["A", "A", "B", "B"])?.macro_f1,
            1.0 / 3.0,
        ),
        (evaluate(&["a", "b", "c"], &["a", "b", "c"])?.macro_f1, 1.0),
    ];
    Ok(if cases.iter().all(|(got, want)| got == want) {
        Ok("5 cases".into())
    } else {
        Err(format!("{cases:?}"))
    })
}

/// Runs every check with randomness drawn from `seed`.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        run("oracle_equivalence", || oracle_equivalence(seed)),
        run("reductions", || reductions(seed)),
        run("decomposition", || decomposition(seed)),
        run("kernel_validity", || kernel_validity(seed)),
        run("manifold_identities", || manifold_identities(seed)),
        run("quantizer_contracts", || quantizer_contracts(seed)),
        run("svm_two_point", svm_two_point),
        run("metric_cases", metric_cases),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for r in run_all(11) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn brute_sssk_small_case() {
        let f = brute_sssk_features(&[1, 2, 1], 2, 2, 3);
        assert_eq!(f.len(), 3);
        assert_eq!(f.total(), 3.0);
    }
}
