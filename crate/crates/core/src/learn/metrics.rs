//! Classification error, per-class and macro F1, and ROC50.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::textfmt::fmt_real;

/// Confusion counts, `counts[truth][predicted]` over the sorted `labels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Confusion {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub total: usize,
    pub error_rate: f64,
    pub macro_f1: f64,
    pub per_class_f1: BTreeMap<String, f64>,
    pub roc50: Option<f64>,
    pub confusion: Confusion,
}

impl EvalReport {
    /// Two-column `metric<TAB>value` table with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\n");
        writeln!(out, "n\t{}", self.total).unwrap();
        writeln!(out, "error_rate\t{}", fmt_real(self.error_rate)).unwrap();
        writeln!(out, "macro_f1\t{}", fmt_real(self.macro_f1)).unwrap();
        for (label, f1) in &self.per_class_f1 {
            writeln!(out, "f1:{label}\t{}", fmt_real(*f1)).unwrap();
        }
        if let Some(r) = self.roc50 {
            writeln!(out, "roc50\t{}", fmt_real(r)).unwrap();
        }
        for (t, row) in self.confusion.labels.iter().zip(&self.confusion.counts) {
            for (p, count) in self.confusion.labels.iter().zip(row) {
                writeln!(out, "confusion:{t}:{p}\t{count}").unwrap();
            }
        }
        out
    }
}

/// Error rate, per-class F1 and macro F1 (mean over classes present in
/// `truths`). F1 is 0 when precision and recall are both 0.
pub fn evaluate<S: AsRef<str>>(predictions: &[S], truths: &[S]) -> Result<EvalReport> {
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch {
            expected: truths.len(),
            found: predictions.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::EmptyInput);
    }
    let labels: Vec<String> = truths
        .iter()
        .chain(predictions)
        .map(|s| s.as_ref().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut counts = vec![vec![0usize; labels.len()]; labels.len()];
    for (p, t) in predictions.iter().zip(truths) {
        counts[index[t.as_ref()]][index[p.as_ref()]] += 1;
    }

    let total = truths.len();
    let correct: usize = (0..labels.len()).map(|i| counts[i][i]).sum();
    let error_rate = (total - correct) as f64 / total as f64;

    let mut per_class_f1 = BTreeMap::new();
    for (c, label) in labels.iter().enumerate() {
        let support: usize = counts[c].iter().sum();
        if support == 0 {
            continue;
        }
        let tp = counts[c][c] as f64;
        let predicted: usize = counts.iter().map(|row| row[c]).sum();
        let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let recall = tp / support as f64;
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class_f1.insert(label.clone(), f1);
    }
    let macro_f1 = per_class_f1.values().sum::<f64>() / per_class_f1.len() as f64;

    Ok(EvalReport {
        total,
        error_rate,
        macro_f1,
        per_class_f1,
        roc50: None,
        confusion: Confusion { labels, counts },
    })
}

/// Area under the ROC curve up to the `max_fp`-th false positive,
/// normalized to `[0, 1]`. Tied scores rank negatives first.
pub fn roc_n(scores: &[f64], positives: &[bool], max_fp: usize) -> Result<f64> {
    if scores.len() != positives.len() {
        return Err(Error::LengthMismatch {
            expected: positives.len(),
            found: scores.len(),
        });
    }
    let n_pos = positives.iter().filter(|&&p| p).count();
    let n_neg = positives.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        let which = if n_pos == 0 { "negative" } else { "positive" };
        return Err(Error::SingleClass(which.into()));
    }
    if max_fp == 0 {
        return Err(Error::InvalidParams("max_fp must be positive".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // descending score; on ties false (negative) sorts before true
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(positives[a].cmp(&positives[b])));

    let limit = max_fp.min(n_neg);
    let (mut tp, mut fp, mut area) = (0usize, 0usize, 0usize);
    for &i in &order {
        if positives[i] {
            tp += 1;
        } else {
            fp += 1;
            area += tp;
            if fp == limit {
                break;
            }
        }
    }
    Ok(area as f64 / (limit * n_pos) as f64)
}

pub fn roc50(scores: &[f64], positives: &[bool]) -> Result<f64> {
    roc_n(scores, positives, 50)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn roc50_hand_cases() {
        let labels = [true, false, true, false];
        assert_eq!(roc50(&[0.9, 0.8, 0.7, 0.6], &labels).unwrap(), 0.75);
        assert_eq!(roc50(&[4.0, 1.0, 3.0, 2.0], &labels).unwrap(), 1.0);
        assert_eq!(roc50(&[1.0, 4.0, 2.0, 3.0], &labels).unwrap(), 0.0);
        assert!(matches!(roc50(&[1.0, 2.0], &[true, true]), Err(Error::SingleClass(_))));
    }

    #[test]
    fn roc50_ties_are_pessimistic() {
        assert_eq!(roc50(&[1.0, 1.0], &[true, false]).unwrap(), 0.0);
    }

    #[test]
    fn roc50_truncates_at_fifty() {
        // 1 positive ranked after 50 negatives but before 10 more
        let mut scores: Vec<f64> = (0..60).map(|i| 100.0 - i as f64).collect();
        let mut labels = vec![false; 60];
        scores.push(45.5);
        labels.push(true);
        // negatives at scores 100..=41; the positive at 45.5 beats 5 of the first 60
        // but only the first 50 false positives (scores 100..=51) count
        assert_eq!(roc50(&scores, &labels).unwrap(), 0.0);
        scores[60] = 60.5;
        // positive beats negatives with scores <= 60: FPs 41..=50 see tp=1
        assert_eq!(roc50(&scores, &labels).unwrap(), 10.0 / 50.0);
    }

    #[test]
    fn f1_arithmetic() {
        let r = evaluate(&["a", "b", "c"], &["a", "b", "c"]).unwrap();
        assert_eq!((r.error_rate, r.macro_f1), (0.0, 1.0));

        let r = evaluate(&["A", "A", "A", "A"], &["A", "A", "B", "B"]).unwrap();
        assert_eq!(r.error_rate, 0.5);
        assert_eq!(r.per_class_f1["A"], 2.0 / 3.0);
        assert_eq!(r.per_class_f1["B"], 0.0);
        assert_eq!(r.macro_f1, 1.0 / 3.0);
        assert_eq!(r.confusion.counts, vec![vec![2, 0], vec![2, 0]]);

        let empty: [&str; 0] = [];
        assert!(matches!(evaluate(&empty, &empty), Err(Error::EmptyInput)));
        assert!(matches!(
            evaluate(&["a"], &["a", "b"]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn macro_ignores_predicted_only_classes() {
        let r = evaluate(&["x", "a"], &["a", "a"]).unwrap();
        assert_eq!(r.per_class_f1.len(), 1);
        assert_eq!(r.macro_f1, r.per_class_f1["a"]);
        assert_eq!(r.confusion.labels, vec!["a", "x"]);
    }

    #[test]
    fn report_tsv() {
        let r = evaluate(&["a", "b"], &["a", "a"]).unwrap();
        let tsv = r.to_tsv();
        assert!(tsv.starts_with("metric\tvalue\nn\t2\nerror_rate\t0.5\n"));
        assert!(tsv.contains("confusion:a:b\t1\n"));
    }

    proptest! {
        #[test]
        fn roc_invariant_under_monotone_maps(
            pairs in proptest::collection::vec((-50i32..50, any::<bool>()), 2..80),
        ) {
            let scores: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
            let labels: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            let a = roc50(&scores, &labels).unwrap();
            let mapped: Vec<f64> = scores.iter().map(|s| (s / 10.0).exp() * 3.0 - 7.0).collect();
            prop_assert_eq!(a, roc50(&mapped, &labels).unwrap());
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
