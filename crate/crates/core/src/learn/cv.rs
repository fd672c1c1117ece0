//! k-fold cross-validation of the full quantize -> kernel -> SVM pipeline.
//!
//! Quantizers, codebooks and SVMs are fit on the training folds only; the
//! held-out fold is discretized with the training quantizer, so values
//! outside the training range fall on the sentinel symbols.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;

use super::metrics::{evaluate, roc50, EvalReport};
use super::ovr::{train_ovr, OvrModel, Prediction};
use super::svm::SvmParams;
use crate::error::{Error, Result};
use crate::gram::{compute_cross_gram, compute_gram};
use crate::kernels::{BaseKernel, KernelSpec, DEFAULT_K, DEFAULT_M};
use crate::quantize::{
    fit_kmeans_quantizer, fit_uniform_quantizer, fit_vq_codebook, Codebook, QuantizerKind, QuantizerModel, DEFAULT_BINS,
};
use crate::rng::{rng_for, stream};
use crate::sequence::{DiscreteSequence, MultivariateSequence};

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_KMEANS_ITER: usize = 100;

/// How real-valued sequences become symbol rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Dfq { kind: QuantizerKind, bins: u32 },
    Vq { codebook_size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub representation: Representation,
    pub kernel: BaseKernel,
    pub manifold: bool,
    pub normalize: bool,
    pub svm: SvmParams,
    pub folds: usize,
    pub seed: u64,
    /// Hold out whole groups instead of stratifying by label.
    pub group_cv: bool,
    /// Lloyd iteration cap for k-means quantizers and codebooks.
    pub kmeans_iter: usize,
    /// Positive class for ROC50 on two-class data; defaults to the
    /// lexicographically smallest label.
    pub positive_label: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            representation: Representation::Dfq {
                kind: QuantizerKind::Uniform,
                bins: DEFAULT_BINS,
            },
            kernel: BaseKernel::Mismatch {
                k: DEFAULT_K,
                m: DEFAULT_M,
            },
            manifold: false,
            normalize: false,
            svm: SvmParams::default(),
            folds: DEFAULT_FOLDS,
            seed: 0,
            group_cv: false,
            kmeans_iter: DEFAULT_KMEANS_ITER,
            positive_label: None,
        }
    }
}

/// A fitted quantizer or codebook.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedRepresentation {
    Quantizer(QuantizerModel),
    Codebook(Codebook),
}

impl FittedRepresentation {
    pub fn fit(train: &[MultivariateSequence], config: &PipelineConfig) -> Result<Self> {
        Ok(match config.representation {
            Representation::Dfq {
                kind: QuantizerKind::Uniform,
                bins,
            } => Self::Quantizer(fit_uniform_quantizer(train, bins)?),
            Representation::Dfq {
                kind: QuantizerKind::KMeans1d,
                bins,
            } => Self::Quantizer(fit_kmeans_quantizer(train, bins, config.kmeans_iter, config.seed)?),
            Representation::Vq { codebook_size } => {
                Self::Codebook(fit_vq_codebook(train, codebook_size, config.kmeans_iter, config.seed)?)
            }
        })
    }

    pub fn alphabet_size(&self) -> u32 {
        match self {
            Self::Quantizer(q) => q.alphabet_size(),
            Self::Codebook(c) => c.alphabet_size(),
        }
    }

    pub fn apply(&self, x: &MultivariateSequence) -> Result<DiscreteSequence> {
        match self {
            Self::Quantizer(q) => q.apply(x),
            Self::Codebook(c) => c.apply(x),
        }
    }

    pub fn apply_all(&self, xs: &[MultivariateSequence]) -> Result<Vec<DiscreteSequence>> {
        xs.iter().map(|x| self.apply(x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Ovr(OvrModel),
    /// Training fold held a single class.
    Constant(String),
}

/// Everything fit on one training fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldModel {
    pub representation: FittedRepresentation,
    pub spec: KernelSpec,
    pub train: Vec<DiscreteSequence>,
    pub classifier: Classifier,
}

impl PipelineConfig {
    pub fn kernel_spec(&self, alphabet_size: u32) -> KernelSpec {
        KernelSpec::new(self.kernel, alphabet_size)
            .with_manifold(self.manifold)
            .with_normalize(self.normalize)
    }
}

/// Fits quantizer/codebook, Gram matrix and classifier on `train` alone.
pub fn fit_fold(train: &[MultivariateSequence], config: &PipelineConfig) -> Result<FoldModel> {
    let representation = FittedRepresentation::fit(train, config)?;
    let spec = config.kernel_spec(representation.alphabet_size());
    let discrete = representation.apply_all(train)?;
    let classes: BTreeSet<&str> = train.iter().map(|x| x.label.as_str()).collect();
    let classifier = if classes.len() == 1 {
        Classifier::Constant(train[0].label.clone())
    } else {
        let gram = compute_gram(&discrete, &spec)?;
        let labels: Vec<&str> = train.iter().map(|x| x.label.as_str()).collect();
        Classifier::Ovr(train_ovr(&gram, &labels, &config.svm)?)
    };
    Ok(FoldModel {
        representation,
        spec,
        train: discrete,
        classifier,
    })
}

impl FoldModel {
    pub fn predict(&self, test: &[MultivariateSequence]) -> Result<Vec<Prediction>> {
        let discrete = self.representation.apply_all(test)?;
        match &self.classifier {
            Classifier::Constant(label) => Ok(test
                .iter()
                .map(|x| Prediction {
                    id: x.id.clone(),
                    label: label.clone(),
                    score: 0.0,
                    scores: vec![0.0],
                })
                .collect()),
            Classifier::Ovr(model) => {
                let cross = compute_cross_gram(&discrete, &self.train, &self.spec)?;
                model.predict_cross(&cross)
            }
        }
    }

    fn score_for(&self, prediction: &Prediction, class: &str) -> f64 {
        match &self.classifier {
            Classifier::Constant(label) => {
                if label == class {
                    1.0
                } else {
                    -1.0
                }
            }
            Classifier::Ovr(m) => m
                .classes()
                .iter()
                .position(|c| c == class)
                .map_or(f64::NEG_INFINITY, |c| prediction.scores[c]),
        }
    }
}

/// One held-out prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct CvPrediction {
    pub id: String,
    pub fold: usize,
    pub truth: String,
    pub predicted: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub report: EvalReport,
    /// In dataset order.
    pub predictions: Vec<CvPrediction>,
    pub folds: Vec<usize>,
}

impl CvOutcome {
    pub fn predictions_tsv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("id\tfold\ttruth\tpredicted\tscore\n");
        for p in &self.predictions {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                p.id,
                p.fold,
                p.truth,
                p.predicted,
                crate::textfmt::fmt_real(p.score)
            )
            .unwrap();
        }
        out
    }
}

/// Assigns each sequence a fold in `0..folds`.
///
/// * `folds == dataset.len()`: leave-one-out, sequence `i` in fold `i`.
/// * grouped: distinct group keys are shuffled and dealt round-robin.
/// * otherwise: each class is shuffled and dealt round-robin, continuing
///   where the previous class stopped so fold sizes stay balanced.
pub fn assign_folds(dataset: &[MultivariateSequence], folds: usize, seed: u64, grouped: bool) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 folds, got {folds}")));
    }
    if dataset.len() < folds {
        return Err(Error::InvalidParams(format!(
            "{} sequences cannot fill {folds} folds",
            dataset.len()
        )));
    }
    let mut rng = rng_for(seed, stream::FOLDS);
    let mut assignment = vec![0; dataset.len()];

    if grouped {
        let mut keys = Vec::with_capacity(dataset.len());
        for x in dataset {
            keys.push(x.group.as_deref().ok_or_else(|| Error::UnknownGroupKey(x.id.clone()))?);
        }
        let mut groups: Vec<&str> = keys.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if groups.len() < folds {
            return Err(Error::InvalidParams(format!(
                "{} groups cannot fill {folds} folds",
                groups.len()
            )));
        }
        groups.shuffle(&mut rng);
        let fold_of: BTreeMap<&str, usize> = groups.iter().enumerate().map(|(i, g)| (*g, i % folds)).collect();
        for (a, key) in assignment.iter_mut().zip(keys) {
            *a = fold_of[key];
        }
        return Ok(assignment);
    }

    if folds == dataset.len() {
        return Ok((0..folds).collect());
    }

    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, x) in dataset.iter().enumerate() {
        by_class.entry(x.label.as_str()).or_default().push(i);
    }
    let mut next = 0;
    for (label, mut members) in by_class {
        if members.len() < folds {
            return Err(Error::TooFewPerClass {
                label: label.to_string(),
                count: members.len(),
                folds,
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

pub fn cross_validate(dataset: &[MultivariateSequence], config: &PipelineConfig) -> Result<CvOutcome> {
    let mut seen = HashSet::with_capacity(dataset.len());
    for x in dataset {
        if !seen.insert(x.id.as_str()) {
            return Err(Error::DuplicateId(x.id.clone()));
        }
    }
    let folds = assign_folds(dataset, config.folds, config.seed, config.group_cv)?;
    let classes: BTreeSet<&str> = dataset.iter().map(|x| x.label.as_str()).collect();
    let positive = match (&config.positive_label, classes.len()) {
        (Some(p), _) => Some(p.clone()),
        (None, 2) => classes.first().map(|s| s.to_string()),
        _ => None,
    };

    let mut predictions: Vec<Option<CvPrediction>> = vec![None; dataset.len()];
    let mut roc_scores = vec![0.0; dataset.len()];
    for fold in 0..config.folds {
        let (test_idx, train_idx): (Vec<usize>, Vec<usize>) = (0..dataset.len()).partition(|&i| folds[i] == fold);
        if test_idx.is_empty() {
            continue;
        }
        let train: Vec<MultivariateSequence> = train_idx.iter().map(|&i| dataset[i].clone()).collect();
        let test: Vec<MultivariateSequence> = test_idx.iter().map(|&i| dataset[i].clone()).collect();
        log::debug!("fold {fold}: {} train, {} test", train.len(), test.len());
        let model = fit_fold(&train, config)?;
        for (p, &i) in model.predict(&test)?.into_iter().zip(&test_idx) {
            if let Some(pos) = &positive {
                roc_scores[i] = model.score_for(&p, pos);
            }
            predictions[i] = Some(CvPrediction {
                id: p.id,
                fold,
                truth: dataset[i].label.clone(),
                predicted: p.label,
                score: p.score,
            });
        }
    }
    let predictions: Vec<CvPrediction> = predictions
        .into_iter()
        .map(|p| p.expect("every sequence held out once"))
        .collect();
    let predicted: Vec<&str> = predictions.iter().map(|p| p.predicted.as_str()).collect();
    let truths: Vec<&str> = predictions.iter().map(|p| p.truth.as_str()).collect();
    let mut report = evaluate(&predicted, &truths)?;
    if let Some(pos) = &positive {
        let is_pos: Vec<bool> = truths.iter().map(|t| t == pos).collect();
        report.roc50 = roc50(&roc_scores, &is_pos).ok();
    }
    Ok(CvOutcome {
        report,
        predictions,
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(id: &str, label: &str, row: Vec<f64>) -> MultivariateSequence {
        MultivariateSequence::new(id, label, vec![row]).unwrap()
    }

    fn toy() -> Vec<MultivariateSequence> {
        // class "lo" oscillates in [0, 1], class "hi" in [5, 6]
        let mut out = Vec::new();
        for i in 0..4 {
            let lo: Vec<f64> = (0..30).map(|t| ((t * (i + 2)) % 7) as f64 / 7.0).collect();
            let hi: Vec<f64> = lo.iter().map(|v| v + 5.0).collect();
            out.push(seq(&format!("lo{i}"), "lo", lo));
            out.push(seq(&format!("hi{i}"), "hi", hi));
        }
        out
    }

    fn config() -> PipelineConfig {
        PipelineConfig {
            representation: Representation::Dfq {
                kind: QuantizerKind::Uniform,
                bins: 4,
            },
            kernel: BaseKernel::Spectrum { k: 2 },
            manifold: true,
            folds: 2,
            ..Default::default()
        }
    }

    #[test]
    fn leave_one_out_separable() {
        let data: Vec<_> = toy().into_iter().take(4).collect();
        let cfg = PipelineConfig { folds: 4, ..config() };
        let out = cross_validate(&data, &cfg).unwrap();
        assert_eq!(out.folds, vec![0, 1, 2, 3]);
        assert_eq!(out.report.error_rate, 0.0);
    }

    #[test]
    fn deterministic_for_seed() {
        let data = toy();
        let a = cross_validate(&data, &config()).unwrap();
        let b = cross_validate(&data, &config()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.report.to_tsv(), b.report.to_tsv());
        assert_eq!(a.report.error_rate, 0.0);
        assert!(a.report.roc50.is_some());
    }

    #[test]
    fn stratified_folds_balanced() {
        let data = toy();
        let f = assign_folds(&data, 2, 7, false).unwrap();
        for fold in 0..2 {
            for class in ["lo", "hi"] {
                let n = data
                    .iter()
                    .zip(&f)
                    .filter(|(x, &k)| x.label == class && k == fold)
                    .count();
                assert_eq!(n, 2);
            }
        }
        assert!(matches!(
            assign_folds(&data, 5, 7, false),
            Err(Error::TooFewPerClass { .. })
        ));
    }

    #[test]
    fn group_folds() {
        let data: Vec<_> = toy()
            .into_iter()
            .enumerate()
            .map(|(i, x)| x.with_group(Some(format!("g{}", i % 3))))
            .collect();
        let f = assign_folds(&data, 3, 1, true).unwrap();
        for (i, x) in data.iter().enumerate() {
            for (j, y) in data.iter().enumerate() {
                if x.group == y.group {
                    assert_eq!(f[i], f[j]);
                }
            }
        }
        let mut bad = data.clone();
        bad[2].group = None;
        assert!(matches!(assign_folds(&bad, 3, 1, true), Err(Error::UnknownGroupKey(id)) if id == "lo1"));
    }

    #[test]
    fn whole_class_in_one_group_is_misclassified() {
        let data: Vec<_> = toy()
            .into_iter()
            .map(|x| {
                let g = if x.label == "hi" {
                    "album-hi".to_string()
                } else {
                    format!("album-{}", x.id)
                };
                x.with_group(Some(g))
            })
            .collect();
        let cfg = PipelineConfig {
            group_cv: true,
            ..config()
        };
        let out = cross_validate(&data, &cfg).unwrap();
        for p in out.predictions.iter().filter(|p| p.truth == "hi") {
            assert_eq!(p.predicted, "lo");
        }
    }

    #[test]
    fn fold_model_ignores_test_data() {
        let data = toy();
        let f = assign_folds(&data, 2, 0, false).unwrap();
        let train: Vec<_> = data
            .iter()
            .zip(&f)
            .filter(|(_, &k)| k != 0)
            .map(|(x, _)| x.clone())
            .collect();
        let model = fit_fold(&train, &config()).unwrap();
        let mut corrupted = data.clone();
        for (x, &k) in corrupted.iter_mut().zip(&f) {
            if k == 0 {
                *x = seq(&x.id, &x.label, vec![1e6; 30]);
            }
        }
        let train2: Vec<_> = corrupted
            .iter()
            .zip(&f)
            .filter(|(_, &k)| k != 0)
            .map(|(x, _)| x.clone())
            .collect();
        assert_eq!(fit_fold(&train2, &config()).unwrap(), model);
    }

    #[test]
    fn vq_pipeline_runs() {
        let cfg = PipelineConfig {
            representation: Representation::Vq { codebook_size: 4 },
            ..config()
        };
        let out = cross_validate(&toy(), &cfg).unwrap();
        assert_eq!(out.predictions.len(), 8);
    }
}
