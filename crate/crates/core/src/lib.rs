//! Multivariate direct-feature-quantization (DFQ) string kernels.
//!
//! Real-valued multivariate sequences (`R` feature dimensions by `n` time
//! steps) are discretized one dimension at a time into `R` parallel symbol
//! rows, compared with a sum of per-row k-mer kernels, and classified with a
//! kernel SVM trained on a precomputed Gram matrix.
//!
//! ```
//! use mvdfq_core::{fit_uniform_quantizer, BaseKernel, KernelSpec, MultivariateSequence};
//!
//! let a = MultivariateSequence::new("a", "x", vec![vec![0.0, 1.0, 2.0, 3.0]]).unwrap();
//! let b = MultivariateSequence::new("b", "y", vec![vec![3.0, 2.0, 1.0, 0.0]]).unwrap();
//! let q = fit_uniform_quantizer(&[a.clone(), b.clone()], 4).unwrap();
//! let spec = KernelSpec::new(BaseKernel::Spectrum { k: 2 }, q.alphabet_size());
//! let (da, db) = (q.apply(&a).unwrap(), q.apply(&b).unwrap());
//! assert_eq!(mvdfq_core::mvdfq_kernel(&da, &da, &spec).unwrap(), 3.0);
//! assert_eq!(mvdfq_core::mvdfq_kernel(&da, &db, &spec).unwrap(), 0.0);
//! ```

pub mod discrete_io;
pub mod error;
pub mod gram;
pub mod ingest;
pub mod kernels;
pub mod learn;
pub mod quantize;
pub mod rng;
pub mod selftest;
pub mod sequence;
pub mod synth;
pub mod textfmt;

pub use discrete_io::{load_discrete, save_discrete};
pub use error::{Error, Result};
pub use gram::{compute_cross_gram, compute_gram, featurize_all, min_eigenvalue, with_threads, CrossGram, GramMatrix};
pub use ingest::{ingest_csv, ingest_fasta, Manifest, ManifestEntry};
pub use kernels::{mvdfq_kernel, BaseKernel, FeatureId, FeatureVector, KernelSpec, SequenceFeatures};
pub use learn::{
    cross_validate, evaluate, roc50, train_ovr, train_svm, CvOutcome, EvalReport, OvrModel, PipelineConfig,
    Representation, SvmModel, SvmParams,
};
pub use quantize::{
    apply_dfq, apply_vq, fit_kmeans_quantizer, fit_uniform_quantizer, fit_vq_codebook, Codebook, QuantizerKind,
    QuantizerModel,
};
pub use sequence::{DiscreteSequence, MultivariateSequence, Symbol};
pub use synth::SynthParams;
