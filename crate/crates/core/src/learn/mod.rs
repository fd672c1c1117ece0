//! Kernel SVM training, multiclass prediction, cross-validation and metrics.

pub mod cv;
pub mod metrics;
pub mod ovr;
pub mod svm;

pub use cv::{
    assign_folds, cross_validate, fit_fold, Classifier, CvOutcome, CvPrediction, FittedRepresentation, FoldModel,
    PipelineConfig, Representation,
};
pub use metrics::{evaluate, roc50, roc_n, Confusion, EvalReport};
pub use ovr::{train_ovr, OvrModel, Prediction, REST_LABEL};
pub use svm::{train_svm, train_svm_traced, SvmModel, SvmParams, Training};
