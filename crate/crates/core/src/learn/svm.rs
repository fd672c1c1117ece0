//! Binary soft-margin SVM on a precomputed kernel.
//!
//! The dual
//!
//! ```text
//! min_a  1/2 a^T Q a - e^T a    s.t.  0 <= a_i <= C,  y^T a = 0,
//! Q_ij = y_i y_j K_ij
//! ```
//!
//! is solved by sequential two-coordinate updates. The working pair is the
//! maximal-violating index `i` plus the second-order choice of `j`; the loop
//! stops once the KKT violation gap falls below `tol`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gram::{min_eigenvalue, GramMatrix};
use crate::textfmt::{fmt_real, header_field, parse_real, read_text, write_text};

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-3;

/// Curvature floor for non-positive second derivatives along a pair.
const TAU: f64 = 1e-12;
/// Above this size the eigenvalue check before training is skipped.
const PSD_CHECK_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Warn when the Gram matrix has a clearly negative eigenvalue.
    pub check_psd: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            tol: DEFAULT_TOL,
            max_iter: 10_000_000,
            check_psd: true,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParams(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParams(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParams("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// A trained binary classifier `f(x) = sum_i alpha_i K(x, x_i) + bias`.
///
/// Alphas are signed: positive for positive-class support vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support_ids: Vec<String>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub label_positive: String,
    pub label_negative: String,
}

impl SvmModel {
    /// Decision value for kernel values aligned with `support_ids`.
    pub fn decision(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.alphas.len() {
            return Err(Error::LengthMismatch {
                expected: self.alphas.len(),
                found: row.len(),
            });
        }
        Ok(self.alphas.iter().zip(row).map(|(a, k)| a * k).sum::<f64>() + self.bias)
    }

    /// Score and label; a score of exactly zero goes to the positive class.
    pub fn predict(&self, row: &[f64]) -> Result<(f64, &str)> {
        let score = self.decision(row)?;
        let label = if score >= 0.0 {
            &self.label_positive
        } else {
            &self.label_negative
        };
        Ok((score, label))
    }

    /// Column index of every support vector among `ids`.
    pub fn support_columns(&self, ids: &[String]) -> Result<Vec<usize>> {
        let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        self.support_ids
            .iter()
            .map(|sv| {
                index
                    .get(sv.as_str())
                    .copied()
                    .ok_or_else(|| Error::InvalidParams(format!("support vector {sv} not among kernel columns")))
            })
            .collect()
    }

    /// Decision value for a full kernel row whose columns are `columns`
    /// (as returned by [`SvmModel::support_columns`]).
    pub fn decision_at(&self, row: &[f64], columns: &[usize]) -> f64 {
        self.alphas.iter().zip(columns).map(|(a, &c)| a * row[c]).sum::<f64>() + self.bias
    }

    pub fn write_text(&self, out: &mut String) {
        writeln!(
            out,
            "svm v1 C={} bias={} pos={} neg={}",
            fmt_real(self.c),
            fmt_real(self.bias),
            self.label_positive,
            self.label_negative
        )
        .unwrap();
        for (id, a) in self.support_ids.iter().zip(&self.alphas) {
            writeln!(out, "{id} {}", fmt_real(*a)).unwrap();
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out);
        out
    }

    /// Parses one or more concatenated `svm v1` blocks.
    pub fn parse_all(text: &str, path: &Path) -> Result<Vec<SvmModel>> {
        let mut models: Vec<SvmModel> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens[0] == "svm" {
                if tokens.get(1) != Some(&"v1") {
                    return Err(Error::malformed(path, ln, "expected `svm v1` header"));
                }
                let c = parse_real(header_field(&tokens, "C", path, ln)?, path, ln)?;
                let bias = parse_real(header_field(&tokens, "bias", path, ln)?, path, ln)?;
                models.push(SvmModel {
                    support_ids: Vec::new(),
                    alphas: Vec::new(),
                    bias,
                    c,
                    label_positive: header_field(&tokens, "pos", path, ln)?.to_string(),
                    label_negative: header_field(&tokens, "neg", path, ln)?.to_string(),
                });
                continue;
            }
            let model = models
                .last_mut()
                .ok_or_else(|| Error::malformed(path, ln, "support vector line before `svm v1` header"))?;
            if tokens.len() != 2 {
                return Err(Error::malformed(path, ln, "expected `<id> <alpha>`"));
            }
            model.support_ids.push(tokens[0].to_string());
            model.alphas.push(parse_real(tokens[1], path, ln)?);
        }
        if models.is_empty() {
            return Err(Error::malformed(path, 1, "no `svm v1` block"));
        }
        Ok(models)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut all = Self::parse_all(&read_text(path)?, path)?;
        if all.len() != 1 {
            return Err(Error::malformed(
                path,
                1,
                format!("expected one model, found {}", all.len()),
            ));
        }
        Ok(all.remove(0))
    }
}

/// Result of one training run.
#[derive(Debug, Clone)]
pub struct Training {
    pub model: SvmModel,
    /// Unsigned dual variables for every training point, in gram order.
    pub dual: Vec<f64>,
    /// `f(x_i)` for every training point, computed from the final model.
    pub decision_values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the eigenvalue check found a clearly non-PSD kernel.
    pub min_eigenvalue: Option<f64>,
    /// Dual objective (to maximize) after each iteration, when requested.
    pub objective_trace: Vec<f64>,
}

/// Trains a binary SVM. `labels[i]` is `true` for the positive class.
pub fn train_svm(gram: &GramMatrix, labels: &[bool], params: &SvmParams) -> Result<Training> {
    train(gram, labels, params, false)
}

/// Like [`train_svm`], also recording the dual objective after every step.
pub fn train_svm_traced(gram: &GramMatrix, labels: &[bool], params: &SvmParams) -> Result<Training> {
    train(gram, labels, params, true)
}

fn train(gram: &GramMatrix, labels: &[bool], params: &SvmParams, trace: bool) -> Result<Training> {
    params.validate()?;
    let n = gram.len();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        let which = if labels.first().copied().unwrap_or(true) {
            "+1"
        } else {
            "-1"
        };
        return Err(Error::SingleClass(which.into()));
    }

    let mut non_psd = None;
    if params.check_psd && n <= PSD_CHECK_LIMIT {
        let min_eig = min_eigenvalue(gram)?;
        if min_eig < -1e-6 * gram.trace().abs() {
            log::warn!("gram matrix is not PSD: min eigenvalue {min_eig:e}");
            non_psd = Some(min_eig);
        }
    }

    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let c = params.c;
    let q = |i: usize, j: usize| y[i] * y[j] * gram.get(i, j);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let objective =
        |alpha: &[f64], grad: &[f64]| -> f64 { -0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>() };
    let mut objective_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iter {
        let Some((i, j)) = select_pair(gram, &y, &alpha, &grad, c, params.tol) else {
            converged = true;
            break;
        };
        iterations += 1;
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (kii, kjj, kij) = (gram.get(i, i), gram.get(j, j), gram.get(i, j));
        let quad = {
            let q = kii + kjj - 2.0 * kij;
            if q > 0.0 {
                q
            } else {
                TAU
            }
        };
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
        if trace {
            objective_trace.push(objective(&alpha, &grad));
        }
    }
    if !converged {
        log::warn!(
            "SVM solver stopped after {iterations} iterations without reaching tol {}",
            params.tol
        );
    }

    let bias = -rho(&y, &alpha, &grad, c);
    let support: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0).collect();
    let model = SvmModel {
        support_ids: support.iter().map(|&i| gram.ids()[i].clone()).collect(),
        alphas: support.iter().map(|&i| y[i] * alpha[i]).collect(),
        bias,
        c,
        label_positive: "+1".into(),
        label_negative: "-1".into(),
    };
    let decision_values = (0..n).map(|t| model.decision_at(gram.row(t), &support)).collect();
    Ok(Training {
        model,
        dual: alpha,
        decision_values,
        iterations,
        converged,
        min_eigenvalue: non_psd,
        objective_trace,
    })
}

/// Working-pair selection; `None` once the maximal KKT violation is below `tol`.
fn select_pair(gram: &GramMatrix, y: &[f64], alpha: &[f64], grad: &[f64], c: f64, tol: f64) -> Option<(usize, usize)> {
    let in_up = |t: usize| (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
    let in_low = |t: usize| (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c);

    let mut gmax = f64::NEG_INFINITY;
    let mut i = usize::MAX;
    for t in 0..y.len() {
        if in_up(t) && -y[t] * grad[t] >= gmax {
            gmax = -y[t] * grad[t];
            i = t;
        }
    }
    if i == usize::MAX {
        return None;
    }

    let mut gmax2 = f64::NEG_INFINITY;
    let mut j = usize::MAX;
    let mut best = f64::INFINITY;
    for t in 0..y.len() {
        if !in_low(t) {
            continue;
        }
        let yg = y[t] * grad[t];
        gmax2 = gmax2.max(yg);
        let b = gmax + yg;
        if b > 0.0 {
            let q = gram.get(i, i) + gram.get(t, t) - 2.0 * gram.get(i, t);
            let obj = -(b * b) / if q > 0.0 { q } else { TAU };
            if obj <= best {
                best = obj;
                j = t;
            }
        }
    }
    if gmax + gmax2 < tol || j == usize::MAX {
        None
    } else {
        Some((i, j))
    }
}

/// Offset `rho` with `f(x) = sum_j y_j a_j K(x, x_j) - rho`.
fn rho(y: &[f64], alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut free = 0usize;
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        0.5 * (ub + lb)
    }
}
