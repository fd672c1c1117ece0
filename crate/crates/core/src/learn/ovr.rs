//! One-vs-rest multiclass SVM.

use std::collections::BTreeSet;
use std::path::Path;

use super::svm::{train_svm, SvmModel, SvmParams};
use crate::error::{Error, Result};
use crate::gram::{CrossGram, GramMatrix};
use crate::textfmt::{read_text, write_text};

/// Negative-class label written for "every other class" models.
pub const REST_LABEL: &str = "*";

/// One binary model per class, classes in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct OvrModel {
    classes: Vec<String>,
    models: Vec<SvmModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub label: String,
    /// Winning decision score.
    pub score: f64,
    /// Decision score of every class, aligned with [`OvrModel::classes`].
    pub scores: Vec<f64>,
}

impl OvrModel {
    pub fn from_models(models: Vec<SvmModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::EmptyInput);
        }
        let classes: Vec<String> = models.iter().map(|m| m.label_positive.clone()).collect();
        if classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "models must have distinct classes in sorted order".into(),
            ));
        }
        Ok(Self { classes, models })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn models(&self) -> &[SvmModel] {
        &self.models
    }

    /// Picks the highest score; ties go to the smallest label.
    pub fn choose(&self, scores: &[f64]) -> (usize, f64) {
        let mut best = (0, scores[0]);
        for (c, &s) in scores.iter().enumerate().skip(1) {
            if s > best.1 {
                best = (c, s);
            }
        }
        best
    }

    /// Predicts every row of a cross-gram whose columns include all
    /// support vectors.
    pub fn predict_cross(&self, cross: &CrossGram) -> Result<Vec<Prediction>> {
        let columns = self
            .models
            .iter()
            .map(|m| m.support_columns(cross.col_ids()))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..cross.rows())
            .map(|i| {
                let row = cross.row(i);
                let scores: Vec<f64> = self
                    .models
                    .iter()
                    .zip(&columns)
                    .map(|(m, cols)| m.decision_at(row, cols))
                    .collect();
                let (c, score) = self.choose(&scores);
                Prediction {
                    id: cross.row_ids()[i].clone(),
                    label: self.classes[c].clone(),
                    score,
                    scores,
                }
            })
            .collect())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in &self.models {
            m.write_text(&mut out);
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_models(SvmModel::parse_all(&read_text(path)?, path)?)
    }
}

/// Trains one class-vs-rest model per distinct label.
pub fn train_ovr<S: AsRef<str>>(gram: &GramMatrix, labels: &[S], params: &SvmParams) -> Result<OvrModel> {
    if labels.len() != gram.len() {
        return Err(Error::LengthMismatch {
            expected: gram.len(),
            found: labels.len(),
        });
    }
    let classes: Vec<String> = labels
        .iter()
        .map(|l| l.as_ref().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass(classes.first().cloned().unwrap_or_default()));
    }
    let mut models = Vec::with_capacity(classes.len());
    for class in &classes {
        let binary: Vec<bool> = labels.iter().map(|l| l.as_ref() == class).collect();
        let mut model = train_svm(gram, &binary, params)?.model;
        model.label_positive = class.clone();
        model.label_negative = if classes.len() == 2 {
            classes.iter().find(|c| *c != class).unwrap().clone()
        } else {
            REST_LABEL.to_string()
        };
        models.push(model);
    }
    OvrModel::from_models(models)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_class_gram() -> (GramMatrix, Vec<&'static str>) {
        // orthogonal class directions plus a little within-class variation
        let dirs = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (c, d) in dirs.iter().enumerate() {
            for k in 0..4 {
                let scale = 1.0 + 0.1 * k as f64;
                pts.push(d.map(|v| v * scale + 0.05 * k as f64));
                labels.push(["a", "b", "c"][c]);
            }
        }
        let rows = pts
            .iter()
            .map(|p| pts.iter().map(|q| p.iter().zip(q).map(|(x, y)| x * y).sum()).collect())
            .collect();
        let ids = (0..pts.len()).map(|i| format!("p{i}")).collect();
        (GramMatrix::from_rows(ids, rows).unwrap(), labels)
    }

    #[test]
    fn three_separated_classes() {
        let (g, labels) = three_class_gram();
        let m = train_ovr(
            &g,
            &labels,
            &SvmParams {
                c: 100.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(m.classes(), &["a", "b", "c"]);
        let rows = (0..g.len()).map(|i| g.row(i).to_vec()).collect();
        let cross = CrossGram::from_rows(g.ids().to_vec(), g.ids().to_vec(), rows).unwrap();
        let preds = m.predict_cross(&cross).unwrap();
        for (p, l) in preds.iter().zip(&labels) {
            assert_eq!(p.label, *l);
        }
        let back = OvrModel::from_models(SvmModel::parse_all(&m.to_text(), Path::new("m")).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn two_classes_match_binary() {
        let (g, labels) = three_class_gram();
        let keep: Vec<usize> = (0..8).collect();
        let g = g.subset(&keep);
        let labels = &labels[..8];
        let params = SvmParams::default();
        let ovr = train_ovr(&g, labels, &params).unwrap();
        let binary: Vec<bool> = labels.iter().map(|&l| l == "a").collect();
        let bin = train_svm(&g, &binary, &params).unwrap();
        assert_eq!(ovr.models()[1].label_negative, "a");
        for i in 0..g.len() {
            let cols = bin.model.support_columns(g.ids()).unwrap();
            let s = bin.model.decision_at(g.row(i), &cols);
            let expect = if s >= 0.0 { "a" } else { "b" };
            let cross = CrossGram::from_rows(vec!["q".into()], g.ids().to_vec(), vec![g.row(i).to_vec()]).unwrap();
            assert_eq!(ovr.predict_cross(&cross).unwrap()[0].label, expect);
        }
    }

    #[test]
    fn ties_pick_smallest_label() {
        let mk = |c: &str| SvmModel {
            support_ids: vec![],
            alphas: vec![],
            bias: 0.5,
            c: 1.0,
            label_positive: c.into(),
            label_negative: REST_LABEL.into(),
        };
        let m = OvrModel::from_models(vec![mk("x"), mk("y"), mk("z")]).unwrap();
        assert_eq!(m.choose(&[0.1, 0.7, 0.7]), (1, 0.7));
        let cross = CrossGram::from_rows(vec!["q".into()], vec![], vec![vec![]]).unwrap();
        assert_eq!(m.predict_cross(&cross).unwrap()[0].label, "x");
    }

    #[test]
    fn needs_two_classes() {
        let (g, _) = three_class_gram();
        let labels = vec!["a"; g.len()];
        assert!(matches!(
            train_ovr(&g, &labels, &SvmParams::default()),
            Err(Error::SingleClass(_))
        ));
    }
}
