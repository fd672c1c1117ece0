//! Synthetic labelled multivariate sequences.
//!
//! Every dimension of every sequence is an independent zero-mean AR(1)
//! process
//!
//! ```text
//! x_t = phi * x_{t-1} + sqrt(1 - phi^2) * e_t,    e_t ~ N(0, 1)
//! ```
//!
//! so the stationary marginal is `N(0, 1)` in every class and classes
//! differ only in their temporal dynamics. For class `c` of `C` and
//! dimension `j`, `phi = PHI_LOW + (PHI_HIGH - PHI_LOW) * ((c + j) mod C) / (C - 1)`,
//! i.e. the per-dimension coefficients are a class-specific rotation of an
//! evenly spaced ladder from `-0.6` to `0.8`. `x_0` is drawn from the
//! stationary distribution, so no burn-in is needed.
//!
//! Sequence `i` belongs to class `i mod C`, gets the id `s{i:04}` and the
//! label `c{class}`. All draws come from the `SYNTH` stream of the seed, in
//! sequence order, then dimension order, then time order.

use std::path::{Path, PathBuf};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ingest::{Manifest, ManifestEntry};
use crate::rng::{rng_for, stream};
use crate::sequence::MultivariateSequence;
use crate::textfmt::{fmt_real, write_text};

pub const PHI_LOW: f64 = -0.6;
pub const PHI_HIGH: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthParams {
    pub classes: usize,
    pub per_class: usize,
    pub dims: usize,
    pub length: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            classes: 3,
            per_class: 20,
            dims: 3,
            length: 300,
            seed: 0,
        }
    }
}

/// AR coefficient of dimension `dim` in class `class`.
pub fn ar_coefficient(class: usize, dim: usize, classes: usize) -> f64 {
    let step = ((class + dim) % classes) as f64 / (classes - 1) as f64;
    PHI_LOW + (PHI_HIGH - PHI_LOW) * step
}

pub fn generate(params: &SynthParams) -> Result<Vec<MultivariateSequence>> {
    if params.classes < 2 {
        return Err(Error::InvalidParams("synth needs at least 2 classes".into()));
    }
    if params.per_class == 0 || params.dims == 0 {
        return Err(Error::InvalidParams("synth needs per_class >= 1 and dims >= 1".into()));
    }
    let mut rng = rng_for(params.seed, stream::SYNTH);
    let total = params.classes * params.per_class;
    (0..total)
        .map(|i| {
            let class = i % params.classes;
            let rows = (0..params.dims)
                .map(|j| {
                    let phi = ar_coefficient(class, j, params.classes);
                    let innovation = (1.0 - phi * phi).sqrt();
                    let mut row = Vec::with_capacity(params.length);
                    let mut x: f64 = StandardNormal.sample(&mut rng);
                    for t in 0..params.length {
                        if t > 0 {
                            let e: f64 = StandardNormal.sample(&mut rng);
                            x = phi * x + innovation * e;
                        }
                        row.push(x);
                    }
                    row
                })
                .collect();
            MultivariateSequence::new(format!("s{i:04}"), format!("c{class}"), rows)
        })
        .collect()
}

/// Writes one time-major CSV per sequence plus `manifest.tsv` into `dir`,
/// returning the manifest path.
pub fn write_dataset(dataset: &[MultivariateSequence], dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(dataset.len());
    for seq in dataset {
        let path = dir.join(format!("{}.csv", seq.id));
        let mut text = String::new();
        for t in 0..seq.len() {
            let frame: Vec<String> = seq.rows().iter().map(|row| fmt_real(row[t])).collect();
            text.push_str(&frame.join(","));
            text.push('\n');
        }
        write_text(&path, &text)?;
        entries.push(ManifestEntry {
            id: seq.id.clone(),
            label: seq.label.clone(),
            group: seq.group.clone(),
            path,
        });
    }
    let manifest_path = dir.join("manifest.tsv");
    Manifest { entries }.save(&manifest_path)?;
    Ok(manifest_path)
}
