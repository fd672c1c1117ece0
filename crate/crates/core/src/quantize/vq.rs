//! Vector quantization: a k-means codebook over `R`-dim feature columns,
//! turning a multivariate sequence into one row of codeword ids.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng as _;

use super::pooled_dimensions;
use crate::error::{Error, Result};
use crate::rng::{rng_for, stream};
use crate::sequence::{DiscreteSequence, MultivariateSequence, Symbol};
use crate::textfmt::{fmt_real, header_field, parse_int, parse_real, read_text, write_text};

/// Default codebook size.
pub const DEFAULT_CODEBOOK_SIZE: usize = 2048;

/// `D` centroids in `R` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dims: usize,
    centroids: Vec<f64>,
}

impl Codebook {
    pub fn new(centroids: Vec<Vec<f64>>) -> Result<Self> {
        let dims = centroids.first().map(Vec::len).unwrap_or(0);
        if dims == 0 {
            return Err(Error::InvalidParams(
                "codebook needs at least one non-empty centroid".into(),
            ));
        }
        let mut flat = Vec::with_capacity(dims * centroids.len());
        for (i, c) in centroids.iter().enumerate() {
            if c.len() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: c.len(),
                });
            }
            if let Some(j) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
            flat.extend_from_slice(c);
        }
        Ok(Self { dims, centroids: flat })
    }

    /// Codeword count `D`.
    pub fn size(&self) -> usize {
        self.centroids.len() / self.dims
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn centroid(&self, i: usize) -> &[f64] {
        &self.centroids[i * self.dims..(i + 1) * self.dims]
    }

    /// Codeword ids run `1..=D`; id 0 is never emitted.
    pub fn alphabet_size(&self) -> u32 {
        self.size() as u32 + 1
    }

    /// 0-based index of the nearest centroid; ties go to the lowest index.
    pub fn nearest(&self, x: &[f64]) -> usize {
        nearest(&self.centroids, self.dims, x).0
    }

    pub fn apply(&self, x: &MultivariateSequence) -> Result<DiscreteSequence> {
        if x.dims() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                found: x.dims(),
            });
        }
        let mut column = vec![0.0; self.dims];
        let row: Vec<Symbol> = (0..x.len())
            .map(|i| {
                for (c, r) in column.iter_mut().zip(x.rows()) {
                    *c = r[i];
                }
                self.nearest(&column) as Symbol + 1
            })
            .collect();
        Ok(DiscreteSequence::new(&x.id, &x.label, self.alphabet_size(), vec![row])?.with_group(x.group.clone()))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("vq-codebook v1 R={} D={}\n", self.dims, self.size());
        for i in 0..self.size() {
            let line: Vec<String> = self.centroid(i).iter().map(|&v| fmt_real(v)).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::malformed(path, 1, "empty codebook file"))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() < 2 || tokens[0] != "vq-codebook" || tokens[1] != "v1" {
            return Err(Error::malformed(path, ln, "expected `vq-codebook v1` header"));
        }
        let r: usize = parse_int(header_field(&tokens, "R", path, ln)?, path, ln)?;
        let d: usize = parse_int(header_field(&tokens, "D", path, ln)?, path, ln)?;
        let mut centroids = Vec::with_capacity(d);
        for (ln, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
            let c = line
                .split_whitespace()
                .map(|t| parse_real(t, path, ln))
                .collect::<Result<Vec<_>>>()?;
            if c.len() != r {
                return Err(Error::malformed(
                    path,
                    ln,
                    format!("expected {r} reals, found {}", c.len()),
                ));
            }
            centroids.push(c);
        }
        if centroids.len() != d || d == 0 {
            return Err(Error::malformed(
                path,
                ln,
                format!("header declares D={d}, found {} centroids", centroids.len()),
            ));
        }
        Self::new(centroids)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }
}

/// Nearest centroid index and its squared distance.
fn nearest(centroids: &[f64], dims: usize, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.chunks_exact(dims).enumerate() {
        let d: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Fits a `size`-codeword codebook with k-means++ seeding and at most
/// `max_iter` Lloyd iterations over every column of every sequence.
pub fn fit_vq_codebook(dataset: &[MultivariateSequence], size: usize, max_iter: usize, seed: u64) -> Result<Codebook> {
    if size == 0 || max_iter == 0 {
        return Err(Error::InvalidParams(
            "codebook size and max_iter must be positive".into(),
        ));
    }
    let pooled = pooled_dimensions(dataset).map_err(|e| match e {
        Error::EmptyDataset => Error::TooFewSamples {
            samples: 0,
            needed: size,
        },
        e => e,
    })?;
    let dims = pooled.len();
    let count = pooled[0].len();
    if count < size {
        return Err(Error::TooFewSamples {
            samples: count,
            needed: size,
        });
    }
    let points: Vec<f64> = (0..count).flat_map(|i| pooled.iter().map(move |row| row[i])).collect();
    let point = |i: usize| &points[i * dims..(i + 1) * dims];
    let dist2 = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };

    // k-means++ seeding
    let mut rng = rng_for(seed, stream::VQ_CODEBOOK);
    let mut centroids: Vec<f64> = Vec::with_capacity(size * dims);
    let first = rng.random_range(0..count);
    centroids.extend_from_slice(point(first));
    let mut closest: Vec<f64> = (0..count).map(|i| dist2(point(i), point(first))).collect();
    while centroids.len() < size * dims {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            closest
                .iter()
                .position(|&d| {
                    acc += d;
                    acc > target
                })
                .unwrap_or_else(|| closest.iter().rposition(|&d| d > 0.0).expect("positive weight"))
        } else {
            rng.random_range(0..count)
        };
        let c = point(pick).to_vec();
        for (i, d) in closest.iter_mut().enumerate() {
            *d = d.min(dist2(point(i), &c));
        }
        centroids.extend_from_slice(&c);
    }

    // Lloyd
    let mut assignment = vec![usize::MAX; count];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, a) in assignment.iter_mut().enumerate() {
            let (best, _) = nearest(&centroids, dims, point(i));
            if *a != best {
                *a = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![0.0; size * dims];
        let mut counts = vec![0usize; size];
        for (i, &a) in assignment.iter().enumerate() {
            counts[a] += 1;
            for (s, &v) in sums[a * dims..(a + 1) * dims].iter_mut().zip(point(i)) {
                *s += v;
            }
        }
        for (c, &n) in counts.iter().enumerate() {
            if n > 0 {
                for (dst, s) in centroids[c * dims..(c + 1) * dims]
                    .iter_mut()
                    .zip(&sums[c * dims..(c + 1) * dims])
                {
                    *dst = s / n as f64;
                }
            }
        }
    }
    Ok(Codebook { dims, centroids })
}

/// Free-function form of [`Codebook::apply`].
pub fn apply_vq(codebook: &Codebook, x: &MultivariateSequence) -> Result<DiscreteSequence> {
    codebook.apply(x)
}
