//! Gram matrices over datasets of discrete sequences.
//!
//! Feature vectors are computed once per sequence row and shared read-only
//! across the pair loop, which runs on the current rayon pool. Every cell is
//! computed independently from the cached features, so the output does not
//! depend on the number of worker threads.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, SequenceFeatures};
use crate::sequence::DiscreteSequence;
use crate::textfmt::{fmt_real, header_field, parse_int, parse_real, read_text, write_text};

/// Symmetric `N x N` kernel matrix indexed by sequence id.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
}

impl GramMatrix {
    /// Builds a Gram matrix from dense rows. The matrix must be square and
    /// exactly symmetric, and `ids` unique.
    pub fn from_rows(ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        check_unique(&ids)?;
        if rows.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        let g = Self { ids, values };
        for i in 0..n {
            for j in 0..i {
                if g.get(i, j).to_bits() != g.get(j, i).to_bits() {
                    return Err(Error::InvalidParams(format!("gram matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.len()).map(|i| self.get(i, i)).sum()
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn subset(&self, indices: &[usize]) -> GramMatrix {
        let ids = indices.iter().map(|&i| self.ids[i].clone()).collect();
        let values = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| self.get(i, j)))
            .collect();
        GramMatrix { ids, values }
    }

    pub fn to_text(&self) -> String {
        let n = self.len();
        let mut out = format!("gram v1 N={n}\n{}\n", self.ids.join("\t"));
        for i in 0..n {
            push_row(&mut out, self.row(i));
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::malformed(path, 1, "empty gram file"))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() < 3 || tokens[0] != "gram" || tokens[1] != "v1" {
            return Err(Error::malformed(path, 1, "expected `gram v1 N=<int>` header"));
        }
        let n: usize = parse_int(header_field(&tokens, "N", path, 1)?, path, 1)?;
        let ids = parse_ids(lines.next(), n, path, 2)?;
        let rows = parse_rows(lines, n, n, path, 3)?;
        Self::from_rows(ids, rows)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }
}

/// `|test| x |train|` kernel values between two datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossGram {
    row_ids: Vec<String>,
    col_ids: Vec<String>,
    values: Vec<f64>,
}

impl CrossGram {
    pub fn from_rows(row_ids: Vec<String>, col_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != row_ids.len() {
            return Err(Error::LengthMismatch {
                expected: row_ids.len(),
                found: rows.len(),
            });
        }
        let mut values = Vec::with_capacity(row_ids.len() * col_ids.len());
        for row in rows {
            if row.len() != col_ids.len() {
                return Err(Error::LengthMismatch {
                    expected: col_ids.len(),
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        Ok(Self {
            row_ids,
            col_ids,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.col_ids.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols()..(i + 1) * self.cols()]
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "cross-gram v1 rows={} cols={}\n{}\n{}\n",
            self.rows(),
            self.cols(),
            self.row_ids.join("\t"),
            self.col_ids.join("\t")
        );
        for i in 0..self.rows() {
            push_row(&mut out, self.row(i));
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::malformed(path, 1, "empty cross-gram file"))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() < 4 || tokens[0] != "cross-gram" || tokens[1] != "v1" {
            return Err(Error::malformed(
                path,
                1,
                "expected `cross-gram v1 rows=<int> cols=<int>` header",
            ));
        }
        let rows: usize = parse_int(header_field(&tokens, "rows", path, 1)?, path, 1)?;
        let cols: usize = parse_int(header_field(&tokens, "cols", path, 1)?, path, 1)?;
        let row_ids = parse_ids(lines.next(), rows, path, 2)?;
        let col_ids = parse_ids(lines.next(), cols, path, 3)?;
        let values = parse_rows(lines, rows, cols, path, 4)?;
        Self::from_rows(row_ids, col_ids, values)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }
}

fn push_row(out: &mut String, row: &[f64]) {
    for (j, &v) in row.iter().enumerate() {
        if j > 0 {
            out.push('\t');
        }
        write!(out, "{}", fmt_real(v)).unwrap();
    }
    out.push('\n');
}

fn parse_ids(line: Option<&str>, expected: usize, path: &Path, ln: usize) -> Result<Vec<String>> {
    let line = line.ok_or_else(|| Error::malformed(path, ln, "missing id line"))?;
    let ids: Vec<String> = if line.is_empty() {
        Vec::new()
    } else {
        line.split('\t').map(str::to_string).collect()
    };
    if ids.len() != expected {
        return Err(Error::malformed(
            path,
            ln,
            format!("expected {expected} ids, found {}", ids.len()),
        ));
    }
    Ok(ids)
}

fn parse_rows<'a>(
    lines: impl Iterator<Item = &'a str>,
    rows: usize,
    cols: usize,
    path: &Path,
    first_line: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(rows);
    for (offset, line) in lines.enumerate() {
        let ln = first_line + offset;
        if line.is_empty() && cols > 0 {
            continue;
        }
        let row = if cols == 0 {
            Vec::new()
        } else {
            line.split('\t')
                .map(|t| parse_real(t, path, ln))
                .collect::<Result<Vec<_>>>()?
        };
        if row.len() != cols {
            return Err(Error::malformed(
                path,
                ln,
                format!("expected {cols} values, found {}", row.len()),
            ));
        }
        out.push(row);
    }
    if out.len() != rows {
        return Err(Error::malformed(
            path,
            first_line + out.len(),
            format!("header declares {rows} rows, found {}", out.len()),
        ));
    }
    Ok(out)
}

fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

fn check_compatible(sets: &[&[DiscreteSequence]], spec: &KernelSpec) -> Result<()> {
    spec.validate()?;
    let mut dims = None;
    for seq in sets.iter().flat_map(|s| s.iter()) {
        let r = *dims.get_or_insert(seq.dims());
        if seq.dims() != r {
            return Err(Error::KernelPair {
                left: seq.id.clone(),
                right: "dataset".into(),
                source: Box::new(Error::DimensionMismatch {
                    expected: r,
                    found: seq.dims(),
                }),
            });
        }
    }
    Ok(())
}

/// Featurizes every sequence in parallel.
pub fn featurize_all(dataset: &[DiscreteSequence], spec: &KernelSpec) -> Result<Vec<SequenceFeatures>> {
    dataset
        .par_iter()
        .map(|s| {
            spec.featurize(s).map_err(|e| Error::KernelPair {
                left: s.id.clone(),
                right: s.id.clone(),
                source: Box::new(e),
            })
        })
        .collect()
}

pub fn compute_gram(dataset: &[DiscreteSequence], spec: &KernelSpec) -> Result<GramMatrix> {
    check_compatible(&[dataset], spec)?;
    let ids: Vec<String> = dataset.iter().map(|s| s.id.clone()).collect();
    check_unique(&ids)?;
    let features = featurize_all(dataset, spec)?;
    let n = dataset.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| spec.kernel(&features[i], &features[j]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let j = i + offset;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(GramMatrix { ids, values })
}

pub fn compute_cross_gram(
    test: &[DiscreteSequence],
    train: &[DiscreteSequence],
    spec: &KernelSpec,
) -> Result<CrossGram> {
    check_compatible(&[test, train], spec)?;
    let test_features = featurize_all(test, spec)?;
    let train_features = featurize_all(train, spec)?;
    let rows: Vec<Vec<f64>> = test_features
        .par_iter()
        .map(|fx| {
            train_features
                .iter()
                .map(|fy| spec.kernel(fx, fy))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    CrossGram::from_rows(
        test.iter().map(|s| s.id.clone()).collect(),
        train.iter().map(|s| s.id.clone()).collect(),
        rows,
    )
}

/// Smallest eigenvalue of the (symmetric) Gram matrix.
pub fn min_eigenvalue(gram: &GramMatrix) -> Result<f64> {
    let n = gram.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(pos) = gram.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / n,
            col: pos % n,
        });
    }
    let m = nalgebra::DMatrix::from_row_slice(n, n, &gram.values);
    let eig = nalgebra::SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
