//! Real-valued and discrete multivariate sequences.
//!
//! Both types are stored dimension-major: `rows[r][i]` is feature dimension
//! `r` at time step `i`.

use crate::error::{Error, Result};

/// A discrete symbol. DFQ rows use `0..=B+1`, VQ rows use `1..=D`.
pub type Symbol = u32;

/// An `R x n` real-valued feature matrix with identity and class label.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSequence {
    pub id: String,
    pub label: String,
    /// Optional grouping key (album, superfamily, ...) for grouped CV.
    pub group: Option<String>,
    rows: Vec<Vec<f64>>,
}

impl MultivariateSequence {
    /// Builds a sequence from dimension-major rows.
    ///
    /// All rows must share one length and every value must be finite.
    pub fn new(id: impl Into<String>, label: impl Into<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParams("a sequence needs at least one dimension".into()));
        }
        let n = rows[0].len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if let Some(i) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: r, col: i });
            }
        }
        Ok(Self {
            id: id.into(),
            label: label.into(),
            group: None,
            rows,
        })
    }

    /// Builds a sequence from time-major frames (one `R`-vector per step).
    pub fn from_frames(
        id: impl Into<String>,
        label: impl Into<String>,
        dims: usize,
        frames: &[Vec<f64>],
    ) -> Result<Self> {
        let mut rows = vec![Vec::with_capacity(frames.len()); dims];
        for frame in frames {
            if frame.len() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: frame.len(),
                });
            }
            for (row, &v) in rows.iter_mut().zip(frame) {
                row.push(v);
            }
        }
        Self::new(id, label, rows)
    }

    pub fn with_group(mut self, group: Option<String>) -> Self {
        self.group = group;
        self
    }

    /// Number of feature dimensions `R`.
    pub fn dims(&self) -> usize {
        self.rows.len()
    }

    /// Sequence length `n`.
    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r]
    }

    /// Column `i` as an `R`-vector.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|row| row[i]).collect()
    }
}

/// `R` parallel symbol rows over a shared alphabet `0..alphabet_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteSequence {
    pub id: String,
    pub label: String,
    pub group: Option<String>,
    alphabet_size: u32,
    rows: Vec<Vec<Symbol>>,
}

impl DiscreteSequence {
    pub fn new(
        id: impl Into<String>,
        label: impl Into<String>,
        alphabet_size: u32,
        rows: Vec<Vec<Symbol>>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParams("a sequence needs at least one row".into()));
        }
        if alphabet_size == 0 {
            return Err(Error::InvalidParams("alphabet size must be positive".into()));
        }
        let n = rows[0].len();
        for row in &rows {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if let Some(&symbol) = row.iter().find(|&&s| s >= alphabet_size) {
                return Err(Error::SymbolOutOfRange { symbol, alphabet_size });
            }
        }
        Ok(Self {
            id: id.into(),
            label: label.into(),
            group: None,
            alphabet_size,
            rows,
        })
    }

    pub fn with_group(mut self, group: Option<String>) -> Self {
        self.group = group;
        self
    }

    pub fn dims(&self) -> usize {
        self.rows.len()
    }

    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn rows(&self) -> &[Vec<Symbol>] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &[Symbol] {
        &self.rows[r]
    }
}
