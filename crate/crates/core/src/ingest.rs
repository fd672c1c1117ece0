//! Loading datasets: TSV manifests of per-sequence CSV feature files, and
//! protein FASTA expanded through BLOSUM62 rows.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sequence::MultivariateSequence;
use crate::textfmt::{read_text, write_text};

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub label: String,
    pub group: Option<String>,
    pub path: PathBuf,
}

/// `id<TAB>label<TAB>group<TAB>path` rows; relative paths resolve against
/// the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new(""));
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            if line.trim().is_empty() || line.starts_with('#') || (ln == 1 && line.starts_with("id\tlabel")) {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::malformed(
                    path,
                    ln,
                    format!("expected 4 tab-separated columns, found {}", cols.len()),
                ));
            }
            if cols[0].is_empty() || cols[3].is_empty() {
                return Err(Error::malformed(path, ln, "id and path must be non-empty"));
            }
            if !seen.insert(cols[0].to_string()) {
                return Err(Error::DuplicateId(cols[0].to_string()));
            }
            entries.push(ManifestEntry {
                id: cols[0].to_string(),
                label: cols[1].to_string(),
                group: (!cols[2].is_empty()).then(|| cols[2].to_string()),
                path: base.join(cols[3]),
            });
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }

    /// Writes the manifest with paths relative to `dir` where possible.
    pub fn to_tsv(&self, dir: &Path) -> String {
        let mut out = String::from("id\tlabel\tgroup\tpath\n");
        for e in &self.entries {
            let p = e.path.strip_prefix(dir).unwrap_or(&e.path);
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                e.id,
                e.label,
                e.group.as_deref().unwrap_or(""),
                p.display()
            )
            .unwrap();
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_tsv(path.parent().unwrap_or(Path::new(""))))
    }
}

/// Parses a headerless time-major CSV (one frame per line). Returns the
/// frames and the column count (`None` for an empty file).
pub fn parse_csv_frames(text: &str, path: &Path) -> Result<(Vec<Vec<f64>>, Option<usize>)> {
    let mut frames = Vec::new();
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut frame = Vec::new();
        for cell in line.split(',') {
            let cell = cell.trim();
            let v: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                path: path.to_path_buf(),
                line: ln,
                cell: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NaNOrInf {
                    path: path.to_path_buf(),
                    line: ln,
                });
            }
            frame.push(v);
        }
        let w = *width.get_or_insert(frame.len());
        if frame.len() != w {
            return Err(Error::InconsistentColumns {
                path: path.to_path_buf(),
                line: ln,
                expected: w,
                found: frame.len(),
            });
        }
        frames.push(frame);
    }
    Ok((frames, width))
}

/// Loads every sequence listed in a manifest.
pub fn ingest_csv(manifest_path: &Path) -> Result<Vec<MultivariateSequence>> {
    load_manifest_sequences(&Manifest::load(manifest_path)?)
}

pub fn load_manifest_sequences(manifest: &Manifest) -> Result<Vec<MultivariateSequence>> {
    let mut parsed = Vec::with_capacity(manifest.entries.len());
    let mut dims: Option<(usize, &Path)> = None;
    for e in &manifest.entries {
        let (frames, width) = parse_csv_frames(&read_text(&e.path)?, &e.path)?;
        if let Some(w) = width {
            match dims {
                None => dims = Some((w, &e.path)),
                Some((r, _)) if r != w => {
                    return Err(Error::InconsistentColumns {
                        path: e.path.clone(),
                        line: 1,
                        expected: r,
                        found: w,
                    })
                }
                _ => {}
            }
        }
        parsed.push(frames);
    }
    let Some((r, _)) = dims else {
        return if manifest.entries.is_empty() {
            Ok(Vec::new())
        } else {
            Err(Error::EmptyDataset)
        };
    };
    manifest
        .entries
        .iter()
        .zip(parsed)
        .map(|(e, frames)| {
            if frames.is_empty() {
                log::warn!("{}: empty sequence", e.path.display());
            }
            Ok(MultivariateSequence::from_frames(&e.id, &e.label, r, &frames)?.with_group(e.group.clone()))
        })
        .collect()
}

/// Amino acids in BLOSUM62 row order.
pub const AMINO_ACIDS: &str = "ARNDCQEGHILKMFPSTWYV";

#[rustfmt::skip]
pub const BLOSUM62: [[i8; 20]; 20] = [
    [ 4, -1, -2, -2,  0, -1, -1,  0, -2, -1, -1, -1, -1, -2, -1,  1,  0, -3, -2,  0],
    [-1,  5,  0, -2, -3,  1,  0, -2,  0, -3, -2,  2, -1, -3, -2, -1, -1, -3, -2, -3],
    [-2,  0,  6,  1, -3,  0,  0,  0,  1, -3, -3,  0, -2, -3, -2,  1,  0, -4, -2, -3],
    [-2, -2,  1,  6, -3,  0,  2, -1, -1, -3, -4, -1, -3, -3, -1,  0, -1, -4, -3, -3],
    [ 0, -3, -3, -3,  9, -3, -4, -3, -3, -1, -1, -3, -1, -2, -3, -1, -1, -2, -2, -1],
    [-1,  1,  0,  0, -3,  5,  2, -2,  0, -3, -2,  1,  0, -3, -1,  0, -1, -2, -1, -2],
    [-1,  0,  0,  2, -4,  2,  5, -2,  0, -3, -3,  1, -2, -3, -1,  0, -1, -3, -2, -2],
    [ 0, -2,  0, -1, -3, -2, -2,  6, -2, -4, -4, -2, -3, -3, -2,  0, -2, -2, -3, -3],
    [-2,  0,  1, -1, -3,  0,  0, -2,  8, -3, -3, -1, -2, -1, -2, -1, -2, -2,  2, -3],
    [-1, -3, -3, -3, -1, -3, -3, -4, -3,  4,  2, -3,  1,  0, -3, -2, -1, -3, -1,  3],
    [-1, -2, -3, -4, -1, -2, -3, -4, -3,  2,  4, -2,  2,  0, -3, -2, -1, -2, -1,  1],
    [-1,  2,  0, -1, -3,  1,  1, -2, -1, -3, -2,  5, -1, -3, -1,  0, -1, -3, -2, -2],
    [-1, -1, -2, -3, -1,  0, -2, -3, -2,  1,  2, -1,  5,  0, -2, -1, -1, -1, -1,  1],
    [-2, -3, -3, -3, -2, -3, -3, -3, -1,  0,  0, -3,  0,  6, -4, -2, -2,  1,  3, -1],
    [-1, -2, -2, -1, -3, -1, -1, -2, -2, -3, -3, -1, -2, -4,  7, -1, -1, -4, -3, -2],
    [ 1, -1,  1,  0, -1,  0,  0,  0, -1, -2, -2,  0, -1, -2, -1,  4,  1, -3, -2, -2],
    [ 0, -1,  0, -1, -1, -1, -1, -2, -2, -1, -1, -1, -1, -2, -1,  1,  5, -2, -2,  0],
    [-3, -3, -4, -4, -2, -2, -3, -2, -2, -3, -2, -3, -1,  1, -4, -3, -2, 11,  2, -3],
    [-2, -2, -2, -3, -2, -1, -2, -3,  2, -1, -1, -2, -1,  3, -3, -2, -2,  2,  7, -1],
    [ 0, -3, -3, -3, -1, -2, -2, -3, -3,  3,  1, -2,  1, -1, -2, -2,  0, -3, -1,  4],
];

enum Residue {
    Row(usize),
    /// Ambiguity code mapped to the zero vector.
    Zero {
        warn: bool,
    },
}

fn residue(c: char) -> Option<Residue> {
    let c = c.to_ascii_uppercase();
    match c {
        'X' => Some(Residue::Zero { warn: false }),
        'B' | 'Z' | 'U' => Some(Residue::Zero { warn: true }),
        _ => AMINO_ACIDS.find(c).map(Residue::Row),
    }
}

/// Reads `id<TAB>label[<TAB>group]` lines.
fn parse_labels(text: &str, path: &Path) -> Result<HashMap<String, (String, Option<String>)>> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&cols.len()) {
            return Err(Error::malformed(path, i + 1, "expected `id<TAB>label[<TAB>group]`"));
        }
        let group = cols.get(2).filter(|g| !g.is_empty()).map(|g| g.to_string());
        if out.insert(cols[0].to_string(), (cols[1].to_string(), group)).is_some() {
            return Err(Error::DuplicateId(cols[0].to_string()));
        }
    }
    Ok(out)
}

/// Loads protein sequences as `20 x n` matrices of BLOSUM62 rows.
pub fn ingest_fasta(fasta_path: &Path, labels_path: &Path) -> Result<Vec<MultivariateSequence>> {
    let labels = parse_labels(&read_text(labels_path)?, labels_path)?;
    parse_fasta(&read_text(fasta_path)?, fasta_path, &labels)
}

fn parse_fasta(
    text: &str,
    path: &Path,
    labels: &HashMap<String, (String, Option<String>)>,
) -> Result<Vec<MultivariateSequence>> {
    struct Record {
        id: String,
        frames: Vec<Vec<f64>>,
        warned: bool,
    }
    let mut records: Vec<Record> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            if id.is_empty() {
                return Err(Error::malformed(path, ln, "FASTA header without id"));
            }
            records.push(Record {
                id,
                frames: Vec::new(),
                warned: false,
            });
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let rec = records
            .last_mut()
            .ok_or_else(|| Error::malformed(path, ln, "sequence data before first header"))?;
        for c in line.chars().filter(|c| !c.is_whitespace()) {
            match residue(c) {
                Some(Residue::Row(r)) => rec.frames.push(BLOSUM62[r].iter().map(|&v| f64::from(v)).collect()),
                Some(Residue::Zero { warn }) => {
                    if warn && !rec.warned {
                        log::warn!("{}: ambiguous residue {c} mapped to zero vector", rec.id);
                        rec.warned = true;
                    }
                    rec.frames.push(vec![0.0; 20]);
                }
                None => {
                    return Err(Error::UnknownResidue {
                        path: path.to_path_buf(),
                        line: ln,
                        residue: c,
                    })
                }
            }
        }
    }
    let mut seen = HashSet::new();
    records
        .into_iter()
        .map(|rec| {
            if !seen.insert(rec.id.clone()) {
                return Err(Error::DuplicateId(rec.id));
            }
            let (label, group) = labels.get(&rec.id).ok_or_else(|| Error::MissingLabel(rec.id.clone()))?;
            if rec.frames.is_empty() {
                log::warn!("{}: empty sequence", rec.id);
            }
            Ok(MultivariateSequence::from_frames(&rec.id, label, 20, &rec.frames)?.with_group(group.clone()))
        })
        .collect()
}
