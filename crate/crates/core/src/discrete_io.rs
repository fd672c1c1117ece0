//! Text format for sets of discrete sequences.
//!
//! ```text
//! dfq-sequences v1 N=<count> R=<rows> alphabet=<size>
//! seq<TAB><id><TAB><label><TAB><group><TAB><n>
//! <row 0 symbols, space separated>
//! ...
//! <row R-1 symbols>
//! ```
//!
//! The group column is empty when a sequence has no group.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sequence::{DiscreteSequence, Symbol};
use crate::textfmt::{header_field, parse_int, read_text, write_text};

const MAGIC: &str = "dfq-sequences v1";

pub fn discrete_to_text(dataset: &[DiscreteSequence]) -> Result<String> {
    let (dims, alphabet) = match dataset.first() {
        Some(s) => (s.dims(), s.alphabet_size()),
        None => return Err(Error::EmptyDataset),
    };
    let mut out = String::new();
    writeln!(out, "{MAGIC} N={} R={dims} alphabet={alphabet}", dataset.len()).unwrap();
    for s in dataset {
        if s.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: s.dims(),
            });
        }
        if s.alphabet_size() != alphabet {
            return Err(Error::AlphabetMismatch {
                left: alphabet,
                right: s.alphabet_size(),
            });
        }
        writeln!(
            out,
            "seq\t{}\t{}\t{}\t{}",
            s.id,
            s.label,
            s.group.as_deref().unwrap_or(""),
            s.len()
        )
        .unwrap();
        for row in s.rows() {
            let symbols: Vec<String> = row.iter().map(u32::to_string).collect();
            writeln!(out, "{}", symbols.join(" ")).unwrap();
        }
    }
    Ok(out)
}

pub fn parse_discrete(text: &str, path: &Path) -> Result<Vec<DiscreteSequence>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines.next().ok_or_else(|| Error::malformed(path, 1, "empty file"))?;
    if !header.starts_with(MAGIC) {
        return Err(Error::malformed(path, ln, format!("expected `{MAGIC}` header")));
    }
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let count: usize = parse_int(header_field(&tokens, "N", path, ln)?, path, ln)?;
    let dims: usize = parse_int(header_field(&tokens, "R", path, ln)?, path, ln)?;
    let alphabet: u32 = parse_int(header_field(&tokens, "alphabet", path, ln)?, path, ln)?;

    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::malformed(path, ln, "missing sequence record"))?;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 || cols[0] != "seq" {
            return Err(Error::malformed(
                path,
                ln,
                "expected `seq<TAB>id<TAB>label<TAB>group<TAB>n`",
            ));
        }
        let n: usize = parse_int(cols[4], path, ln)?;
        let mut rows = Vec::with_capacity(dims);
        for _ in 0..dims {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::malformed(path, ln, "missing symbol row"))?;
            let row = line
                .split_whitespace()
                .map(|t| parse_int::<Symbol>(t, path, ln))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(Error::malformed(
                    path,
                    ln,
                    format!("expected {n} symbols, found {}", row.len()),
                ));
            }
            rows.push(row);
        }
        let group = (!cols[3].is_empty()).then(|| cols[3].to_string());
        out.push(DiscreteSequence::new(cols[1], cols[2], alphabet, rows)?.with_group(group));
    }
    if let Some((ln, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::malformed(path, ln, "trailing content after last record"));
    }
    Ok(out)
}

pub fn save_discrete(dataset: &[DiscreteSequence], path: &Path) -> Result<()> {
    write_text(path, &discrete_to_text(dataset)?)
}

pub fn load_discrete(path: &Path) -> Result<Vec<DiscreteSequence>> {
    parse_discrete(&read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_empty_sequence() {
        let data = vec![
            DiscreteSequence::new("a", "x y", 5, vec![vec![0, 4, 2], vec![1, 1, 1]])
                .unwrap()
                .with_group(Some("g1".into())),
            DiscreteSequence::new("b", "z", 5, vec![vec![], vec![]]).unwrap(),
        ];
        let text = discrete_to_text(&data).unwrap();
        assert!(text.starts_with("dfq-sequences v1 N=2 R=2 alphabet=5\nseq\ta\tx y\tg1\t3\n0 4 2\n"));
        assert_eq!(parse_discrete(&text, Path::new("d")).unwrap(), data);
    }

    #[test]
    fn rejects_bad_input() {
        let p = Path::new("d");
        assert!(parse_discrete("nope\n", p).is_err());
        assert!(parse_discrete("dfq-sequences v1 N=1 R=1 alphabet=3\nseq\ta\tx\t\t2\n0\n", p).is_err());
        assert!(matches!(
            parse_discrete("dfq-sequences v1 N=1 R=1 alphabet=3\nseq\ta\tx\t\t1\n3\n", p),
            Err(Error::SymbolOutOfRange { .. })
        ));
        assert!(parse_discrete("dfq-sequences v1 N=1 R=1 alphabet=3\n", p).is_err());
        assert!(matches!(discrete_to_text(&[]), Err(Error::EmptyDataset)));
    }
}
