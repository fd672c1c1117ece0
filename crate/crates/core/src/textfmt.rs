//! Shared helpers for the line-oriented text file formats.

use std::path::Path;

use crate::error::{Error, Result};

/// Formats a real with 17 significant digits, `%.17g` style, so that parsing
/// the text back yields the identical `f64`.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn parse_real(token: &str, path: &Path, line: usize) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| Error::malformed(path, line, format!("expected a real, found {token:?}")))?;
    if !v.is_finite() {
        return Err(Error::NaNOrInf {
            path: path.to_path_buf(),
            line,
        });
    }
    Ok(v)
}

pub fn parse_int<T: std::str::FromStr>(token: &str, path: &Path, line: usize) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::malformed(path, line, format!("expected an integer, found {token:?}")))
}

/// Looks up `key=<value>` among whitespace-separated header tokens.
pub fn header_field<'a>(tokens: &[&'a str], key: &str, path: &Path, line: usize) -> Result<&'a str> {
    tokens
        .iter()
        .find_map(|t| t.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
        .ok_or_else(|| Error::malformed(path, line, format!("missing header field {key}=")))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
