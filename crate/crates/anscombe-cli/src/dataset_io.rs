//! Dataset CSV reading and writing.
//!
//! Format: header `x,y`, one pair per line, values printed with up to 12
//! significant digits. Reading a written file recovers every value to the
//! last printed digit, and re-writing what was read reproduces the file
//! byte for byte.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use anscombe::DatasetPair;

const SIG_DIGITS: usize = 12;

/// Formats with up to `sig` significant digits, trimming trailing zeros.
/// Mirrors printf's `%g` selection between fixed and scientific notation.
pub fn fmt_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp_text) = sci.split_once('e').expect("scientific format has exponent");
    let exp: i32 = exp_text.parse().expect("valid exponent");
    if exp >= -4 && exp < sig as i32 {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        let trimmed = if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.')
        } else {
            &fixed
        };
        if trimmed == "-0" {
            "0".to_string()
        } else {
            trimmed.to_string()
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}

pub fn dataset_to_csv(d: &DatasetPair) -> String {
    let mut out = String::from("x,y\n");
    for (x, y) in d.points() {
        out.push_str(&fmt_sig(x, SIG_DIGITS));
        out.push(',');
        out.push_str(&fmt_sig(y, SIG_DIGITS));
        out.push('\n');
    }
    out
}

pub fn write_dataset(path: &Path, d: &DatasetPair) -> Result<()> {
    std::fs::write(path, dataset_to_csv(d))
        .with_context(|| format!("cannot write {}", path.display()))
}

pub fn parse_dataset_csv(text: &str) -> Result<DatasetPair> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "x,y" => {}
        Some((_, header)) => bail!("line 1: expected header 'x,y', found '{}'", header.trim()),
        None => bail!("line 1: empty file"),
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let (x_text, y_text) = line
            .split_once(',')
            .ok_or_else(|| anyhow!("line {lineno}: expected two comma-separated numbers"))?;
        let x: f64 = x_text
            .trim()
            .parse()
            .map_err(|_| anyhow!("line {lineno}: bad x value '{}'", x_text.trim()))?;
        let y: f64 = y_text
            .trim()
            .parse()
            .map_err(|_| anyhow!("line {lineno}: bad y value '{}'", y_text.trim()))?;
        xs.push(x);
        ys.push(y);
    }
    DatasetPair::new(xs, ys).map_err(|e| anyhow!("invalid dataset: {e}"))
}

pub fn read_dataset(path: &Path) -> Result<DatasetPair> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse_dataset_csv(&text).with_context(|| format!("in {}", path.display()))
}
