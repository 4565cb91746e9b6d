//! Plain-text and CSV forms of truncated Fock operators.
//!
//! Text layout, one item per line (blank lines and `#` comments ignored):
//!
//! ```text
//! fock-operator
//! n 1
//! l_max 2
//! enumeration graded-lex
//! rows 3
//! cols 3
//! re im re im re im      <- one line per row, column order
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockOperator, ENUMERATION};

const MAGIC: &str = "fock-operator";
/// Refuse headers describing absurd sizes before allocating.
const MAX_DIM: usize = 1 << 14;

/// Shortest text that round-trips an f64 exactly (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn encode_operator(op: &FockOperator) -> String {
    let mut s = String::new();
    let b = &op.basis;
    let _ = writeln!(s, "{MAGIC}\nn {}\nl_max {}\nenumeration {ENUMERATION}\nrows {}\ncols {}", b.n, b.l_max, b.len(), b.len());
    for r in 0..op.entries.nrows() {
        let row: Vec<String> = (0..op.entries.ncols())
            .map(|c| {
                let z = op.entries[(r, c)];
                format!("{} {}", fmt_f64(z.re), fmt_f64(z.im))
            })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn decode_operator(text: &str) -> Result<FockOperator> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| lines.next().ok_or_else(|| parse_err(0, format!("unexpected end of input, expected {what}")));

    let (ln, magic) = next("header")?;
    if magic != MAGIC {
        return Err(parse_err(ln, format!("expected `{MAGIC}`")));
    }
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (ln, l) = next(key)?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(parse_err(ln, format!("expected `{key} <value>`")));
        }
        let v = parts.next().ok_or_else(|| parse_err(ln, format!("missing value for `{key}`")))?;
        if parts.next().is_some() {
            return Err(parse_err(ln, format!("trailing tokens after `{key}`")));
        }
        Ok((ln, v.to_string()))
    };
    let num = |(ln, v): (usize, String), key: &str| -> Result<usize> { v.parse::<usize>().map_err(|_| parse_err(ln, format!("`{key}` must be a non-negative integer"))) };
    let n = num(field("n")?, "n")?;
    let l_max = num(field("l_max")?, "l_max")?;
    let (eln, enumeration) = field("enumeration")?;
    if enumeration != ENUMERATION {
        return Err(parse_err(eln, format!("unsupported enumeration `{enumeration}`")));
    }
    let rows_f = field("rows")?;
    let rln = rows_f.0;
    let rows = num(rows_f, "rows")?;
    let cols = num(field("cols")?, "cols")?;
    if n == 0 || n > 8 {
        return Err(parse_err(rln, "n must lie in 1..=8"));
    }
    if rows > MAX_DIM || cols > MAX_DIM || l_max > 256 {
        return Err(parse_err(rln, "operator dimensions too large"));
    }
    let dim = crate::fock::degree_dim(n + 1, l_max);
    if !(dim <= MAX_DIM as f64) {
        return Err(parse_err(rln, "basis too large"));
    }
    let basis = FockBasis::new(n, l_max)?;
    if rows != basis.len() || cols != basis.len() {
        return Err(parse_err(rln, format!("basis (n={n}, L={l_max}) has {} elements, header says {rows}×{cols}", basis.len())));
    }
    drop(field);
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        let (ln, l) = next("matrix row")?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 * cols {
            return Err(parse_err(ln, format!("row {r}: expected {} numbers, found {}", 2 * cols, toks.len())));
        }
        for c in 0..cols {
            let re: f64 = toks[2 * c].parse().map_err(|_| parse_err(ln, format!("row {r}, column {c}: bad real part")))?;
            let im: f64 = toks[2 * c + 1].parse().map_err(|_| parse_err(ln, format!("row {r}, column {c}: bad imaginary part")))?;
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after the matrix"));
    }
    FockOperator::from_matrix(&basis, m)
}

/// CSV with one line per entry: row, col, |β|, |α|, β, α, re, im.
pub fn operator_csv(op: &FockOperator) -> String {
    let mut s = String::from("row,col,deg_beta,deg_alpha,beta,alpha,re,im\n");
    let idx = op.basis.indices();
    let label = |i: usize| idx[i].0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    for r in 0..op.entries.nrows() {
        for c in 0..op.entries.ncols() {
            let z = op.entries[(r, c)];
            let _ = writeln!(s, "{r},{c},{},{},{},{},{},{}", op.basis.degree_of(r), op.basis.degree_of(c), label(r), label(c), fmt_f64(z.re), fmt_f64(z.im));
        }
    }
    s
}

/// Inverse of [`operator_csv`] given the basis.
pub fn operator_from_csv(text: &str, basis: &FockBasis) -> Result<FockOperator> {
    let mut m = DMatrix::zeros(basis.len(), basis.len());
    let mut seen = 0usize;
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let t: Vec<&str> = line.split(',').collect();
        if t.len() != 8 {
            return Err(parse_err(i + 1, "expected 8 comma-separated fields"));
        }
        let r: usize = t[0].parse().map_err(|_| parse_err(i + 1, "bad row"))?;
        let c: usize = t[1].parse().map_err(|_| parse_err(i + 1, "bad col"))?;
        if r >= basis.len() || c >= basis.len() {
            return Err(parse_err(i + 1, "index outside the basis"));
        }
        let re: f64 = t[6].parse().map_err(|_| parse_err(i + 1, "bad re"))?;
        let im: f64 = t[7].parse().map_err(|_| parse_err(i + 1, "bad im"))?;
        m[(r, c)] = Complex64::new(re, im);
        seen += 1;
    }
    if seen != basis.len() * basis.len() {
        return Err(parse_err(0, format!("expected {} entries, found {seen}", basis.len() * basis.len())));
    }
    FockOperator::from_matrix(basis, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FockOperator {
        let b = FockBasis::new(2, 2).unwrap();
        let m = DMatrix::from_fn(b.len(), b.len(), |r, c| Complex64::new(r as f64 / 3.0, -(c as f64).sqrt() * 1e-300));
        FockOperator::from_matrix(&b, m).unwrap()
    }

    #[test]
    fn text_round_trip_is_exact() {
        let op = sample();
        assert_eq!(decode_operator(&encode_operator(&op)).unwrap(), op);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let op = sample();
        assert_eq!(operator_from_csv(&operator_csv(&op), &op.basis).unwrap(), op);
    }

    #[test]
    fn decode_reports_lines() {
        let mut t = encode_operator(&sample());
        t = t.replacen("rows 6", "rows 7", 1);
        match decode_operator(&t) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        assert!(decode_operator("").is_err());
        assert!(decode_operator("fock-operator\nn 99999999999999999999").is_err());
    }
}
