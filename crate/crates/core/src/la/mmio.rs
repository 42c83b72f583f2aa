//! Matrix Market coordinate (sparse) and array (vector) formats.
//!
//! Values are written with 17 significant digits so that reading a file
//! back reproduces every `f64` bit for bit.

use std::io::{BufRead, Write};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

fn parse_err(message: impl Into<String>) -> Error {
    Error::Parse {
        what: "Matrix Market".into(),
        message: message.into(),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<matrix market stream>", e)
}

pub fn write_matrix_market<W: Write>(w: &mut W, a: &CsrMatrix) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general").map_err(io_err)?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz()).map_err(io_err)?;
    for i in 0..a.nrows() {
        for (j, v) in a.row(i) {
            writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v).map_err(io_err)?;
        }
    }
    Ok(())
}

/// Data lines of a Matrix Market stream after the banner and comments.
fn data_lines<R: BufRead>(r: R, expect: &str) -> Result<Vec<String>> {
    let mut lines = r.lines();
    let banner = lines
        .next()
        .ok_or_else(|| parse_err("empty stream"))?
        .map_err(io_err)?;
    let lower = banner.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix") || !lower.contains(expect) {
        return Err(parse_err(format!("unsupported banner '{banner}'")));
    }
    if !lower.contains("real") || !lower.contains("general") {
        return Err(parse_err(format!(
            "only real general data is supported: '{banner}'"
        )));
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line.map_err(io_err)?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        out.push(t.to_string());
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| parse_err(format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(format!("bad {what}")))
}

pub fn read_matrix_market<R: BufRead>(r: R) -> Result<CsrMatrix> {
    let lines = data_lines(r, "coordinate")?;
    let mut it = lines.iter();
    let size = it.next().ok_or_else(|| parse_err("missing size line"))?;
    let mut tok = size.split_whitespace();
    let nrows: usize = parse(tok.next(), "row count")?;
    let ncols: usize = parse(tok.next(), "column count")?;
    let nnz: usize = parse(tok.next(), "entry count")?;
    let mut trip = Vec::with_capacity(nnz);
    for line in it {
        let mut tok = line.split_whitespace();
        let i: usize = parse(tok.next(), "row index")?;
        let j: usize = parse(tok.next(), "column index")?;
        let v: f64 = parse(tok.next(), "value")?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(parse_err(format!("entry ({i}, {j}) out of range")));
        }
        trip.push((i - 1, j - 1, v));
    }
    if trip.len() != nnz {
        return Err(parse_err(format!(
            "expected {nnz} entries, found {}",
            trip.len()
        )));
    }
    Ok(CsrMatrix::from_triplets(nrows, ncols, &trip))
}

pub fn write_vector<W: Write>(w: &mut W, v: &[f64]) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general").map_err(io_err)?;
    writeln!(w, "{} 1", v.len()).map_err(io_err)?;
    for x in v {
        writeln!(w, "{x:.16e}").map_err(io_err)?;
    }
    Ok(())
}

pub fn read_vector<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let lines = data_lines(r, "array")?;
    let mut it = lines.iter();
    let size = it.next().ok_or_else(|| parse_err("missing size line"))?;
    let mut tok = size.split_whitespace();
    let n: usize = parse(tok.next(), "row count")?;
    let m: usize = parse(tok.next(), "column count")?;
    if m != 1 {
        return Err(parse_err("only single-column arrays are supported"));
    }
    let v = it
        .map(|l| parse::<f64>(Some(l), "value"))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != n {
        return Err(parse_err(format!("expected {n} values, found {}", v.len())));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(entries in proptest::collection::vec((0usize..7, 0usize..5, -1e6f64..1e6), 0..30)) {
            let a = CsrMatrix::from_triplets(7, 5, &entries);
            let mut buf = Vec::new();
            write_matrix_market(&mut buf, &a).unwrap();
            let b = read_matrix_market(buf.as_slice()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn vector_roundtrip(v in proptest::collection::vec(proptest::num::f64::NORMAL, 0..20)) {
            let mut buf = Vec::new();
            write_vector(&mut buf, &v).unwrap();
            prop_assert_eq!(read_vector(buf.as_slice()).unwrap(), v);
        }
    }

    #[test]
    fn rejects_symmetric_banner() {
        let s = "%%MatrixMarket matrix coordinate real symmetric\n1 1 1\n1 1 2.0\n";
        assert!(read_matrix_market(s.as_bytes()).is_err());
    }

    #[test]
    fn skips_comments() {
        let s = "%%MatrixMarket matrix coordinate real general\n% c\n2 2 1\n2 1 -3.5\n";
        let a = read_matrix_market(s.as_bytes()).unwrap();
        assert_eq!(a.get(1, 0), -3.5);
    }
}
