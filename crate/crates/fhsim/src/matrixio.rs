//! Coordinate text dumps of sparse matrices: header `n n nnz`, then one
//! `i j value` line per stored entry with 0-based indices.

use std::fmt::Write as _;
use std::path::Path;

use fhsim_core::sparse::CsrMatrix;

use crate::error::{Error, Result};

pub fn format_matrix(a: &CsrMatrix) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", a.dim(), a.dim(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{i} {j} {v}");
    }
    s
}

pub fn parse_matrix(text: &str) -> Result<CsrMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (l, header) = lines.next().ok_or_else(|| Error::parse(1, "empty matrix file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let num = |line: usize, s: &str| s.parse::<usize>().map_err(|_| Error::parse(line, format!("invalid count `{s}`")));
    if h.len() != 3 {
        return Err(Error::parse(l + 1, "header must be `n n nnz`"));
    }
    let (n, m, nnz) = (num(l + 1, h[0])?, num(l + 1, h[1])?, num(l + 1, h[2])?);
    if n != m {
        return Err(Error::parse(l + 1, "matrix must be square"));
    }
    let mut triplets = Vec::with_capacity(nnz);
    for (l, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::parse(l + 1, "entry must be `i j value`"));
        }
        let (i, j) = (num(l + 1, f[0])?, num(l + 1, f[1])?);
        let v: f64 = f[2].parse().map_err(|_| Error::parse(l + 1, format!("invalid value `{}`", f[2])))?;
        if i >= n || j >= n {
            return Err(Error::parse(l + 1, format!("index out of range for dimension {n}")));
        }
        triplets.push((i, j, v));
    }
    if triplets.len() != nnz {
        return Err(Error::parse(text.lines().count(), format!("expected {nnz} entries, found {}", triplets.len())));
    }
    Ok(CsrMatrix::from_triplets(n, &triplets)?)
}

pub fn write_matrix(a: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_matrix(a)).map_err(|e| Error::io(path, e))
}
