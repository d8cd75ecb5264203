//! Matrix Market coordinate (sparse) and array (dense vector) files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::sparse::SparseMatrix;
use crate::scalar::Real;

pub fn write_matrix<T: Real>(path: impl AsRef<Path>, m: &SparseMatrix<T>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general").map_err(io)?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz()).map_err(io)?;
    for (i, j, v) in m.iter() {
        writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v.as_f64()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_vector<T: Real>(path: impl AsRef<Path>, v: &[T]) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "%%MatrixMarket matrix array real general").map_err(io)?;
    writeln!(w, "{} 1", v.len()).map_err(io)?;
    for x in v {
        writeln!(w, "{:.17e}", x.as_f64()).map_err(io)?;
    }
    w.flush().map_err(io)
}

struct Lines {
    path: std::path::PathBuf,
    inner: std::iter::Enumerate<std::io::Lines<BufReader<File>>>,
    header: String,
}

impl Lines {
    fn open(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut inner = BufReader::new(f).lines().enumerate();
        let header = match inner.next() {
            Some((_, Ok(l))) => l,
            Some((_, Err(e))) => return Err(Error::io(path, e)),
            None => String::new(),
        };
        let mut s = Self {
            path: path.to_path_buf(),
            inner,
            header,
        };
        if !s.header.starts_with("%%MatrixMarket") {
            return Err(s.err(1, "missing %%MatrixMarket banner"));
        }
        s.header = s.header.to_lowercase();
        Ok(s)
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            msg: msg.into(),
        }
    }

    /// Next non-comment, non-blank line with its 1-based number.
    fn next_data(&mut self) -> Result<Option<(usize, String)>> {
        for (i, l) in self.inner.by_ref() {
            let l = l.map_err(|e| Error::io(&self.path, e))?;
            let t = l.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Ok(Some((i + 1, t.to_string())));
        }
        Ok(None)
    }

    fn expect_data(&mut self, what: &str) -> Result<(usize, String)> {
        match self.next_data()? {
            Some(x) => Ok(x),
            None => Err(self.err(0, format!("unexpected end of file, expected {what}"))),
        }
    }
}

fn parse<U: std::str::FromStr>(lines: &Lines, ln: usize, tok: Option<&str>, what: &str) -> Result<U> {
    tok.ok_or_else(|| lines.err(ln, format!("missing {what}")))?
        .parse()
        .map_err(|_| lines.err(ln, format!("malformed {what}")))
}

pub fn read_matrix<T: Real>(path: impl AsRef<Path>) -> Result<SparseMatrix<T>> {
    let mut lines = Lines::open(path.as_ref())?;
    if !lines.header.contains("coordinate") {
        return Err(lines.err(1, "expected coordinate format"));
    }
    let symmetric = lines.header.contains("symmetric");
    let (ln, size) = lines.expect_data("size line")?;
    let mut it = size.split_whitespace();
    let nr: usize = parse(&lines, ln, it.next(), "row count")?;
    let nc: usize = parse(&lines, ln, it.next(), "column count")?;
    let nnz: usize = parse(&lines, ln, it.next(), "entry count")?;
    let mut trip = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let (ln, l) = lines.expect_data("matrix entry")?;
        let mut it = l.split_whitespace();
        let i: usize = parse(&lines, ln, it.next(), "row index")?;
        let j: usize = parse(&lines, ln, it.next(), "column index")?;
        let v: f64 = parse(&lines, ln, it.next(), "value")?;
        if i == 0 || j == 0 || i > nr || j > nc {
            return Err(lines.err(ln, format!("index ({i}, {j}) out of range")));
        }
        trip.push((i - 1, j - 1, T::of(v)));
        if symmetric && i != j {
            trip.push((j - 1, i - 1, T::of(v)));
        }
    }
    SparseMatrix::from_triplets(nr, nc, &trip)
}

pub fn read_vector<T: Real>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let mut lines = Lines::open(path.as_ref())?;
    if !lines.header.contains("array") {
        return Err(lines.err(1, "expected array format"));
    }
    let (ln, size) = lines.expect_data("size line")?;
    let mut it = size.split_whitespace();
    let nr: usize = parse(&lines, ln, it.next(), "row count")?;
    let nc: usize = parse(&lines, ln, it.next(), "column count")?;
    if nc != 1 {
        return Err(lines.err(ln, "expected a single column"));
    }
    let mut v = Vec::with_capacity(nr);
    for _ in 0..nr {
        let (ln, l) = lines.expect_data("vector entry")?;
        let x: f64 = parse(&lines, ln, l.split_whitespace().next(), "value")?;
        v.push(T::of(x));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.mtx");
        let m = SparseMatrix::from_triplets(3, 2, &[(0, 1, 0.1), (2, 0, -1.0 / 3.0), (1, 1, 1e-300)]).unwrap();
        write_matrix(&p, &m).unwrap();
        let back: SparseMatrix<f64> = read_matrix(&p).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn vector_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.mtx");
        let v = vec![std::f64::consts::PI, -2.5e-17, 0.0];
        write_vector(&p, &v).unwrap();
        assert_eq!(read_vector::<f64>(&p).unwrap(), v);
    }

    #[test]
    fn bad_entry_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.mtx");
        std::fs::write(&p, "%%MatrixMarket matrix coordinate real general\n% c\n2 2 1\n1 x 3.0\n").unwrap();
        match read_matrix::<f64>(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }
}
