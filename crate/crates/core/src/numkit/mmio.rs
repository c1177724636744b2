//! Matrix Market reader and writer (real / integer / pattern fields,
//! coordinate and array layouts, general / symmetric / skew-symmetric).

use std::fs;
use std::io::Write;
use std::path::Path;

use super::dense::DenseMatrix;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Entries of a parsed Matrix Market file.
#[derive(Debug, Clone)]
pub struct MarketData {
    pub rows: usize,
    pub cols: usize,
    /// Zero-based `(row, col, value)`, with symmetric halves expanded.
    pub entries: Vec<(usize, usize, f64)>,
}

impl MarketData {
    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    pub fn to_csr(&self) -> Result<CsrMatrix> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!(
                "operator must be square, file is {}x{}",
                self.rows, self.cols
            )));
        }
        CsrMatrix::from_triplets(self.rows, &self.entries)
    }

    /// Interpret an `n x 1` (or `1 x n`) file as a vector.
    pub fn to_vector(&self) -> Result<Vec<f64>> {
        if self.cols != 1 && self.rows != 1 {
            return Err(Error::Dimension(format!(
                "expected a vector, file is {}x{}",
                self.rows, self.cols
            )));
        }
        let mut v = vec![0.0; self.rows.max(self.cols)];
        for &(i, j, x) in &self.entries {
            v[i.max(j)] += x;
        }
        Ok(v)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::MatrixMarket {
        line,
        message: message.into(),
    }
}

pub fn parse_matrix_market(text: &str) -> Result<MarketData> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, banner) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = banner.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(ln, "missing '%%MatrixMarket matrix' banner"));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(ln, format!("unsupported layout '{other}'"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(ln, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_err(ln, format!("unsupported symmetry '{other}'"))),
    };
    if layout == Layout::Array && field == Field::Pattern {
        return Err(parse_err(ln, "pattern field requires coordinate layout"));
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (ln, size_line) = body.next().ok_or_else(|| parse_err(ln, "missing size line"))?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad size '{t}'"))))
        .collect::<Result<_>>()?;
    let (rows, cols, expected) = match (layout, sizes.as_slice()) {
        (Layout::Coordinate, [r, c, nnz]) => (*r, *c, *nnz),
        (Layout::Array, [r, c]) => {
            let count = match symmetry {
                Symmetry::General => r * c,
                Symmetry::Symmetric => r * (r + 1) / 2,
                Symmetry::SkewSymmetric => r * r.saturating_sub(1) / 2,
            };
            (*r, *c, count)
        }
        _ => return Err(parse_err(ln, "malformed size line")),
    };
    if symmetry != Symmetry::General && rows != cols {
        return Err(parse_err(ln, "symmetric storage requires a square matrix"));
    }

    let parse_value = |ln: usize, tok: Option<&str>| -> Result<f64> {
        let tok = tok.ok_or_else(|| parse_err(ln, "missing value"))?;
        let v: f64 = tok
            .parse()
            .map_err(|_| parse_err(ln, format!("bad value '{tok}'")))?;
        if !v.is_finite() {
            return Err(parse_err(ln, "non-finite value"));
        }
        Ok(v)
    };

    let mut entries = Vec::with_capacity(expected);
    let mut push = |i: usize, j: usize, v: f64| {
        entries.push((i, j, v));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => entries.push((j, i, v)),
                Symmetry::SkewSymmetric => entries.push((j, i, -v)),
            }
        }
    };

    let mut count = 0usize;
    match layout {
        Layout::Coordinate => {
            for (ln, line) in body.by_ref().take(expected) {
                let mut toks = line.split_whitespace();
                let mut index = |name: &str, bound: usize| -> Result<usize> {
                    let t = toks
                        .next()
                        .ok_or_else(|| parse_err(ln, format!("missing {name} index")))?;
                    let k: usize = t
                        .parse()
                        .map_err(|_| parse_err(ln, format!("bad {name} index '{t}'")))?;
                    if k == 0 || k > bound {
                        return Err(parse_err(ln, format!("{name} index {k} out of range")));
                    }
                    Ok(k - 1)
                };
                let i = index("row", rows)?;
                let j = index("column", cols)?;
                let v = match field {
                    Field::Pattern => 1.0,
                    _ => parse_value(ln, toks.next())?,
                };
                if symmetry == Symmetry::SkewSymmetric && i == j {
                    return Err(parse_err(ln, "skew-symmetric diagonal entry"));
                }
                push(i, j, v);
                count += 1;
            }
        }
        Layout::Array => {
            // Column-major; symmetric variants list the lower triangle only.
            let mut slots = Vec::with_capacity(expected);
            for j in 0..cols {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric => j,
                    Symmetry::SkewSymmetric => j + 1,
                };
                for i in start..rows {
                    slots.push((i, j));
                }
            }
            for ((ln, line), (i, j)) in body.by_ref().zip(slots) {
                let v = parse_value(ln, line.split_whitespace().next())?;
                if v != 0.0 {
                    push(i, j, v);
                }
                count += 1;
            }
        }
    }
    if count != expected {
        return Err(parse_err(
            0,
            format!("expected {expected} entries, found {count}"),
        ));
    }
    Ok(MarketData {
        rows,
        cols,
        entries,
    })
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<MarketData> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(&text)
}

/// Coordinate / real / general; values printed with round-trip precision.
pub fn format_coordinate(m: &CsrMatrix) -> String {
    use super::sparse::LinearOperator;
    let mut s = String::new();
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    s.push_str(&format!("{} {} {}\n", m.dim(), m.dim(), m.nnz()));
    for (i, j, v) in m.iter() {
        s.push_str(&format!("{} {} {:e}\n", i + 1, j + 1, v));
    }
    s
}

/// Array / real / general, column-major.
pub fn format_array(m: &DenseMatrix) -> String {
    let mut s = String::new();
    s.push_str("%%MatrixMarket matrix array real general\n");
    s.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            s.push_str(&format!("{:e}\n", m[(i, j)]));
        }
    }
    s
}

pub fn format_vector(v: &[f64]) -> String {
    let m = DenseMatrix::from_row_major(v.len(), 1, v.to_vec()).expect("column vector");
    format_array(&m)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn write_coordinate(path: impl AsRef<Path>, m: &CsrMatrix) -> Result<()> {
    write_text(path.as_ref(), &format_coordinate(m))
}

pub fn write_array(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    write_text(path.as_ref(), &format_array(m))
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    write_text(path.as_ref(), &format_vector(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::dense::tridiagonal;

    #[test]
    fn symmetric_coordinate_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 4\n1 1 2\n2 1 -1\n2 2 2\n3 3 5.5\n";
        let m = parse_matrix_market(text).unwrap().to_dense();
        assert_eq!(m[(0, 1)], -1.0);
        assert_eq!(m[(1, 0)], -1.0);
        assert_eq!(m[(2, 2)], 5.5);
    }

    #[test]
    fn skew_and_pattern() {
        let text = "%%MatrixMarket matrix coordinate integer skew-symmetric\n2 2 1\n2 1 3\n";
        let m = parse_matrix_market(text).unwrap().to_dense();
        assert_eq!((m[(1, 0)], m[(0, 1)]), (3.0, -3.0));
        let text = "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 2\n2 1\n";
        let m = parse_matrix_market(text).unwrap().to_dense();
        assert_eq!(m.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn array_vector() {
        let text = "%%MatrixMarket matrix array real general\n3 1\n1.5\n0\n-2\n";
        let v = parse_matrix_market(text).unwrap().to_vector().unwrap();
        assert_eq!(v, vec![1.5, 0.0, -2.0]);
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            "",
            "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n",
            "%%MatrixMarket matrix coordinate real symmetric\n2 3 0\n",
        ] {
            assert!(parse_matrix_market(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn write_then_read() {
        let a = CsrMatrix::from_dense(&tridiagonal(5, -1.0, 2.0, -1.0)).unwrap();
        let back = parse_matrix_market(&format_coordinate(&a)).unwrap().to_csr().unwrap();
        assert_eq!(back, a);
        let d = tridiagonal(3, 0.25, -1.0 / 3.0, 7.0);
        let back = parse_matrix_market(&format_array(&d)).unwrap().to_dense();
        assert_eq!(back, d);
    }
}
