use std::fmt;
use std::sync::Arc;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Structural hint carried alongside an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    General,
    Diagonal,
    Tridiagonal,
    Banded { lower: usize, upper: usize },
    Block { blocks: usize },
}

/// Square real linear map applied by matvec only.
pub trait LinearOperator: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]);

    fn structure(&self) -> Structure {
        Structure::General
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }

    fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_transpose_into(x, &mut y);
        y
    }

    /// Dense copy, built column by column.
    fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut out = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e);
            for (i, v) in col.into_iter().enumerate() {
                out[(i, j)] = v;
            }
            e[j] = 0.0;
        }
        out
    }
}

pub type SharedOperator = Arc<dyn LinearOperator>;

/// Compressed sparse row matrix (square).
#[derive(Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    structure: Structure,
}

impl CsrMatrix {
    /// Duplicate triplets are summed; explicit zeros are dropped.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::Dimension(format!(
                    "entry ({i}, {j}) outside {dim}x{dim}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            sorted.push((i, j, v));
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = Self {
            dim,
            row_ptr,
            col_idx,
            values,
            structure: Structure::General,
        };
        m.drop_zeros();
        m.structure = m.detect_structure();
        Ok(m)
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "expected square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let mut trip = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] != 0.0 {
                    trip.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(n, &trip)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let trip: Vec<_> = diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        Self::from_triplets(diag.len(), &trip).expect("diagonal triplets are valid")
    }

    pub fn with_structure(mut self, structure: Structure) -> Self {
        self.structure = structure;
        self
    }

    fn drop_zeros(&mut self) {
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.values[p] != 0.0 {
                    col_idx.push(self.col_idx[p]);
                    values.push(self.values[p]);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    fn detect_structure(&self) -> Structure {
        let (mut lo, mut hi) = (0usize, 0usize);
        for (i, j, _) in self.iter() {
            if j < i {
                lo = lo.max(i - j);
            } else {
                hi = hi.max(j - i);
            }
        }
        match (lo, hi) {
            (0, 0) => Structure::Diagonal,
            (l, u) if l <= 1 && u <= 1 => Structure::Tridiagonal,
            (l, u) if l + u + 1 < self.dim => Structure::Banded { lower: l, upper: u },
            _ => Structure::General,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (i, self.col_idx[p], self.values[p]))
        })
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col_idx[p], self.values[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row_entries(i)
            .find(|&(c, _)| c == j)
            .map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Keep entries for which `keep(row, col)` holds.
    pub fn filter(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        let trip: Vec<_> = self.iter().filter(|&(i, j, _)| keep(i, j)).collect();
        Self::from_triplets(self.dim, &trip).expect("subset of valid triplets")
    }

    pub fn strictly_lower(&self) -> Self {
        self.filter(|i, j| j < i)
    }

    pub fn strictly_upper(&self) -> Self {
        self.filter(|i, j| j > i)
    }

    pub fn off_diagonal(&self) -> Self {
        self.filter(|i, j| i != j)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `diag(d) · self`.
    pub fn row_scaled(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[p] *= d[i];
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, rhs.dim)));
        }
        let trip: Vec<_> = self.iter().chain(rhs.iter()).collect();
        Self::from_triplets(self.dim, &trip)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim, "matvec dimension");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yi = acc;
        }
    }

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim, "matvec dimension");
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[p]] += self.values[p] * x[i];
            }
        }
    }

    fn structure(&self) -> Structure {
        self.structure
    }

    fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            out[(i, j)] = v;
        }
        out
    }
}

impl fmt::Debug for CsrMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CsrMatrix")
            .field("dim", &self.dim)
            .field("nnz", &self.nnz())
            .field("structure", &self.structure)
            .finish()
    }
}

/// Diagonal operator `diag(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator(pub Vec<f64>);

impl LinearOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, d), xi) in y.iter_mut().zip(&self.0).zip(x) {
            *yi = d * xi;
        }
    }
    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        self.apply_into(x, y)
    }
    fn structure(&self) -> Structure {
        Structure::Diagonal
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = super::dense::dot(self.row(i), x);
        }
    }
    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            for (yj, a) in y.iter_mut().zip(self.row(i)) {
                *yj += a * xi;
            }
        }
    }
    fn to_dense(&self) -> DenseMatrix {
        self.clone()
    }
}

/// `scale · inner`.
#[derive(Debug, Clone)]
pub struct ScaledOperator {
    pub scale: f64,
    pub inner: SharedOperator,
}

impl LinearOperator for ScaledOperator {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply_into(x, y);
        y.iter_mut().for_each(|v| *v *= self.scale);
    }
    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply_transpose_into(x, y);
        y.iter_mut().for_each(|v| *v *= self.scale);
    }
    fn structure(&self) -> Structure {
        self.inner.structure()
    }
}
