//! Finite-difference discretisations producing one linear system per timestep.

mod burgers;
mod euler;

pub use burgers::{burgers_step_system, BurgersProblem, TimeFunction};
pub use euler::{euler_operator, euler_step_system, Euler2DProblem, EulerBoundary, EulerFields};

use crate::error::{Error, Result};
use crate::numkit::{CsrMatrix, DenseMatrix, LinearOperator};

/// System matrix in whichever storage the producer chose.
#[derive(Debug, Clone)]
pub enum SystemMatrix {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
}

impl SystemMatrix {
    pub fn dim(&self) -> usize {
        match self {
            SystemMatrix::Dense(m) => m.rows(),
            SystemMatrix::Sparse(m) => m.dim(),
        }
    }

    pub fn to_csr(&self) -> Result<CsrMatrix> {
        match self {
            SystemMatrix::Dense(m) => CsrMatrix::from_dense(m),
            SystemMatrix::Sparse(m) => Ok(m.clone()),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            SystemMatrix::Dense(m) => m.clone(),
            SystemMatrix::Sparse(m) => m.to_dense(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SystemMatrix::Dense(m) => LinearOperator::apply(m, x),
            SystemMatrix::Sparse(m) => m.apply(x),
        }
    }
}

impl From<DenseMatrix> for SystemMatrix {
    fn from(m: DenseMatrix) -> Self {
        SystemMatrix::Dense(m)
    }
}

impl From<CsrMatrix> for SystemMatrix {
    fn from(m: CsrMatrix) -> Self {
        SystemMatrix::Sparse(m)
    }
}

/// `A x = b`, optionally with a known solution.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: SystemMatrix,
    pub rhs: Vec<f64>,
    pub reference: Option<Vec<f64>>,
}

impl LinearSystem {
    pub fn new(matrix: impl Into<SystemMatrix>, rhs: Vec<f64>) -> Result<Self> {
        let matrix = matrix.into();
        if let SystemMatrix::Dense(m) = &matrix {
            if !m.is_square() {
                return Err(Error::Dimension(format!(
                    "system matrix must be square, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if rhs.len() != matrix.dim() {
            return Err(Error::Dimension(format!(
                "matrix dimension {} but right-hand side has {} entries",
                matrix.dim(),
                rhs.len()
            )));
        }
        Ok(Self {
            matrix,
            rhs,
            reference: None,
        })
    }

    pub fn with_reference(mut self, x: Vec<f64>) -> Self {
        self.reference = Some(x);
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Solve by dense LU, caching nothing.
    pub fn solve_direct(&self) -> Result<Vec<f64>> {
        crate::numkit::solve_direct(&self.matrix.to_dense(), &self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    /// `|a_ii| >= Σ_{j≠i} |a_ij|` on every row.
    pub dominant: bool,
    /// `max_i Σ_{j≠i}|a_ij| / |a_ii|` (infinite when a diagonal entry is zero).
    pub worst_row_ratio: f64,
    pub worst_row: usize,
    pub zero_diagonal_rows: Vec<usize>,
}

impl DominanceReport {
    /// Dominant with at least one row holding equality.
    pub fn is_weak(&self) -> bool {
        self.dominant && self.worst_row_ratio >= 1.0 - 1e-14
    }
}

pub fn check_diagonal_dominance(a: &SystemMatrix) -> Result<DominanceReport> {
    let csr = a.to_csr()?;
    let n = csr.dim();
    let mut worst = 0.0f64;
    let mut worst_row = 0;
    let mut zero_rows = Vec::new();
    for i in 0..n {
        let (mut diag, mut off) = (0.0f64, 0.0f64);
        for (j, v) in csr.row_entries(i) {
            if j == i {
                diag = v.abs();
            } else {
                off += v.abs();
            }
        }
        let ratio = if diag == 0.0 {
            zero_rows.push(i);
            f64::INFINITY
        } else {
            off / diag
        };
        if ratio > worst {
            worst = ratio;
            worst_row = i;
        }
    }
    Ok(DominanceReport {
        dominant: zero_rows.is_empty() && worst <= 1.0 + 1e-14,
        worst_row_ratio: worst,
        worst_row,
        zero_diagonal_rows: zero_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::tridiagonal;

    #[test]
    fn dominance_examples() {
        let r = check_diagonal_dominance(&DenseMatrix::identity(4).into()).unwrap();
        assert!(r.dominant && r.worst_row_ratio == 0.0);

        let r = check_diagonal_dominance(&tridiagonal(6, -1.0, 2.0, -1.0).into()).unwrap();
        assert!(r.dominant && r.is_weak());
        assert_eq!(r.worst_row_ratio, 1.0);

        let r = check_diagonal_dominance(&tridiagonal(6, -1.0, 1.5, -1.0).into()).unwrap();
        assert!(!r.dominant);
        assert!((r.worst_row_ratio - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_diagonal_is_flagged() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let r = check_diagonal_dominance(&m.into()).unwrap();
        assert!(!r.dominant);
        assert_eq!(r.zero_diagonal_rows, vec![0]);
        assert!(r.worst_row_ratio.is_infinite());
    }

    #[test]
    fn system_shape_validation() {
        assert!(LinearSystem::new(DenseMatrix::zeros(2, 3), vec![0.0; 2]).is_err());
        assert!(LinearSystem::new(DenseMatrix::identity(2), vec![0.0; 3]).is_err());
    }
}
