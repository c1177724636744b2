use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is singular or numerically singular ({0})")]
    Singular(String),

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below -1e-10")]
    NotPsd { eigenvalue: f64 },

    #[error("matrix is not orthogonal: defect {defect:e}")]
    NotOrthogonal { defect: f64 },

    #[error("zero diagonal entry at row {row}; Jacobi splitting undefined")]
    ZeroDiagonal { row: usize },

    #[error("block encoding requires spectral norm <= 1, got {norm}")]
    Normalization { norm: f64 },

    #[error("degenerate encoding: {0}")]
    Degenerate(String),

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitRange { index: usize, n_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("post-selection failed: success probability {probability:e} below 1e-14")]
    PostSelection { probability: f64 },

    #[error("capacity exceeded: {what} needs {required}, limit {limit}")]
    Capacity {
        what: String,
        required: usize,
        limit: usize,
    },

    #[error("invalid coefficient c[{index}] = {value}")]
    Coefficient { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("matrix market parse error at line {line}: {message}")]
    MatrixMarket { line: usize, message: String },

    #[error("oracle disagreement: {0}")]
    Oracle(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
