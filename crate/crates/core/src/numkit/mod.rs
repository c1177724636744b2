//! Dense and sparse linear-algebra kernels.

pub mod decomp;
pub mod dense;
pub mod givens;
pub mod mmio;
pub mod sparse;

pub use decomp::{
    condition_number, operator_norm, psd_sqrt, singular_values, solve_direct, spectral_norm,
    spectral_radius_dense, spectral_radius_power, symmetric_eigen,
};
pub use dense::{
    dot, fidelity_error, max_abs_diff, norm2, normalized, relative_error, tridiagonal,
    DenseMatrix, Scalar,
};
pub use givens::{givens_qr, givens_reduce_vector, GivensQr, GivensRotation};
pub use sparse::{
    CsrMatrix, DiagonalOperator, LinearOperator, ScaledOperator, SharedOperator, Structure,
};

/// Spectral norm of an operator: exact dense route for small systems,
/// Lanczos for everything else.
pub fn spectral_norm_of(op: &dyn LinearOperator) -> f64 {
    const DENSE_LIMIT: usize = 64;
    if op.dim() <= DENSE_LIMIT {
        spectral_norm(&op.to_dense()).expect("operator matrices are finite")
    } else {
        operator_norm(op)
    }
}
