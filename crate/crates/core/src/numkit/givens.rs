//! Givens-rotation QR factorisation.
//!
//! Rotation convention: `G(θ, i, j)` is the identity except on the `(i, j)`
//! plane, where it acts as `[[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`. The
//! half-angle matches the controlled `Ry(θ)` gate that realises it in a
//! circuit, so the stored angle is the gate angle.

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Rotations whose half-angle sine falls below this are dropped.
pub const ZERO_ANGLE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensRotation {
    pub i: usize,
    pub j: usize,
    pub theta: f64,
}

impl GivensRotation {
    pub fn new(i: usize, j: usize, theta: f64) -> Result<Self> {
        if i >= j {
            return Err(Error::Parameter(format!(
                "Givens rotation needs i < j, got ({i}, {j})"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::Parameter("non-finite rotation angle".into()));
        }
        Ok(Self { i, j, theta })
    }

    pub fn cos_sin(&self) -> (f64, f64) {
        let half = 0.5 * self.theta;
        (half.cos(), half.sin())
    }

    /// Dense `dim x dim` matrix of the rotation.
    pub fn matrix(&self, dim: usize) -> DenseMatrix {
        let (c, s) = self.cos_sin();
        let mut g = DenseMatrix::identity(dim);
        g[(self.i, self.i)] = c;
        g[(self.j, self.j)] = c;
        g[(self.i, self.j)] = -s;
        g[(self.j, self.i)] = s;
        g
    }

    /// `M ← Gᵀ M` on rows `i`, `j`.
    fn apply_transpose_left(&self, m: &mut DenseMatrix) {
        let (c, s) = self.cos_sin();
        for col in 0..m.cols() {
            let (a, b) = (m[(self.i, col)], m[(self.j, col)]);
            m[(self.i, col)] = c * a + s * b;
            m[(self.j, col)] = -s * a + c * b;
        }
    }

    /// `v ← G v`.
    pub fn apply_to_vector(&self, v: &mut [f64]) {
        let (c, s) = self.cos_sin();
        let (a, b) = (v[self.i], v[self.j]);
        v[self.i] = c * a - s * b;
        v[self.j] = s * a + c * b;
    }
}

/// Result of [`givens_qr`]: `M = G₁ G₂ ⋯ G_g · diag(residual) · upper`.
#[derive(Debug, Clone)]
pub struct GivensQr {
    pub rotations: Vec<GivensRotation>,
    /// Signs of the triangular factor's diagonal (each ±1).
    pub residual: Vec<f64>,
    /// Upper-triangular factor with non-negative diagonal.
    pub upper: DenseMatrix,
}

impl GivensQr {
    /// Dense product of the factors, for verification.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.upper.rows();
        let mut m = DenseMatrix::from_diagonal(&self.residual)
            .matmul(&self.upper)
            .expect("square factors");
        for rot in self.rotations.iter().rev() {
            m = rot.matrix(n).matmul(&m).expect("square factors");
        }
        m
    }
}

/// Zero the sub-diagonal column by column, pivoting each entry against the
/// diagonal of its column. Entries that are already zero emit no rotation, so
/// banded and diagonal inputs produce short rotation lists.
pub fn givens_qr(m: &DenseMatrix) -> Result<GivensQr> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "givens_qr needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    m.check_finite()?;
    let n = m.rows();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut r = m.clone();
    let mut rotations = Vec::new();
    for col in 0..n {
        for row in col + 1..n {
            let b = r[(row, col)];
            if b.abs() <= ZERO_ANGLE * scale {
                r[(row, col)] = 0.0;
                continue;
            }
            let a = r[(col, col)];
            let phi = b.atan2(a);
            let rot = GivensRotation::new(col, row, 2.0 * phi)?;
            rot.apply_transpose_left(&mut r);
            r[(row, col)] = 0.0;
            rotations.push(rot);
        }
    }
    let residual: Vec<f64> = (0..n)
        .map(|i| if r[(i, i)] < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let upper = DenseMatrix::from_fn(n, n, |i, j| {
        if j < i {
            0.0
        } else {
            residual[i] * r[(i, j)]
        }
    });
    Ok(GivensQr {
        rotations,
        residual,
        upper,
    })
}

/// Rotations `G₁ … G_g` and a sign `σ` with `G₁ ⋯ G_g (σ e₀) = v / ‖v‖`.
pub fn givens_reduce_vector(v: &[f64]) -> Result<(Vec<GivensRotation>, f64)> {
    let norm = super::dense::norm2(v);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Degenerate("cannot rotate a zero vector".into()));
    }
    let mut w: Vec<f64> = v.iter().map(|x| x / norm).collect();
    let mut rotations = Vec::new();
    for row in 1..w.len() {
        let b = w[row];
        if b.abs() <= ZERO_ANGLE {
            continue;
        }
        let phi = b.atan2(w[0]);
        let rot = GivensRotation::new(0, row, 2.0 * phi)?;
        let (c, s) = rot.cos_sin();
        let a = w[0];
        w[0] = c * a + s * b;
        w[row] = 0.0;
        rotations.push(rot);
    }
    let sign = if w[0] < 0.0 { -1.0 } else { 1.0 };
    Ok((rotations, sign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn identity_has_no_rotations() {
        let qr = givens_qr(&DenseMatrix::identity(4)).unwrap();
        assert!(qr.rotations.is_empty());
        assert_eq!(qr.residual, vec![1.0; 4]);
        assert_eq!(qr.upper, DenseMatrix::identity(4));
    }

    #[test]
    fn single_rotation_is_its_own_factorisation() {
        let g = GivensRotation::new(0, 1, PI / 3.0).unwrap().matrix(2);
        let qr = givens_qr(&g).unwrap();
        assert_eq!(qr.rotations.len(), 1);
        assert_eq!((qr.rotations[0].i, qr.rotations[0].j), (0, 1));
        assert!((qr.rotations[0].theta - PI / 3.0).abs() < 1e-14);
        assert_eq!(qr.residual, vec![1.0, 1.0]);
        assert!(qr.upper.max_abs_diff(&DenseMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn reflection_has_negative_residual() {
        let m = DenseMatrix::from_rows(&[vec![0.6, 0.8], vec![0.8, -0.6]]).unwrap();
        let qr = givens_qr(&m).unwrap();
        assert_eq!(qr.residual, vec![1.0, -1.0]);
        assert!(qr.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            givens_qr(&DenseMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(GivensRotation::new(2, 2, 0.1).is_err());
    }

    #[test]
    fn vector_reduction_maps_e0_to_direction() {
        let v = [3.0, -1.0, 0.0, 2.0];
        let (rots, sign) = givens_reduce_vector(&v).unwrap();
        let mut e = vec![sign, 0.0, 0.0, 0.0];
        for r in rots.iter().rev() {
            r.apply_to_vector(&mut e);
        }
        let n = super::super::dense::norm2(&v);
        for (a, b) in e.iter().zip(&v) {
            assert!((a - b / n).abs() < 1e-14);
        }
        let (rots, sign) = givens_reduce_vector(&[-2.0, 0.0]).unwrap();
        assert!(rots.is_empty());
        assert_eq!(sign, -1.0);
    }
}
