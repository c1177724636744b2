//! Matrix splittings and the classical Jacobi, Gauss-Seidel and
//! Woodbury-truncated Gauss-Seidel iterations.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numkit::{
    fidelity_error, relative_error, spectral_radius_dense, spectral_radius_power, CsrMatrix,
    LinearOperator,
};
use crate::pde::{LinearSystem, SystemMatrix};

/// Dimension up to which `ρ(D⁻¹R)` is taken from a dense Schur form.
const DENSE_RADIUS_LIMIT: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `x0 = b`.
    Rhs,
    Zero,
    /// Uniform entries in `[-1, 1)` from a seeded stream.
    Random(u64),
    Given(Vec<f64>),
}

impl Default for InitialGuess {
    fn default() -> Self {
        InitialGuess::Rhs
    }
}

impl InitialGuess {
    pub fn resolve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(match self {
            InitialGuess::Rhs => rhs.to_vec(),
            InitialGuess::Zero => vec![0.0; rhs.len()],
            InitialGuess::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..rhs.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()
            }
            InitialGuess::Given(x) => {
                if x.len() != rhs.len() {
                    return Err(Error::Dimension(format!(
                        "initial guess has {} entries, system has {}",
                        x.len(),
                        rhs.len()
                    )));
                }
                x.clone()
            }
        })
    }
}

/// `A = D + R = D + B + T` with `D⁻¹` cached.
#[derive(Debug, Clone)]
pub struct SplitSystem {
    pub diag: Vec<f64>,
    pub diag_inv: Vec<f64>,
    /// `R`, zero diagonal.
    pub off: CsrMatrix,
    /// `B`, strictly lower part of `R`.
    pub lower: CsrMatrix,
    /// `T`, strictly upper part of `R`.
    pub upper: CsrMatrix,
    pub rhs: Vec<f64>,
    pub x0: Vec<f64>,
    /// Known solution used for error traces.
    pub reference: Option<Vec<f64>>,
}

/// Split `A` into diagonal and off-diagonal parts.
pub fn split_jacobi(a: &CsrMatrix, b: &[f64], x0: &InitialGuess) -> Result<SplitSystem> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "matrix dimension {n} but right-hand side has {} entries",
            b.len()
        )));
    }
    if let Some((i, j, _)) = a.iter().find(|(_, _, v)| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: j });
    }
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDiagonal { row });
    }
    let off = a.off_diagonal();
    Ok(SplitSystem {
        diag_inv: diag.iter().map(|d| 1.0 / d).collect(),
        diag,
        lower: off.strictly_lower(),
        upper: off.strictly_upper(),
        off,
        rhs: b.to_vec(),
        x0: x0.resolve(b)?,
        reference: None,
    })
}

/// Split a [`LinearSystem`], carrying over its reference solution.
pub fn split_system(system: &LinearSystem, x0: &InitialGuess) -> Result<SplitSystem> {
    let csr = match &system.matrix {
        SystemMatrix::Sparse(m) => m.clone(),
        SystemMatrix::Dense(m) => CsrMatrix::from_dense(m)?,
    };
    let mut s = split_jacobi(&csr, &system.rhs, x0)?;
    s.reference = system.reference.clone();
    Ok(s)
}

impl SplitSystem {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `D + R` reassembled.
    pub fn matrix(&self) -> CsrMatrix {
        self.off
            .add(&CsrMatrix::from_diagonal(&self.diag))
            .expect("split parts share a dimension")
    }

    /// Same operator with a new right-hand side. `x0` is kept and the
    /// reference dropped.
    pub fn with_rhs(&self, rhs: Vec<f64>) -> Result<Self> {
        if rhs.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "right-hand side has {} entries, system has {}",
                rhs.len(),
                self.dim()
            )));
        }
        Ok(Self { rhs, reference: None, ..self.clone() })
    }

    pub fn with_x0(mut self, x0: &InitialGuess) -> Result<Self> {
        self.x0 = x0.resolve(&self.rhs)?;
        Ok(self)
    }

    pub fn with_reference(mut self, x: Vec<f64>) -> Self {
        self.reference = Some(x);
        self
    }

    /// Reference from a dense direct solve; only sensible for modest sizes.
    pub fn with_direct_reference(self) -> Result<Self> {
        let x = crate::numkit::solve_direct(&self.matrix().to_dense(), &self.rhs)?;
        Ok(self.with_reference(x))
    }

    /// `D⁻¹ R` as a sparse matrix.
    pub fn jacobi_matrix(&self) -> CsrMatrix {
        self.off.row_scaled(&self.diag_inv)
    }

    pub fn jacobi_step(&self, x: &[f64]) -> Vec<f64> {
        let rx = self.off.apply(x);
        rx.iter()
            .zip(&self.rhs)
            .zip(&self.diag_inv)
            .map(|((r, b), d)| d * (b - r))
            .collect()
    }

    /// One Gauss-Seidel sweep by forward substitution.
    pub fn gauss_seidel_step(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for i in 0..self.dim() {
            let mut s = self.rhs[i];
            for (j, v) in self.off.row_entries(i) {
                s -= v * if j < i { out[j] } else { x[j] };
            }
            out[i] = s * self.diag_inv[i];
        }
        out
    }

    /// `Ω v` with `Ω = Σ_{l=0}^{L} (−D⁻¹B)^l`, applied by repeated matvec.
    pub fn apply_omega(&self, v: &[f64], levels: usize) -> Vec<f64> {
        let mut sum = v.to_vec();
        let mut term = v.to_vec();
        for _ in 0..levels {
            let bt = self.lower.apply(&term);
            term = bt.iter().zip(&self.diag_inv).map(|(x, d)| -d * x).collect();
            if term.iter().all(|&t| t == 0.0) {
                break;
            }
            sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
        }
        sum
    }

    pub fn woodbury_step(&self, x: &[f64], levels: usize) -> Vec<f64> {
        let tx = self.upper.apply(x);
        let y: Vec<f64> = tx
            .iter()
            .zip(&self.rhs)
            .zip(&self.diag_inv)
            .map(|((t, b), d)| d * (b - t))
            .collect();
        self.apply_omega(&y, levels)
    }

    pub fn step(&self, scheme: Scheme, x: &[f64]) -> Vec<f64> {
        match scheme {
            Scheme::Jacobi => self.jacobi_step(x),
            Scheme::GaussSeidel => self.gauss_seidel_step(x),
            Scheme::Woodbury { levels } => self.woodbury_step(x, levels),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Jacobi,
    GaussSeidel,
    /// Gauss-Seidel with the lower-triangular inverse replaced by `L + 1`
    /// terms of its Neumann series.
    Woodbury { levels: usize },
}

/// Iterates `x_0..x_K` and, when a reference is known, their errors.
#[derive(Debug, Clone)]
pub struct IterateTrajectory {
    pub iterates: Vec<Vec<f64>>,
    /// `1 − |⟨x̂*, x̂_k⟩|²`; empty without a reference.
    pub fidelity_errors: Vec<f64>,
    /// `‖x_k − x*‖ / ‖x*‖`; empty without a reference.
    pub euclidean_errors: Vec<f64>,
}

impl IterateTrajectory {
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("trajectory holds x0")
    }

    /// CSV with columns `k, fidelity_error, euclidean_error`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        if self.fidelity_errors.is_empty() {
            return Err(Error::Parameter("trajectory has no reference to export errors against".into()));
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "fidelity_error", "euclidean_error"])?;
        for (k, (f, e)) in self.fidelity_errors.iter().zip(&self.euclidean_errors).enumerate() {
            w.write_record([k.to_string(), format!("{f:.17e}"), format!("{e:.17e}")])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(f)
    }
}

pub fn iterate(split: &SplitSystem, scheme: Scheme, k_max: usize) -> IterateTrajectory {
    let mut iterates = Vec::with_capacity(k_max + 1);
    iterates.push(split.x0.clone());
    for _ in 0..k_max {
        let next = split.step(scheme, iterates.last().unwrap());
        iterates.push(next);
    }
    let (fidelity_errors, euclidean_errors) = match &split.reference {
        Some(r) => iterates
            .iter()
            .map(|x| (fidelity_error(r, x), relative_error(x, r)))
            .unzip(),
        None => (Vec::new(), Vec::new()),
    };
    IterateTrajectory { iterates, fidelity_errors, euclidean_errors }
}

pub fn jacobi_iterate(split: &SplitSystem, k_max: usize) -> IterateTrajectory {
    iterate(split, Scheme::Jacobi, k_max)
}

pub fn gauss_seidel_iterate(split: &SplitSystem, k_max: usize) -> IterateTrajectory {
    iterate(split, Scheme::GaussSeidel, k_max)
}

pub fn woodbury_gs_iterate(split: &SplitSystem, k_max: usize, levels: usize) -> IterateTrajectory {
    iterate(split, Scheme::Woodbury { levels }, k_max)
}

/// Smallest `k ≥ 1` whose iterate has fidelity error at most `threshold`
/// against the split's reference; `None` if `k_max` is reached first.
pub fn iterations_to_threshold(
    split: &SplitSystem,
    scheme: Scheme,
    threshold: f64,
    k_max: usize,
) -> Result<Option<usize>> {
    let reference = split
        .reference
        .as_ref()
        .ok_or_else(|| Error::Parameter("iteration count needs a reference solution".into()))?;
    let mut x = split.x0.clone();
    for k in 1..=k_max {
        x = split.step(scheme, &x);
        if fidelity_error(reference, &x) <= threshold {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// `ρ(D⁻¹R)`.
pub fn spectral_radius(split: &SplitSystem) -> f64 {
    let q = split.jacobi_matrix();
    if q.nnz() == 0 {
        return 0.0;
    }
    if split.dim() <= DENSE_RADIUS_LIMIT {
        spectral_radius_dense(&q.to_dense()).expect("finite split")
    } else {
        spectral_radius_power(&q, 20_000)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{tridiagonal, DenseMatrix};

    fn two_by_two() -> SplitSystem {
        let a = CsrMatrix::from_dense(&DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap())
            .unwrap();
        split_jacobi(&a, &[3.0, 3.0], &InitialGuess::Zero).unwrap()
    }

    #[test]
    fn split_examples() {
        let s = two_by_two();
        assert_eq!(s.diag, vec![2.0, 2.0]);
        assert_eq!(s.off.to_dense(), DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap());

        let a = CsrMatrix::from_dense(&tridiagonal(8, -1.0, 2.0, -1.0)).unwrap();
        let s = split_jacobi(&a, &[1.0; 8], &InitialGuess::Rhs).unwrap();
        assert!(s.diag.iter().all(|&d| d == 2.0));
        assert_eq!(s.matrix().to_dense(), a.to_dense());
        assert_eq!(s.x0, vec![1.0; 8]);
    }

    #[test]
    fn zero_diagonal_names_row() {
        let a = CsrMatrix::from_dense(&DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap())
            .unwrap();
        match split_jacobi(&a, &[1.0, 1.0], &InitialGuess::Zero) {
            Err(Error::ZeroDiagonal { row }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jacobi_hand_recursion() {
        let t = jacobi_iterate(&two_by_two(), 3);
        assert_eq!(t.iterates[1], vec![1.5, 1.5]);
        assert_eq!(t.iterates[2], vec![0.75, 0.75]);
        assert_eq!(t.iterates[3], vec![1.125, 1.125]);
        assert_eq!(t.iterations(), 3);
    }

    #[test]
    fn gauss_seidel_hand_recursion() {
        let t = gauss_seidel_iterate(&two_by_two(), 2);
        assert_eq!(t.iterates[1], vec![1.5, 0.75]);
        assert_eq!(t.iterates[2], vec![1.125, 0.9375]);
    }

    #[test]
    fn diagonal_converges_in_one_step() {
        let a = CsrMatrix::from_diagonal(&[2.0, 4.0, 5.0]);
        let s = split_jacobi(&a, &[2.0, 4.0, 10.0], &InitialGuess::Random(3)).unwrap();
        for scheme in [Scheme::Jacobi, Scheme::GaussSeidel, Scheme::Woodbury { levels: 0 }] {
            assert_eq!(iterate(&s, scheme, 1).iterates[1], vec![1.0, 1.0, 2.0]);
        }
        assert_eq!(spectral_radius(&s), 0.0);
    }

    #[test]
    fn radius_examples() {
        assert!((spectral_radius(&two_by_two()) - 0.5).abs() < 1e-12);
        for n in [8, 16, 33] {
            let a = CsrMatrix::from_dense(&tridiagonal(n, -1.0, 2.0, -1.0)).unwrap();
            let s = split_jacobi(&a, &vec![1.0; n], &InitialGuess::Rhs).unwrap();
            let exact = (std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((spectral_radius(&s) - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn non_dominant_system_diverges() {
        let n = 16;
        let a = CsrMatrix::from_dense(&tridiagonal(n, -1.0, 1.2, -1.0)).unwrap();
        let s = split_jacobi(&a, &vec![1.0; n], &InitialGuess::Zero)
            .unwrap()
            .with_direct_reference()
            .unwrap();
        assert!(spectral_radius(&s) > 1.0);
        let t = jacobi_iterate(&s, 200);
        assert!(t.euclidean_errors[200] > 10.0 * t.euclidean_errors[1]);
    }

    #[test]
    fn gauss_seidel_beats_jacobi_on_dominant_tridiagonal() {
        let n = 64;
        let a = CsrMatrix::from_dense(&tridiagonal(n, -1.0, 2.5, -1.0)).unwrap();
        let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let s = split_jacobi(&a, &b, &InitialGuess::Rhs).unwrap().with_direct_reference().unwrap();
        let j = jacobi_iterate(&s, 20);
        let g = gauss_seidel_iterate(&s, 20);
        assert!(g.euclidean_errors[20] <= j.euclidean_errors[20]);
    }

    #[test]
    fn woodbury_limits() {
        let n = 10;
        let a = CsrMatrix::from_dense(&tridiagonal(n, -1.0, 3.0, -0.5)).unwrap();
        let s = split_jacobi(&a, &vec![1.0; n], &InitialGuess::Rhs).unwrap();
        let gs = gauss_seidel_iterate(&s, 15);
        let wb = woodbury_gs_iterate(&s, 15, n - 1);
        for (x, y) in gs.iterates.iter().zip(&wb.iterates) {
            assert!(crate::numkit::max_abs_diff(x, y) < 1e-12);
        }
        // L = 0 drops the lower coupling entirely.
        let w0 = woodbury_gs_iterate(&s, 1, 0);
        let tx = s.upper.apply(&s.x0);
        let manual: Vec<f64> = (0..n).map(|i| (s.rhs[i] - tx[i]) / 3.0).collect();
        assert!(crate::numkit::max_abs_diff(&w0.iterates[1], &manual) < 1e-15);
    }

    #[test]
    fn threshold_count_and_csv() {
        let a = CsrMatrix::from_dense(&tridiagonal(16, -1.0, 3.0, -1.0)).unwrap();
        let s = split_jacobi(&a, &[1.0; 16], &InitialGuess::Zero).unwrap().with_direct_reference().unwrap();
        let loose = iterations_to_threshold(&s, Scheme::Jacobi, 1e-3, 500).unwrap().unwrap();
        let tight = iterations_to_threshold(&s, Scheme::Jacobi, 1e-6, 500).unwrap().unwrap();
        assert!(loose < tight);
        let t = jacobi_iterate(&s, 3);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,fidelity_error,euclidean_error\n0,"));
        assert_eq!(text.lines().count(), 5);
    }
}
