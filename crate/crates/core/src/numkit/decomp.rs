//! Dense factorizations and spectral estimates.
//!
//! Singular values come from one-sided (Hestenes) Jacobi, which keeps high
//! relative accuracy for the small singular values that condition numbers
//! depend on. Symmetric eigenproblems use cyclic two-sided Jacobi. Operator
//! norms of large sparse maps use Lanczos on `AᵀA`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{dot, norm2, DenseMatrix};
use super::sparse::LinearOperator;
use crate::error::{Error, Result};

/// Eigenvalues below this are treated as rounding noise and clamped to zero.
pub const PSD_CLAMP: f64 = 1e-10;

/// Relative floor on `σ_min / σ_max` below which a matrix counts as singular.
pub const SINGULAR_RATIO: f64 = 1e-13;

const JACOBI_MAX_SWEEPS: usize = 80;

fn require_square(m: &DenseMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )))
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    m.check_finite()?;
    // Orthogonalise whichever side is shorter so the working set is tall.
    let work = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.transpose()
    };
    let n = work.cols();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| work.column(j)).collect();
    let mut sq: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let gamma = dot(&cols[p], &cols[q]);
                let (alpha, beta) = (sq[p], sq[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                let (cp, cq) = (&mut lo[p], &mut hi[0]);
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
                sq[p] = dot(cp, cp);
                sq[q] = dot(cq, cq);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = sq.iter().map(|s| s.sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Largest singular value of a dense matrix.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// `σ_max / σ_min`.
pub fn condition_number(m: &DenseMatrix) -> Result<f64> {
    require_square(m)?;
    let sv = singular_values(m)?;
    let (max, min) = (sv[0], *sv.last().unwrap());
    if max == 0.0 || min <= SINGULAR_RATIO * max {
        return Err(Error::Singular(format!(
            "sigma_min {min:e} vs sigma_max {max:e}"
        )));
    }
    Ok(max / min)
}

/// Symmetric eigendecomposition `S = V diag(λ) Vᵀ` (columns of `V` are eigenvectors).
pub fn symmetric_eigen(s: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    require_square(s)?;
    s.check_finite()?;
    if !s.is_symmetric(1e-12 * s.max_abs().max(1.0)) {
        return Err(Error::Parameter("matrix is not symmetric".into()));
    }
    let n = s.rows();
    let mut a = s.clone();
    let mut v = DenseMatrix::identity(n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off <= 1e-30 * a.frobenius_norm().powi(2).max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    Ok((a.diagonal(), v))
}

/// Principal square root of a symmetric positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-10, 0)`, and those at rounding level relative to
/// the largest, are clamped to zero.
pub fn psd_sqrt(s: &DenseMatrix) -> Result<DenseMatrix> {
    let (eig, v) = symmetric_eigen(s)?;
    if let Some(&bad) = eig.iter().find(|&&l| l < -PSD_CLAMP) {
        return Err(Error::NotPsd { eigenvalue: bad });
    }
    let n = s.rows();
    let top = eig.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let noise = 64.0 * n as f64 * f64::EPSILON * top;
    let roots: Vec<f64> = eig.iter().map(|&l| if l <= noise { 0.0 } else { l.sqrt() }).collect();
    let out: DenseMatrix = DenseMatrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| v[(i, k)] * roots[k] * v[(j, k)]).sum::<f64>()
    });
    // Symmetrise away rounding asymmetry.
    Ok(DenseMatrix::from_fn(n, n, |i, j| 0.5 * (out[(i, j)] + out[(j, i)])))
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`, by Sturm-sequence bisection.
fn tridiagonal_max_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let bound = alpha
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let left = if i > 0 { beta[i - 1].abs() } else { 0.0 };
            let right = beta.get(i).map_or(0.0, |b| b.abs());
            a + left + right
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let lower_bound = alpha
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let left = if i > 0 { beta[i - 1].abs() } else { 0.0 };
            let right = beta.get(i).map_or(0.0, |b| b.abs());
            a - left - right
        })
        .fold(f64::INFINITY, f64::min);
    // Number of eigenvalues strictly less than x.
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..alpha.len() {
            let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1.0);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let n = alpha.len();
    let (mut lo, mut hi) = (lower_bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Largest eigenvalue of a symmetric positive semidefinite map given by matvec.
fn lanczos_max_eigenvalue(n: usize, apply: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let nq = norm2(&q);
    q.iter_mut().for_each(|x| *x /= nq);
    let mut q_prev = vec![0.0; n];
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut estimate = 0.0;
    let max_steps = n.min(400);
    for step in 0..max_steps {
        let mut w = apply(&q);
        let a = dot(&w, &q);
        alphas.push(a);
        let b_prev = betas.last().copied().unwrap_or(0.0);
        for i in 0..n {
            w[i] -= a * q[i] + b_prev * q_prev[i];
        }
        let b = norm2(&w);
        let converged_space = b <= 1e-14 * a.abs().max(1e-300);
        if converged_space || step + 1 == max_steps || step % 8 == 7 {
            let next = tridiagonal_max_eigenvalue(&alphas, &betas);
            if converged_space || (next - estimate).abs() <= 1e-14 * next.abs() {
                return next;
            }
            estimate = next;
        }
        betas.push(b);
        q_prev = std::mem::replace(&mut q, w.iter().map(|x| x / b).collect());
    }
    tridiagonal_max_eigenvalue(&alphas, &betas[..alphas.len() - 1])
}

/// Largest singular value of an operator, via Lanczos on `AᵀA`.
pub fn operator_norm(op: &dyn LinearOperator) -> f64 {
    let n = op.dim();
    lanczos_max_eigenvalue(n, |x| op.apply_transpose(&op.apply(x)))
        .max(0.0)
        .sqrt()
}

/// LU with partial pivoting.
pub fn solve_direct(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    require_square(a)?;
    a.check_finite()?;
    let n = a.rows();
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "matrix is {n}x{n}, right-hand side has {} entries",
            b.len()
        )));
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return Err(Error::Singular("zero matrix".into()));
    }
    let mut lu = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if pmax <= 1e-14 * scale {
            return Err(Error::Singular(format!("zero pivot in column {k}")));
        }
        if piv != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
            x.swap(k, piv);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            if f == 0.0 {
                continue;
            }
            lu[(i, k)] = 0.0;
            for j in k + 1..n {
                lu[(i, j)] -= f * lu[(k, j)];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| lu[(k, j)] * x[j]).sum();
        x[k] = (x[k] - s) / lu[(k, k)];
    }
    Ok(x)
}

/// Largest eigenvalue modulus of a (generally non-symmetric) dense matrix.
pub fn spectral_radius_dense(m: &DenseMatrix) -> Result<f64> {
    require_square(m)?;
    m.check_finite()?;
    if m.rows() == 0 {
        return Ok(0.0);
    }
    if m.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let na = m.to_nalgebra();
    let eig = match nalgebra::linalg::Schur::try_new(na, f64::EPSILON, 10_000) {
        Some(schur) => schur.complex_eigenvalues(),
        None => return Ok(spectral_radius_power(m, 20_000)),
    };
    Ok(eig.iter().fold(0.0, |r, z| r.max(z.norm())))
}

/// Power-iteration estimate of the spectral radius for operators too large
/// for a dense eigensolver. Uses the squared map so that `±λ` pairs (common
/// for Jacobi iteration matrices on bipartite stencils) still converge.
pub fn spectral_radius_power(op: &dyn LinearOperator, max_iter: usize) -> f64 {
    let n = op.dim();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ad1);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut prev = f64::NAN;
    for it in 0..max_iter {
        let y = op.apply(&op.apply(&x));
        let ny = norm2(&y);
        if ny == 0.0 {
            return 0.0;
        }
        let est = ny.sqrt();
        if it > 20 && (est - prev).abs() <= 1e-10 * est {
            return est;
        }
        prev = est;
        x = y.into_iter().map(|v| v / ny).collect();
    }
    prev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::dense::tridiagonal;
    use crate::numkit::sparse::CsrMatrix;

    #[test]
    fn singular_values_of_diagonal() {
        let m = DenseMatrix::from_diagonal(&[1.0, -5.0, 3.0]);
        assert_eq!(spectral_norm(&m).unwrap(), 5.0);
        let sv = singular_values(&m).unwrap();
        assert_eq!(sv, vec![5.0, 3.0, 1.0]);
    }

    #[test]
    fn rectangular_singular_values() {
        let m = DenseMatrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 4.0, 0.0]]).unwrap();
        let sv = singular_values(&m).unwrap();
        assert_eq!(sv, vec![4.0, 3.0]);
    }

    #[test]
    fn condition_number_trivial_cases() {
        assert_eq!(condition_number(&DenseMatrix::identity(5)).unwrap(), 1.0);
        assert_eq!(
            condition_number(&DenseMatrix::from_diagonal(&[1.0, 10.0])).unwrap(),
            10.0
        );
        let singular = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            condition_number(&singular),
            Err(Error::Singular(_))
        ));
        assert!(condition_number(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn psd_sqrt_diagonal_and_identity() {
        let r = psd_sqrt(&DenseMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert!(r.max_abs_diff(&DenseMatrix::from_diagonal(&[2.0, 3.0])) < 1e-14);
        let i = psd_sqrt(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(i, DenseMatrix::identity(3));
    }

    #[test]
    fn psd_sqrt_rejects_negative_and_clamps_noise() {
        let neg = DenseMatrix::from_diagonal(&[1.0, -1e-6]);
        assert!(matches!(psd_sqrt(&neg), Err(Error::NotPsd { .. })));
        let noisy = DenseMatrix::from_diagonal(&[1.0, -1e-12]);
        let r = psd_sqrt(&noisy).unwrap();
        assert_eq!(r[(1, 1)], 0.0);
    }

    #[test]
    fn solve_direct_trivial_and_singular() {
        let x = solve_direct(&DenseMatrix::identity(3), &[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 3.0]);
        let x = solve_direct(&DenseMatrix::from_diagonal(&[2.0, 4.0]), &[2.0, 4.0]).unwrap();
        assert_eq!(x, vec![1.0, 1.0]);
        let singular = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_direct(&singular, &[1.0, 2.0]),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn lanczos_matches_dense_norm() {
        let t = tridiagonal(40, -1.0, 2.5, -0.7);
        let dense = spectral_norm(&t).unwrap();
        let op = CsrMatrix::from_dense(&t).unwrap();
        let lanczos = operator_norm(&op);
        assert!((dense - lanczos).abs() <= 1e-10 * dense, "{dense} vs {lanczos}");
    }

    #[test]
    fn spectral_radius_paths_agree() {
        // ±1/2 eigenvalues; power iteration on the squared map handles the pair.
        let q = DenseMatrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        assert!((spectral_radius_dense(&q).unwrap() - 0.5).abs() < 1e-14);
        assert!((spectral_radius_power(&q, 1000) - 0.5).abs() < 1e-10);
        assert_eq!(spectral_radius_dense(&DenseMatrix::zeros(3, 3)).unwrap(), 0.0);
    }
}
