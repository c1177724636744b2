//! Iterates written as linear combinations of products of block encodings.
//!
//! The `k`-th Jacobi iterate
//!
//! ```text
//! x_k = Σ_{j=1}^{k} (−D⁻¹R)^{j−1} D⁻¹ b + (−D⁻¹R)^k x_0
//! ```
//!
//! becomes `k + 1` signed terms, each a product of encoded factors whose
//! subnormalisations multiply into the term coefficient `c_j`. The same
//! machinery carries Gauss-Seidel with a truncated Woodbury factor `Ω` and
//! the `Q = D⁻¹R` rewriting.

mod program;
mod resources;

pub use program::{
    assemble_lcu_program, build_expansion, execute, expectation, save_results_csv, solve, write_results_csv,
    LcuLayout, LcuProgram, Resources, SolveResult, TracePoint, GATE_GS_LIMITS, GATE_WIDTH_LIMIT,
};
pub use resources::{estimate_resources, ResourceEstimate, WidthMode};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::iterate::SplitSystem;
use crate::numkit::{norm2, spectral_norm_of, CsrMatrix, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcuScheme {
    Jacobi,
    /// Gauss-Seidel with `Ω = Σ_{l=0}^{L} (−D⁻¹B)^l`.
    GaussSeidel { levels: usize },
    /// Jacobi with `Q = D⁻¹R`, `p = D⁻¹b` formed classically.
    QForm,
}

impl fmt::Display for LcuScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LcuScheme::Jacobi => write!(f, "jacobi"),
            LcuScheme::GaussSeidel { .. } => write!(f, "gauss-seidel"),
            LcuScheme::QForm => write!(f, "q-form"),
        }
    }
}

impl FromStr for LcuScheme {
    type Err = Error;

    /// Parses the scheme name; Gauss-Seidel starts with `L = 0` and the
    /// caller sets the truncation order.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jacobi" => Ok(LcuScheme::Jacobi),
            "gauss-seidel" => Ok(LcuScheme::GaussSeidel { levels: 0 }),
            "q-form" => Ok(LcuScheme::QForm),
            other => Err(Error::Parameter(format!("unknown scheme '{other}' (jacobi | gauss-seidel | q-form)"))),
        }
    }
}

/// What an operand does to the data register before scaling by `1/α`.
#[derive(Debug, Clone)]
pub enum OperandAction {
    Matrix(Arc<CsrMatrix>),
    /// `Σ_{l=0}^{L} (−D⁻¹B)^l`, applied by repeated matvec.
    Woodbury { diag_inv: Arc<Vec<f64>>, lower: Arc<CsrMatrix>, levels: usize, dinv_alpha: f64, lower_alpha: f64 },
    /// State preparation of a vector.
    Vector(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct Operand {
    pub name: String,
    pub alpha: f64,
    pub action: OperandAction,
}

impl Operand {
    fn matrix(name: &str, m: CsrMatrix, alpha: Option<f64>) -> Self {
        let alpha = alpha.unwrap_or_else(|| spectral_norm_of(&m));
        Operand { name: name.into(), alpha, action: OperandAction::Matrix(Arc::new(m)) }
    }

    fn vector(name: &str, v: Vec<f64>) -> Self {
        Operand { name: name.into(), alpha: norm2(&v), action: OperandAction::Vector(v) }
    }

    pub fn is_vector(&self) -> bool {
        matches!(self.action, OperandAction::Vector(_))
    }

    /// `W x / α` (matrix kinds) or `v / ‖v‖` (vectors, `x` ignored).
    pub fn apply_normalized(&self, x: &[f64]) -> Vec<f64> {
        let s = 1.0 / self.alpha;
        match &self.action {
            OperandAction::Matrix(m) => m.apply(x).into_iter().map(|v| v * s).collect(),
            OperandAction::Vector(v) => v.iter().map(|v| v * s).collect(),
            OperandAction::Woodbury { diag_inv, lower, levels, .. } => {
                let mut sum = x.to_vec();
                let mut term = x.to_vec();
                for _ in 0..*levels {
                    let bt = lower.apply(&term);
                    term = bt.iter().zip(diag_inv.iter()).map(|(b, d)| -d * b).collect();
                    sum.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
                }
                sum.into_iter().map(|v| v * s).collect()
            }
        }
    }
}

/// One signed product `sign · F_1 F_2 ⋯ F_m |v⟩`; `factors` index into
/// [`LcuExpansion::operands`], leftmost first, last one a vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuTerm {
    pub sign: f64,
    pub factors: Vec<usize>,
    pub coefficient: f64,
}

#[derive(Debug, Clone)]
pub struct LcuExpansion {
    pub scheme: LcuScheme,
    pub k: usize,
    pub dim: usize,
    pub operands: Vec<Operand>,
    pub terms: Vec<LcuTerm>,
    /// Exact solution, when known, for error reporting.
    pub reference: Option<Vec<f64>>,
}

/// Amplitudes `√c_j / √Σc` padded with zeros to `2^a` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationState {
    pub ancillas: usize,
    pub amplitudes: Vec<f64>,
}

/// `⌈log₂ n⌉` with `n ≤ 1` giving 0.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

impl LcuExpansion {
    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }

    /// Swap in new `b` and `x0`, keeping every matrix operand (and its
    /// subnormalisation). Used when only the right-hand side changes between
    /// timesteps.
    pub fn with_vectors(&self, rhs: &[f64], x0: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        let p = if self.scheme == LcuScheme::QForm {
            let dinv = self
                .operands
                .iter()
                .find_map(|o| match (&o.action, o.name.as_str()) {
                    (OperandAction::Matrix(m), "D^-1") => Some(m.diagonal()),
                    _ => None,
                })
                .ok_or_else(|| Error::Parameter("q-form expansion lost its D^-1 operand".into()))?;
            Some(rhs.iter().zip(&dinv).map(|(b, d)| b * d).collect::<Vec<_>>())
        } else {
            None
        };
        for op in out.operands.iter_mut() {
            let v = match op.name.as_str() {
                "b" => rhs.to_vec(),
                "x0" => x0.to_vec(),
                "p" => p.clone().unwrap(),
                _ => continue,
            };
            if v.len() != self.dim {
                return Err(Error::Dimension(format!("vector has {} entries, system has {}", v.len(), self.dim)));
            }
            *op = Operand::vector(&op.name, v);
        }
        out.reference = None;
        out.refresh_terms();
        Ok(out)
    }

    /// Recompute coefficients and drop terms that vanish identically.
    fn refresh_terms(&mut self) {
        let ops = &self.operands;
        for t in self.terms.iter_mut() {
            t.coefficient = t.factors.iter().map(|&f| ops[f].alpha).product();
        }
        self.terms.retain(|t| t.coefficient > 0.0);
    }

    fn from_parts(scheme: LcuScheme, k: usize, dim: usize, operands: Vec<Operand>, raw: Vec<(f64, Vec<usize>)>) -> Self {
        let mut e = LcuExpansion {
            scheme,
            k,
            dim,
            operands,
            terms: raw.into_iter().map(|(sign, factors)| LcuTerm { sign, factors, coefficient: 0.0 }).collect(),
            reference: None,
        };
        e.refresh_terms();
        e
    }
}

fn signed(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn diag_operand(split: &SplitSystem) -> Operand {
    let alpha = split.diag_inv.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    Operand::matrix("D^-1", CsrMatrix::from_diagonal(&split.diag_inv), Some(alpha))
}

/// `x_k` for Jacobi: terms `(D⁻¹R)^{j−1} D⁻¹ b` with sign `(−1)^{j−1}` for
/// `j = 1..k`, then `(D⁻¹R)^k x_0` with sign `(−1)^k`.
///
/// Terms whose coefficient vanishes (zero `R`, `b` or `x_0`) are dropped;
/// otherwise there are exactly `k + 1`.
pub fn build_jacobi_expansion(split: &SplitSystem, k: usize) -> Result<LcuExpansion> {
    let operands = vec![
        diag_operand(split),
        Operand::matrix("R", split.off.clone(), None),
        Operand::vector("b", split.rhs.clone()),
        Operand::vector("x0", split.x0.clone()),
    ];
    let (d, r, b, x0) = (0, 1, 2, 3);
    let mut raw = Vec::with_capacity(k + 1);
    for j in 1..=k {
        let mut f = Vec::with_capacity(2 * j);
        for _ in 0..j - 1 {
            f.extend([d, r]);
        }
        f.extend([d, b]);
        raw.push((signed(j - 1), f));
    }
    let mut last = Vec::with_capacity(2 * k + 1);
    for _ in 0..k {
        last.extend([d, r]);
    }
    last.push(x0);
    raw.push((signed(k), last));
    finish(LcuExpansion::from_parts(LcuScheme::Jacobi, k, split.dim(), operands, raw).with_reference(split))
}

/// Gauss-Seidel: `(Ω D⁻¹ T)^j Ω D⁻¹ b` with sign `(−1)^j` for `j = 0..k−1`,
/// then `(Ω D⁻¹ T)^k x_0` with sign `(−1)^k`.
///
/// `Ω` carries `α_Ω = Σ_l (‖D⁻¹‖‖B‖)^l`. With `L = 0` or `B = 0` it is the
/// identity and is left out of every product, so the expansion coincides with
/// the Jacobi one for `R = T`.
pub fn build_gauss_seidel_expansion(split: &SplitSystem, k: usize, levels: usize) -> Result<LcuExpansion> {
    let dinv = diag_operand(split);
    let use_omega = levels > 0 && split.lower.nnz() > 0;
    let mut operands = vec![
        dinv.clone(),
        Operand::matrix("T", split.upper.clone(), None),
        Operand::vector("b", split.rhs.clone()),
        Operand::vector("x0", split.x0.clone()),
    ];
    let (d, t, b, x0) = (0, 1, 2, 3);
    let omega = if use_omega {
        let lower_alpha = spectral_norm_of(&split.lower);
        let ratio = dinv.alpha * lower_alpha;
        let alpha: f64 = (0..=levels).map(|l| ratio.powi(l as i32)).sum();
        operands.push(Operand {
            name: "Omega".into(),
            alpha,
            action: OperandAction::Woodbury {
                diag_inv: Arc::new(split.diag_inv.clone()),
                lower: Arc::new(split.lower.clone()),
                levels,
                dinv_alpha: dinv.alpha,
                lower_alpha,
            },
        });
        Some(4)
    } else {
        None
    };
    let step: Vec<usize> = omega.into_iter().chain([d, t]).collect();
    let head: Vec<usize> = omega.into_iter().chain([d, b]).collect();
    let mut raw = Vec::with_capacity(k + 1);
    for j in 0..k {
        let mut f = Vec::new();
        for _ in 0..j {
            f.extend(&step);
        }
        f.extend(&head);
        raw.push((signed(j), f));
    }
    let mut last = Vec::new();
    for _ in 0..k {
        last.extend(&step);
    }
    last.push(x0);
    raw.push((signed(k), last));
    finish(LcuExpansion::from_parts(LcuScheme::GaussSeidel { levels }, k, split.dim(), operands, raw).with_reference(split))
}

/// Jacobi through `Q = D⁻¹R`, `p = D⁻¹b`: `Σ_{j=1}^{k} (−Q)^{j−1} p + (−Q)^k x_0`.
pub fn build_q_form_expansion(split: &SplitSystem, k: usize) -> Result<LcuExpansion> {
    let p: Vec<f64> = split.rhs.iter().zip(&split.diag_inv).map(|(b, d)| b * d).collect();
    let operands = vec![
        Operand::matrix("Q", split.jacobi_matrix(), None),
        Operand::vector("p", p),
        Operand::vector("x0", split.x0.clone()),
        // Kept so the right-hand side can be swapped without re-splitting.
        Operand::matrix("D^-1", CsrMatrix::from_diagonal(&split.diag_inv), Some(1.0)),
    ];
    let (q, p, x0) = (0, 1, 2);
    let mut raw = Vec::with_capacity(k + 1);
    for j in 1..=k {
        let mut f = vec![q; j - 1];
        f.push(p);
        raw.push((signed(j - 1), f));
    }
    let mut last = vec![q; k];
    last.push(x0);
    raw.push((signed(k), last));
    finish(LcuExpansion::from_parts(LcuScheme::QForm, k, split.dim(), operands, raw).with_reference(split))
}

impl LcuExpansion {
    fn with_reference(mut self, split: &SplitSystem) -> Self {
        self.reference = split.reference.clone();
        self
    }
}

fn finish(e: LcuExpansion) -> Result<LcuExpansion> {
    if e.terms.is_empty() {
        return Err(Error::Degenerate(format!("every term of the {} expansion vanishes", e.scheme)));
    }
    Ok(e)
}

/// Prepared amplitudes for the coefficient register.
pub fn build_coefficients(expansion: &LcuExpansion) -> Result<NormalizationState> {
    for (index, t) in expansion.terms.iter().enumerate() {
        if !(t.coefficient > 0.0) || !t.coefficient.is_finite() {
            return Err(Error::Coefficient { index, value: t.coefficient });
        }
    }
    let count = expansion.terms.len();
    let ancillas = ceil_log2(count);
    let total = expansion.coefficient_sum();
    let mut amplitudes: Vec<f64> = expansion.terms.iter().map(|t| (t.coefficient / total).sqrt()).collect();
    amplitudes.resize(1 << ancillas, 0.0);
    Ok(NormalizationState { ancillas, amplitudes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iterate::{split_jacobi, InitialGuess};
    use crate::numkit::DenseMatrix;

    pub(crate) fn two_by_two(x0: InitialGuess) -> SplitSystem {
        let a = CsrMatrix::from_dense(&DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap()).unwrap();
        split_jacobi(&a, &[3.0, 3.0], &x0).unwrap()
    }

    #[test]
    fn jacobi_term_structure() {
        let s = two_by_two(InitialGuess::Given(vec![1.0, 0.0]));
        let e = build_jacobi_expansion(&s, 0).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].sign, 1.0);
        assert_eq!(e.terms[0].factors, vec![3]);
        assert_eq!(e.terms[0].coefficient, 1.0);

        let e = build_jacobi_expansion(&s, 1).unwrap();
        let (d, r, b) = (0.5, 1.0, 18f64.sqrt());
        assert_eq!(e.terms.len(), 2);
        assert_eq!(e.terms[0].factors, vec![0, 2]);
        assert!((e.terms[0].coefficient - d * b).abs() < 1e-14);
        assert_eq!(e.terms[1].sign, -1.0);
        assert_eq!(e.terms[1].factors, vec![0, 1, 3]);
        assert!((e.terms[1].coefficient - d * r * 1.0).abs() < 1e-14);

        let e = build_jacobi_expansion(&s, 4).unwrap();
        assert_eq!(e.terms.len(), 5);
        for (j, t) in e.terms.iter().enumerate() {
            assert_eq!(t.sign, if j % 2 == 0 { 1.0 } else { -1.0 });
        }
        // Final term carries r̃^k d̃^k x̃₀.
        assert!((e.terms[4].coefficient - (d * r).powi(4)).abs() < 1e-14);
    }

    #[test]
    fn coefficient_examples() {
        let s = two_by_two(InitialGuess::Rhs);
        let n = build_coefficients(&build_jacobi_expansion(&s, 0).unwrap()).unwrap();
        assert_eq!(n, NormalizationState { ancillas: 0, amplitudes: vec![1.0] });

        let mut e = build_jacobi_expansion(&s, 3).unwrap();
        e.terms.iter_mut().for_each(|t| t.coefficient = 1.0);
        let n = build_coefficients(&e).unwrap();
        assert_eq!(n.amplitudes, vec![0.5; 4]);

        let e = build_jacobi_expansion(&s, 4).unwrap();
        let n = build_coefficients(&e).unwrap();
        assert_eq!(n.ancillas, 3);
        assert_eq!(n.amplitudes.len(), 8);
        assert_eq!(&n.amplitudes[5..], &[0.0; 3]);
        assert!((norm2(&n.amplitudes) - 1.0).abs() < 1e-15);

        let mut bad = e.clone();
        bad.terms[2].coefficient = 0.0;
        assert!(matches!(build_coefficients(&bad), Err(Error::Coefficient { index: 2, .. })));
    }

    #[test]
    fn gauss_seidel_without_lower_part_is_jacobi() {
        // Upper-triangular off-diagonal part: B = 0, so Ω = I.
        let a = CsrMatrix::from_dense(
            &DenseMatrix::from_rows(&[vec![3.0, 1.0, 0.5], vec![0.0, 2.0, -1.0], vec![0.0, 0.0, 4.0]]).unwrap(),
        )
        .unwrap();
        let s = split_jacobi(&a, &[1.0, 2.0, 3.0], &InitialGuess::Rhs).unwrap();
        for levels in [0, 3] {
            let g = build_gauss_seidel_expansion(&s, 3, levels).unwrap();
            let j = build_jacobi_expansion(&s, 3).unwrap();
            assert_eq!(g.terms.len(), j.terms.len());
            for (a, b) in g.terms.iter().zip(&j.terms) {
                assert_eq!(a.sign, b.sign);
                assert!((a.coefficient - b.coefficient).abs() < 1e-14 * b.coefficient);
            }
        }
    }

    #[test]
    fn vanishing_terms_are_dropped() {
        let a = CsrMatrix::from_diagonal(&[2.0, 4.0]);
        let s = split_jacobi(&a, &[2.0, 4.0], &InitialGuess::Rhs).unwrap();
        let e = build_jacobi_expansion(&s, 3).unwrap();
        assert_eq!(e.terms.len(), 1);
        let s = split_jacobi(&a, &[0.0, 0.0], &InitialGuess::Rhs).unwrap();
        assert!(matches!(build_jacobi_expansion(&s, 2), Err(Error::Degenerate(_))));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(
            [1, 2, 3, 4, 5, 8, 9, 81].map(ceil_log2),
            [0, 1, 2, 2, 3, 3, 4, 7]
        );
    }

    #[test]
    fn scheme_names() {
        assert_eq!("q-form".parse::<LcuScheme>().unwrap(), LcuScheme::QForm);
        assert_eq!("gauss-seidel".parse::<LcuScheme>().unwrap(), LcuScheme::GaussSeidel { levels: 0 });
        assert!("sor".parse::<LcuScheme>().is_err());
        assert_eq!(LcuScheme::GaussSeidel { levels: 4 }.to_string(), "gauss-seidel");
    }
}
