//! Block encodings built from unitary dilations and Givens-rotation
//! circuits, state preparation for vectors, and products of encodings on
//! partially overlapping registers.
//!
//! Register layout inside every encoding: data qubits low, ancillas above
//! them, so the encoded block is the one with every ancilla in `|0⟩`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numkit::{
    givens_qr, givens_reduce_vector, norm2, spectral_norm, spectral_norm_of,
    DenseMatrix, GivensRotation, LinearOperator, ScaledOperator, SharedOperator,
};
use crate::qsim::{
    real_unitary, run_circuit, unitary, Circuit, Gate, Statevector, MAX_UNITARY_QUBITS,
};

/// Tolerance on `‖W‖₂ ≤ 1` accepted by [`dilate`].
pub const NORM_SLACK: f64 = 1e-12;

/// Orthogonality defect accepted by [`synthesize_circuit`].
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Gate-level circuits run on the statevector simulator.
    Gate,
    /// Encoded blocks applied directly as matvecs.
    Emulation,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gate" => Ok(Backend::Gate),
            "emulation" => Ok(Backend::Emulation),
            other => Err(Error::Parameter(format!("unknown backend '{other}' (gate | emulation)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingKind {
    Matrix,
    VectorPrep,
}

#[derive(Debug, Clone)]
pub enum Realization {
    Circuit(Circuit),
    /// `W / α` as an operator on the data register.
    Operator(SharedOperator),
    /// Normalised prepared state.
    State(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct BlockEncoding {
    /// `N`, before padding to a power of two.
    pub source_dim: usize,
    pub data_qubits: usize,
    /// Qubits that must be post-selected on `|0⟩`.
    pub ancillas: usize,
    pub alpha: f64,
    pub kind: EncodingKind,
    pub realization: Realization,
}

impl BlockEncoding {
    pub fn n_qubits(&self) -> usize {
        self.data_qubits + self.ancillas
    }

    pub fn circuit(&self) -> Option<&Circuit> {
        match &self.realization {
            Realization::Circuit(c) => Some(c),
            _ => None,
        }
    }

    pub fn backend(&self) -> Backend {
        match self.realization {
            Realization::Circuit(_) => Backend::Gate,
            _ => Backend::Emulation,
        }
    }
}

/// Qubits needed for an `n`-dimensional data register (at least one).
pub fn data_qubits_for(n: usize) -> usize {
    n.next_power_of_two().trailing_zeros().max(1) as usize
}

/// Orthogonal completion `[[W, √(I−WWᵀ)], [√(I−WᵀW), −Wᵀ]]` of a contraction.
///
/// For symmetric `W` both off-diagonal blocks coincide with `√(I−WᵀW)` and
/// the lower-right block is `−W`. The square roots come from one SVD
/// `W = UΣVᵀ` as `U C Uᵀ` and `V C Vᵀ` with `C = √(I−Σ²)`, which keeps the
/// result orthogonal to rounding even when `‖W‖₂ = 1`.
pub fn dilate(w: &DenseMatrix) -> Result<DenseMatrix> {
    if !w.is_square() {
        return Err(Error::Dimension(format!("dilation needs a square block, got {}x{}", w.rows(), w.cols())));
    }
    w.check_finite()?;
    let n = w.rows();
    let svd = nalgebra::linalg::SVD::new(w.to_nalgebra(), true, true);
    let norm = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    if norm > 1.0 + NORM_SLACK {
        return Err(Error::Normalization { norm });
    }
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vt");
    let c: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| {
            let s = s.min(1.0);
            ((1.0 - s) * (1.0 + s)).sqrt()
        })
        .collect();
    let right = DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|k| u[(i, k)] * c[k] * u[(j, k)]).sum());
    let lower = DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|k| vt[(k, i)] * c[k] * vt[(k, j)]).sum());
    let mut out = DenseMatrix::zeros(2 * n, 2 * n);
    out.set_block(0, 0, w);
    out.set_block(0, n, &right);
    out.set_block(n, 0, &lower);
    out.set_block(n, n, &w.transpose().scale(-1.0));
    Ok(out)
}

/// Gates for one rotation `G(θ, i, j)` on `n` qubits: move `i, j` onto
/// `2ⁿ−2, 2ⁿ−1`, rotate with `Ry(θ)` on qubit 0 controlled by the rest, move back.
pub fn givens_gates(rot: &GivensRotation, n: usize) -> Vec<Gate> {
    let top = (1usize << n) - 1;
    let qubits: Vec<usize> = (0..n).collect();
    let mut moves = Vec::new();
    if rot.j != top {
        moves.push(Gate::Permutation { i: rot.j, j: top, qubits: qubits.clone() });
    }
    if rot.i != top - 1 {
        moves.push(Gate::Permutation { i: rot.i, j: top - 1, qubits: qubits.clone() });
    }
    let mut out = moves.clone();
    out.push(Gate::Mcry { controls: (1..n).collect(), target: 0, theta: rot.theta });
    out.extend(moves.into_iter().rev());
    out
}

/// Phase −1 on basis state `index` only.
pub fn basis_phase_flip(index: usize, n: usize) -> Vec<Gate> {
    let zeros: Vec<Gate> = (0..n).filter(|q| index >> q & 1 == 0).map(|q| Gate::X { target: q }).collect();
    let mut out = zeros.clone();
    out.push(Gate::Mcz { controls: (1..n).collect(), target: 0 });
    out.extend(zeros);
    out
}

/// Circuit realising a real orthogonal `2ⁿ × 2ⁿ` matrix.
///
/// `U = G₁ ⋯ G_g · diag(±1)`, so the circuit flips the residual signs first
/// and then applies `G_g, …, G₁`.
pub fn synthesize_circuit(u: &DenseMatrix, n: usize) -> Result<Circuit> {
    if !u.is_square() || u.rows() != 1 << n || n == 0 {
        return Err(Error::Dimension(format!(
            "synthesis needs a 2^{n} square matrix, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let defect = u.orthogonality_defect();
    if defect > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal { defect });
    }
    let qr = givens_qr(u)?;
    let mut c = Circuit::new(n);
    for (idx, &s) in qr.residual.iter().enumerate() {
        if s < 0.0 {
            for g in basis_phase_flip(idx, n) {
                c.push(g)?;
            }
        }
    }
    for rot in qr.rotations.iter().rev() {
        for g in givens_gates(rot, n) {
            c.push(g)?;
        }
    }
    Ok(c)
}

/// Encode `W / ‖W‖₂`.
pub fn block_encode_matrix(w: &DenseMatrix, backend: Backend) -> Result<BlockEncoding> {
    if !w.is_square() {
        return Err(Error::Dimension(format!("block encoding needs a square matrix, got {}x{}", w.rows(), w.cols())));
    }
    w.check_finite()?;
    let alpha = spectral_norm(w)?;
    block_encode_matrix_with_alpha(w, alpha, backend)
}

/// Encode `W / α` for a caller-chosen `α ≥ ‖W‖₂`.
pub fn block_encode_matrix_with_alpha(w: &DenseMatrix, alpha: f64, backend: Backend) -> Result<BlockEncoding> {
    if !w.is_square() {
        return Err(Error::Dimension(format!("block encoding needs a square matrix, got {}x{}", w.rows(), w.cols())));
    }
    w.check_finite()?;
    if alpha == 0.0 || w.max_abs() == 0.0 {
        return Err(Error::Degenerate("cannot block-encode the zero matrix".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("subnormalisation must be positive, got {alpha}")));
    }
    let n = w.rows();
    let wn = w.scale(1.0 / alpha);
    let data_qubits = data_qubits_for(n);
    let realization = match backend {
        Backend::Gate => {
            // Identity padding keeps the padded rows out of the dilation's
            // rotations; the data register never populates them.
            let mut padded = wn.padded(1 << data_qubits);
            for i in n..1 << data_qubits {
                padded[(i, i)] = 1.0;
            }
            Realization::Circuit(synthesize_circuit(&dilate(&padded)?, data_qubits + 1)?)
        }
        Backend::Emulation => Realization::Operator(Arc::new(wn)),
    };
    Ok(BlockEncoding { source_dim: n, data_qubits, ancillas: 1, alpha, kind: EncodingKind::Matrix, realization })
}

/// Emulation-backend encoding of a (typically sparse) operator, `α = ‖W‖₂`.
pub fn block_encode_operator(op: SharedOperator) -> Result<BlockEncoding> {
    let alpha = spectral_norm_of(op.as_ref());
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Degenerate(format!("operator norm {alpha} cannot be encoded")));
    }
    Ok(block_encode_operator_with_alpha(op, alpha))
}

/// As [`block_encode_operator`] with a caller-supplied subnormalisation
/// (which must bound the operator norm).
pub fn block_encode_operator_with_alpha(op: SharedOperator, alpha: f64) -> BlockEncoding {
    let n = op.dim();
    BlockEncoding {
        source_dim: n,
        data_qubits: data_qubits_for(n),
        ancillas: 1,
        alpha,
        kind: EncodingKind::Matrix,
        realization: Realization::Operator(Arc::new(ScaledOperator { scale: 1.0 / alpha, inner: op })),
    }
}

/// State preparation `|0⟩ ↦ v / ‖v‖` (zero-padded to a power of two) with
/// no ancillas.
pub fn block_encode_vector(v: &[f64], backend: Backend) -> Result<BlockEncoding> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parameter("vector has non-finite entries".into()));
    }
    let alpha = norm2(v);
    if alpha == 0.0 {
        return Err(Error::Degenerate("cannot prepare the zero vector".into()));
    }
    let n = v.len();
    let data_qubits = data_qubits_for(n);
    let realization = match backend {
        Backend::Gate => {
            let mut padded = v.to_vec();
            padded.resize(1 << data_qubits, 0.0);
            let (rotations, sign) = givens_reduce_vector(&padded)?;
            let mut c = Circuit::new(data_qubits);
            if sign < 0.0 {
                for g in basis_phase_flip(0, data_qubits) {
                    c.push(g)?;
                }
            }
            for rot in rotations.iter().rev() {
                for g in givens_gates(rot, data_qubits) {
                    c.push(g)?;
                }
            }
            Realization::Circuit(c)
        }
        Backend::Emulation => Realization::State(v.iter().map(|x| x / alpha).collect()),
    };
    Ok(BlockEncoding { source_dim: n, data_qubits, ancillas: 0, alpha, kind: EncodingKind::VectorPrep, realization })
}

/// Product `F₁ F₂ ⋯ F_m` of block encodings (the last may be a state
/// preparation). Each factor gets its own fresh ancillas.
#[derive(Debug, Clone)]
pub struct ProductEncoding {
    pub factors: Vec<BlockEncoding>,
    pub total_alpha: f64,
    pub ancilla_count: usize,
    pub encoding: BlockEncoding,
}

#[derive(Debug)]
struct ProductOperator(Vec<SharedOperator>);

impl LinearOperator for ProductOperator {
    fn dim(&self) -> usize {
        self.0[0].dim()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let mut cur = x.to_vec();
        for op in self.0.iter().rev() {
            cur = op.apply(&cur);
        }
        y.copy_from_slice(&cur);
    }
    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        let mut cur = x.to_vec();
        for op in &self.0 {
            cur = op.apply_transpose(&cur);
        }
        y.copy_from_slice(&cur);
    }
}

/// Gate layout for one product: each factor's circuit placed on the data
/// register plus its slice of the ancilla pool starting at `pool_start`.
/// Returns the circuit (on `width` qubits) and the ancillas consumed.
pub fn product_circuit(factors: &[&BlockEncoding], pool_start: usize, width: usize) -> Result<(Circuit, usize)> {
    let mut c = Circuit::new(width);
    let mut next = pool_start;
    let mut slots = Vec::with_capacity(factors.len());
    for f in factors {
        slots.push(next);
        next += f.ancillas;
    }
    for (f, &slot) in factors.iter().zip(&slots).rev() {
        let fc = f.circuit().ok_or_else(|| Error::Parameter("factor has no gate realisation".into()))?;
        let map: Vec<usize> = (0..f.data_qubits).chain(slot..slot + f.ancillas).collect();
        c.append(&fc.remap(&map, width)?)?;
    }
    Ok((c, next - pool_start))
}

pub fn multiply_encodings(factors: &[BlockEncoding], backend: Backend) -> Result<ProductEncoding> {
    let first = factors.first().ok_or_else(|| Error::Parameter("empty product".into()))?;
    if let Some(f) = factors.iter().find(|f| f.source_dim != first.source_dim) {
        return Err(Error::Dimension(format!(
            "factor dimensions differ: {} vs {}",
            first.source_dim, f.source_dim
        )));
    }
    if factors[..factors.len() - 1].iter().any(|f| f.kind == EncodingKind::VectorPrep) {
        return Err(Error::Parameter("only the last factor may be a state preparation".into()));
    }
    if factors.iter().any(|f| f.backend() != backend) {
        return Err(Error::Parameter("factors realised for a different backend".into()));
    }
    let kind = factors.last().unwrap().kind;
    let total_alpha: f64 = factors.iter().map(|f| f.alpha).product();
    let ancilla_count: usize = factors.iter().map(|f| f.ancillas).sum();
    let data_qubits = first.data_qubits;
    let realization = match backend {
        Backend::Gate => {
            let refs: Vec<&BlockEncoding> = factors.iter().collect();
            let (c, _) = product_circuit(&refs, data_qubits, data_qubits + ancilla_count)?;
            Realization::Circuit(c)
        }
        Backend::Emulation => {
            let ops: Vec<SharedOperator> = factors
                .iter()
                .filter_map(|f| match &f.realization {
                    Realization::Operator(op) => Some(op.clone()),
                    _ => None,
                })
                .collect();
            match &factors.last().unwrap().realization {
                Realization::State(v) => {
                    let mut cur = v.clone();
                    for op in ops.iter().rev() {
                        cur = op.apply(&cur);
                    }
                    Realization::State(cur)
                }
                _ => Realization::Operator(Arc::new(ProductOperator(ops))),
            }
        }
    };
    Ok(ProductEncoding {
        factors: factors.to_vec(),
        total_alpha,
        ancilla_count,
        encoding: BlockEncoding {
            source_dim: first.source_dim,
            data_qubits,
            ancillas: ancilla_count,
            alpha: total_alpha,
            kind,
            realization,
        },
    })
}

/// Top-left `N × N` block of a matrix encoding: the realised unitary for the
/// gate backend, the operator itself for the emulation backend.
pub fn extract_block(enc: &BlockEncoding) -> Result<DenseMatrix> {
    if enc.kind != EncodingKind::Matrix {
        return Err(Error::Parameter("state preparations have no matrix block; use prepared_state".into()));
    }
    let n = enc.source_dim;
    match &enc.realization {
        Realization::Circuit(c) => {
            if c.n_qubits() > MAX_UNITARY_QUBITS {
                return Err(Error::Capacity {
                    what: "block extraction qubits".into(),
                    required: c.n_qubits(),
                    limit: MAX_UNITARY_QUBITS,
                });
            }
            let u = unitary(c)?;
            let mut out = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let z = u[(i, j)];
                    if z.im.abs() > 1e-12 {
                        return Err(Error::Parameter("encoded block is not real".into()));
                    }
                    out[(i, j)] = z.re;
                }
            }
            Ok(out)
        }
        Realization::Operator(op) => Ok(op.to_dense()),
        Realization::State(_) => unreachable!("matrix encodings never hold a state"),
    }
}

/// Data-register state a preparation (or product ending in one) yields
/// once every ancilla reads zero, scaled so the full encoded vector is
/// `alpha ·` the returned vector.
pub fn prepared_state(enc: &BlockEncoding) -> Result<Vec<f64>> {
    if enc.kind != EncodingKind::VectorPrep {
        return Err(Error::Parameter("not a state preparation".into()));
    }
    match &enc.realization {
        Realization::State(v) => Ok(v.clone()),
        Realization::Circuit(c) => {
            let out = run_circuit(c, Statevector::zero(c.n_qubits())?)?;
            let amps = out.to_real(1e-12)?;
            Ok(amps[..enc.source_dim].to_vec())
        }
        Realization::Operator(_) => unreachable!("state preparations never hold an operator"),
    }
}

/// Full realised unitary of a gate encoding (small registers only).
pub fn realized_unitary(enc: &BlockEncoding) -> Result<DenseMatrix> {
    match &enc.realization {
        Realization::Circuit(c) => real_unitary(c),
        _ => Err(Error::Parameter("emulation encodings have no unitary".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{max_abs_diff, tridiagonal, CsrMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn dilation_examples() {
        let z = dilate(&DenseMatrix::zeros(2, 2)).unwrap();
        let mut expected = DenseMatrix::zeros(4, 4);
        expected.set_block(0, 2, &DenseMatrix::identity(2));
        expected.set_block(2, 0, &DenseMatrix::identity(2));
        assert!(z.max_abs_diff(&expected) < 1e-12);

        let d = dilate(&DenseMatrix::from_rows(&[vec![0.6]]).unwrap()).unwrap();
        let expected = DenseMatrix::from_rows(&[vec![0.6, 0.8], vec![0.8, -0.6]]).unwrap();
        assert!(d.max_abs_diff(&expected) < 1e-12);

        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = DenseMatrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
        let d = dilate(&rot).unwrap();
        let mut expected = DenseMatrix::zeros(4, 4);
        expected.set_block(0, 0, &rot);
        expected.set_block(2, 2, &rot.transpose().scale(-1.0));
        assert!(d.max_abs_diff(&expected) < 1e-7);
        assert!(d.orthogonality_defect() < 1e-9);

        assert!(matches!(dilate(&DenseMatrix::identity(2).scale(1.5)), Err(Error::Normalization { .. })));
    }

    #[test]
    fn dilation_of_non_symmetric_block_is_orthogonal() {
        let w = DenseMatrix::from_rows(&[vec![0.0, 0.9, 0.0], vec![0.0, 0.0, 0.4], vec![0.0, 0.0, 0.0]]).unwrap();
        let d = dilate(&w).unwrap();
        assert!(d.orthogonality_defect() < 1e-9);
        assert_eq!(d.block(0, 0, 3, 3), w);
    }

    #[test]
    fn synthesis_examples() {
        assert!(synthesize_circuit(&DenseMatrix::identity(8), 3).unwrap().is_empty());
        let (c, s) = ((PI / 6.0).cos(), (PI / 6.0).sin());
        let g = DenseMatrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
        let circ = synthesize_circuit(&g, 1).unwrap();
        assert_eq!(circ.gates().len(), 1);
        match &circ.gates()[0] {
            Gate::Mcry { controls, target: 0, theta } => {
                assert!(controls.is_empty());
                assert!((theta - PI / 3.0).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(synthesize_circuit(&DenseMatrix::identity(3), 2).is_err());
        assert!(matches!(
            synthesize_circuit(&DenseMatrix::identity(2).scale(0.5), 1),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let m = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let qr = givens_qr(&m).unwrap();
        let mut q = DenseMatrix::identity(n);
        for r in &qr.rotations {
            q = q.matmul(&r.matrix(n)).unwrap();
        }
        q.matmul(&DenseMatrix::from_diagonal(&qr.residual)).unwrap()
    }

    #[test]
    fn synthesis_reproduces_random_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=4 {
            let u = random_orthogonal(1 << n, &mut rng);
            let c = synthesize_circuit(&u, n).unwrap();
            assert!(real_unitary(&c).unwrap().max_abs_diff(&u) < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn matrix_encoding_examples() {
        let e = block_encode_matrix(&DenseMatrix::identity(2), Backend::Gate).unwrap();
        assert_eq!(e.alpha, 1.0);
        assert_eq!(e.n_qubits(), 2);
        let u = realized_unitary(&e).unwrap();
        let expected = DenseMatrix::from_diagonal(&[1.0, 1.0, -1.0, -1.0]);
        assert!(u.max_abs_diff(&expected) < 1e-12);

        let dinv = DenseMatrix::from_diagonal(&[0.5, 0.25]);
        let e = block_encode_matrix(&dinv, Backend::Gate).unwrap();
        assert!((e.alpha - 0.5).abs() < 1e-15);
        let blk = extract_block(&e).unwrap();
        assert!(blk.max_abs_diff(&DenseMatrix::from_diagonal(&[1.0, 0.5])) < 1e-12);

        let a = tridiagonal(8, -1.0, 2.0, -1.0);
        let r = CsrMatrix::from_dense(&a).unwrap().off_diagonal().to_dense();
        let e = block_encode_matrix(&r, Backend::Gate).unwrap();
        let blk = extract_block(&e).unwrap();
        assert!(blk.max_abs_diff(&r.scale(1.0 / e.alpha)) < 1e-10);
        assert!((e.alpha - spectral_norm(&r).unwrap()).abs() < 1e-12);

        assert!(matches!(block_encode_matrix(&DenseMatrix::zeros(2, 2), Backend::Gate), Err(Error::Degenerate(_))));
    }

    #[test]
    fn diagonal_encoding_uses_few_rotations() {
        for n in [2usize, 4, 8] {
            let d = DenseMatrix::from_diagonal(&(0..n).map(|i| 1.0 + i as f64).collect::<Vec<_>>());
            let e = block_encode_matrix(&d, Backend::Gate).unwrap();
            let rotations = e
                .circuit()
                .unwrap()
                .gates()
                .iter()
                .filter(|g| matches!(g, Gate::Mcry { .. }))
                .count();
            assert!(rotations <= n, "{rotations} rotations for N = {n}");
        }
    }

    #[test]
    fn vector_encoding_examples() {
        let e = block_encode_vector(&[1.0, 0.0, 0.0, 0.0], Backend::Gate).unwrap();
        assert!(e.circuit().unwrap().is_empty());
        assert_eq!(e.alpha, 1.0);
        assert_eq!(e.ancillas, 0);

        let h = 1.0 / 2f64.sqrt();
        let e = block_encode_vector(&[h, h], Backend::Gate).unwrap();
        assert_eq!(e.circuit().unwrap().gates(), &[Gate::Mcry { controls: vec![], target: 0, theta: PI / 2.0 }]);

        let v: Vec<f64> = (0..11).map(|i| (i as f64 * 0.7).sin() - 0.2).collect();
        let e = block_encode_vector(&v, Backend::Gate).unwrap();
        assert_eq!(e.data_qubits, 4);
        let got = prepared_state(&e).unwrap();
        let want: Vec<f64> = v.iter().map(|x| x / norm2(&v)).collect();
        assert!(max_abs_diff(&got, &want) < 1e-12);

        let neg = block_encode_vector(&[-2.0, 0.0], Backend::Gate).unwrap();
        assert!(max_abs_diff(&prepared_state(&neg).unwrap(), &[-1.0, 0.0]) < 1e-15);
        assert!(block_encode_vector(&[0.0, 0.0], Backend::Gate).is_err());
    }

    #[test]
    fn products_match_direct_arithmetic() {
        for backend in [Backend::Gate, Backend::Emulation] {
            let dinv = block_encode_matrix(&DenseMatrix::from_diagonal(&[0.5, 0.25]), backend).unwrap();
            let b = block_encode_vector(&[1.0, 1.0], backend).unwrap();
            let p = multiply_encodings(&[dinv.clone(), b.clone()], backend).unwrap();
            assert_eq!(p.ancilla_count, 1);
            let s = prepared_state(&p.encoding).unwrap();
            let scaled: Vec<f64> = s.iter().map(|x| x * p.total_alpha).collect();
            assert!(max_abs_diff(&scaled, &[0.5, 0.25]) < 1e-12);

            let r = block_encode_matrix(&DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(), backend)
                .unwrap();
            let x0 = block_encode_vector(&[0.3, -0.7], backend).unwrap();
            let p = multiply_encodings(&[dinv, r, x0], backend).unwrap();
            let s = prepared_state(&p.encoding).unwrap();
            let scaled: Vec<f64> = s.iter().map(|x| x * p.total_alpha).collect();
            assert!(max_abs_diff(&scaled, &[-0.35, 0.075]) < 1e-12);
        }
    }

    #[test]
    fn single_factor_product_is_the_factor() {
        let w = DenseMatrix::from_rows(&[vec![0.2, -0.5], vec![0.1, 0.4]]).unwrap();
        let e = block_encode_matrix(&w, Backend::Gate).unwrap();
        let p = multiply_encodings(std::slice::from_ref(&e), Backend::Gate).unwrap();
        assert_eq!(p.total_alpha, e.alpha);
        assert_eq!(p.encoding.circuit().unwrap().gates(), e.circuit().unwrap().gates());
    }

    #[test]
    fn backends_agree_on_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [2, 3, 4] {
            let a = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let b = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let g = [block_encode_matrix(&a, Backend::Gate).unwrap(), block_encode_matrix(&b, Backend::Gate).unwrap()];
            let e = [
                block_encode_matrix(&a, Backend::Emulation).unwrap(),
                block_encode_matrix(&b, Backend::Emulation).unwrap(),
            ];
            let pg = multiply_encodings(&g, Backend::Gate).unwrap();
            let pe = multiply_encodings(&e, Backend::Emulation).unwrap();
            let want = a.matmul(&b).unwrap().scale(1.0 / (g[0].alpha * g[1].alpha));
            assert!(extract_block(&pg.encoding).unwrap().max_abs_diff(&want) < 1e-9);
            assert!(extract_block(&pe.encoding).unwrap().max_abs_diff(&want) < 1e-12);
        }
    }

    #[test]
    fn mixed_products_rejected() {
        let e = block_encode_matrix(&DenseMatrix::identity(2), Backend::Gate).unwrap();
        let v = block_encode_vector(&[1.0, 0.0], Backend::Gate).unwrap();
        assert!(multiply_encodings(&[v.clone(), e.clone()], Backend::Gate).is_err());
        let big = block_encode_matrix(&DenseMatrix::identity(4), Backend::Gate).unwrap();
        assert!(multiply_encodings(&[e.clone(), big], Backend::Gate).is_err());
        assert!(multiply_encodings(&[e], Backend::Emulation).is_err());
    }
}
