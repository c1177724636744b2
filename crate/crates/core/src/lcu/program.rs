use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use super::{
    build_coefficients, build_gauss_seidel_expansion, build_jacobi_expansion, build_q_form_expansion, ceil_log2,
    estimate_resources, LcuExpansion, LcuScheme, NormalizationState, Operand, OperandAction, WidthMode,
};
use crate::blockenc::{
    basis_phase_flip, block_encode_matrix_with_alpha, block_encode_vector, data_qubits_for, product_circuit, Backend,
    BlockEncoding, EncodingKind, Realization,
};
use crate::error::{Error, Result};
use crate::iterate::SplitSystem;
use crate::numkit::{fidelity_error, norm2, DenseMatrix, LinearOperator};
use crate::qsim::{controlled_circuit, post_select_zeros, run_circuit, Circuit, Statevector, MAX_SIM_QUBITS, MIN_POST_SELECTION};

/// Widest gate program the statevector simulator accepts.
pub const GATE_WIDTH_LIMIT: usize = MAX_SIM_QUBITS;

/// `(N, k, L)` caps for Gauss-Seidel on the gate backend.
pub const GATE_GS_LIMITS: (usize, usize, usize) = (4, 2, 3);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resources {
    pub width: usize,
    /// `None` on the emulation backend, which builds no circuit.
    pub gate_count: Option<usize>,
    pub term_count: usize,
}

/// Qubit layout: data `0..data_qubits`, multiplication ancillas
/// `pool_start..pool_start + pool`, then the coefficient register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcuLayout {
    pub data_qubits: usize,
    pub pool: usize,
    pub lcu_qubits: Vec<usize>,
    pub width: usize,
}

impl LcuLayout {
    pub fn pool_start(&self) -> usize {
        self.data_qubits
    }

    fn ancilla_qubits(&self) -> Vec<usize> {
        (self.data_qubits..self.width).collect()
    }
}

#[derive(Debug, Clone)]
enum Body {
    /// `sign` is a global phase when the coefficient register is empty.
    Gate { circuit: Circuit, sign: f64 },
    Emulation,
}

#[derive(Debug, Clone)]
pub struct LcuProgram {
    pub expansion: LcuExpansion,
    pub backend: Backend,
    pub layout: LcuLayout,
    pub normalization: NormalizationState,
    body: Body,
}

impl LcuProgram {
    pub fn circuit(&self) -> Option<&Circuit> {
        match &self.body {
            Body::Gate { circuit, .. } => Some(circuit),
            Body::Emulation => None,
        }
    }

    pub fn resources(&self) -> Resources {
        let width = match self.expansion.scheme {
            LcuScheme::QForm => estimate_resources(self.expansion.dim, self.expansion.k, WidthMode::QForm).width,
            _ => self.layout.width,
        };
        Resources { width, gate_count: self.circuit().map(Circuit::gate_count), term_count: self.expansion.terms.len() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub k: usize,
    pub fidelity_error: Option<f64>,
    pub success_probability: f64,
    pub width: usize,
    pub gate_count: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub k: usize,
    /// Unit-norm data-register amplitudes.
    pub solution: Vec<f64>,
    /// `x_k = raw_norm · solution`.
    pub raw_norm: f64,
    pub success_probability: f64,
    pub resources: Resources,
    pub fidelity_error: Option<f64>,
    /// One point per re-run `k' ≤ k`, or just the final one.
    pub error_trace: Vec<TracePoint>,
}

impl SolveResult {
    pub fn unnormalized(&self) -> Vec<f64> {
        self.solution.iter().map(|v| v * self.raw_norm).collect()
    }

    pub fn trace_point(&self) -> TracePoint {
        TracePoint {
            k: self.k,
            fidelity_error: self.fidelity_error,
            success_probability: self.success_probability,
            width: self.resources.width,
            gate_count: self.resources.gate_count,
        }
    }
}

/// Ancillas one operand's encoding consumes on the gate backend.
fn operand_ancillas(op: &Operand) -> usize {
    match &op.action {
        OperandAction::Matrix(_) => 1,
        OperandAction::Vector(_) => 0,
        OperandAction::Woodbury { levels, .. } => 2 * levels + ceil_log2(levels + 1),
    }
}

fn layout_for(expansion: &LcuExpansion) -> LcuLayout {
    let data_qubits = data_qubits_for(expansion.dim);
    let pool = expansion
        .terms
        .iter()
        .map(|t| t.factors.iter().map(|&f| operand_ancillas(&expansion.operands[f])).sum::<usize>())
        .max()
        .unwrap_or(0);
    let a = ceil_log2(expansion.terms.len());
    let width = data_qubits + pool + a;
    LcuLayout { data_qubits, pool, lcu_qubits: (data_qubits + pool..width).collect(), width }
}

fn check_width(width: usize) -> Result<()> {
    if width > GATE_WIDTH_LIMIT {
        return Err(Error::Capacity { what: "gate program width".into(), required: width, limit: GATE_WIDTH_LIMIT });
    }
    Ok(())
}

/// Prepare–select–unprepare over `terms` on a register with data qubits
/// `0..data_qubits`, the multiplication pool above, the coefficient register
/// on top. Returns the circuit and the global sign left over when there is a
/// single term.
fn lcu_circuit(
    data_qubits: usize,
    pool: usize,
    terms: &[(f64, Vec<&BlockEncoding>)],
    amplitudes: &[f64],
) -> Result<(Circuit, f64)> {
    let a = ceil_log2(terms.len());
    let width = data_qubits + pool + a;
    check_width(width)?;
    let lcu: Vec<usize> = (data_qubits + pool..width).collect();
    let mut circuit = Circuit::new(width);
    if a == 0 {
        let (c, _) = product_circuit(&terms[0].1, data_qubits, width)?;
        circuit.append_block("term 0", &c)?;
        return Ok((circuit, terms[0].0));
    }
    let prep = match block_encode_vector(amplitudes, Backend::Gate)?.realization {
        Realization::Circuit(c) => c.remap(&lcu, width)?,
        _ => unreachable!("gate backend preparations are circuits"),
    };
    circuit.append_block("prepare", &prep)?;
    for (j, (sign, factors)) in terms.iter().enumerate() {
        let (c, _) = product_circuit(factors, data_qubits, width)?;
        let pattern: Vec<bool> = (0..a).map(|b| j >> b & 1 == 1).collect();
        let mut block = controlled_circuit(&c, &lcu, &pattern)?;
        if *sign < 0.0 {
            let flip = Circuit::from_gates(a, basis_phase_flip(j, a))?;
            block.append(&flip.remap(&lcu, width)?)?;
        }
        circuit.append_block(&format!("term {j}"), &block)?;
    }
    circuit.append_block("unprepare", &prep.inverse())?;
    Ok((circuit, 1.0))
}

/// Nested LCU for `Ω/α_Ω = Σ_l (−D⁻¹B)^l / Σ_l (d̃ b̃)^l`.
fn woodbury_encoding(op: &Operand, dim: usize) -> Result<BlockEncoding> {
    let OperandAction::Woodbury { diag_inv, lower, levels, dinv_alpha, lower_alpha } = &op.action else {
        unreachable!("called on a Woodbury operand");
    };
    let dinv_dense = DenseMatrix::from_diagonal(diag_inv);
    let d = block_encode_matrix_with_alpha(&dinv_dense, *dinv_alpha, Backend::Gate)?;
    let b = block_encode_matrix_with_alpha(&lower.to_dense(), *lower_alpha, Backend::Gate)?;
    let ratio = dinv_alpha * lower_alpha;
    let terms: Vec<(f64, Vec<&BlockEncoding>)> = (0..=*levels)
        .map(|l| {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let mut f = Vec::with_capacity(2 * l);
            for _ in 0..l {
                f.push(&d);
                f.push(&b);
            }
            (sign, f)
        })
        .collect();
    let coeffs: Vec<f64> = (0..=*levels).map(|l| ratio.powi(l as i32)).collect();
    let total: f64 = coeffs.iter().sum();
    let mut amplitudes: Vec<f64> = coeffs.iter().map(|c| (c / total).sqrt()).collect();
    let a = ceil_log2(levels + 1);
    amplitudes.resize(1 << a, 0.0);
    let data_qubits = data_qubits_for(dim);
    let (circuit, _) = lcu_circuit(data_qubits, 2 * levels, &terms, &amplitudes)?;
    Ok(BlockEncoding {
        source_dim: dim,
        data_qubits,
        ancillas: 2 * levels + a,
        alpha: total,
        kind: EncodingKind::Matrix,
        realization: Realization::Circuit(circuit),
    })
}

fn gate_encoding(op: &Operand, dim: usize) -> Result<BlockEncoding> {
    match &op.action {
        OperandAction::Matrix(m) => block_encode_matrix_with_alpha(&m.to_dense(), op.alpha, Backend::Gate),
        OperandAction::Vector(v) => block_encode_vector(v, Backend::Gate),
        OperandAction::Woodbury { .. } => woodbury_encoding(op, dim),
    }
}

/// Lay the expansion out for `backend`. The gate backend builds the full
/// circuit; the emulation backend only records the bookkeeping.
pub fn assemble_lcu_program(expansion: &LcuExpansion, backend: Backend) -> Result<LcuProgram> {
    let normalization = build_coefficients(expansion)?;
    let layout = layout_for(expansion);
    let body = match backend {
        Backend::Emulation => Body::Emulation,
        Backend::Gate => {
            match expansion.scheme {
                LcuScheme::QForm => {
                    return Err(Error::Parameter("the q-form expansion runs on the emulation backend only".into()))
                }
                LcuScheme::GaussSeidel { levels } => {
                    let (n, k, l) = GATE_GS_LIMITS;
                    for (what, got, cap) in [("system size", expansion.dim, n), ("k", expansion.k, k), ("L", levels, l)] {
                        if got > cap {
                            return Err(Error::Capacity {
                                what: format!("gate-backend Gauss-Seidel {what}"),
                                required: got,
                                limit: cap,
                            });
                        }
                    }
                }
                LcuScheme::Jacobi => {}
            }
            check_width(layout.width)?;
            let encodings: Vec<Option<BlockEncoding>> = expansion
                .operands
                .iter()
                .enumerate()
                .map(|(i, op)| {
                    if expansion.terms.iter().any(|t| t.factors.contains(&i)) {
                        gate_encoding(op, expansion.dim).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<_>>()?;
            let terms: Vec<(f64, Vec<&BlockEncoding>)> = expansion
                .terms
                .iter()
                .map(|t| (t.sign, t.factors.iter().map(|&f| encodings[f].as_ref().unwrap()).collect()))
                .collect();
            let (circuit, sign) = lcu_circuit(layout.data_qubits, layout.pool, &terms, &normalization.amplitudes)?;
            Body::Gate { circuit, sign }
        }
    };
    Ok(LcuProgram { expansion: expansion.clone(), backend, layout, normalization, body })
}

/// `Σ_j sign_j (c_j/Σc) · F_1 ⋯ F_m |v⟩` with every factor normalised by
/// its subnormalisation. Products sharing a suffix reuse it.
fn emulate(expansion: &LcuExpansion) -> Vec<f64> {
    let total = expansion.coefficient_sum();
    let mut cache: HashMap<&[usize], Vec<f64>> = HashMap::new();
    let mut out = vec![0.0; expansion.dim];
    for term in &expansion.terms {
        let f = &term.factors;
        // Every suffix of a cached product is cached too.
        let mut have = f.len();
        while have > 0 && cache.contains_key(&f[have - 1..]) {
            have -= 1;
        }
        for i in (0..have).rev() {
            let v = match cache.get(&f[i + 1..]) {
                Some(prev) => expansion.operands[f[i]].apply_normalized(prev),
                None => expansion.operands[f[i]].apply_normalized(&[]),
            };
            cache.insert(&f[i..], v);
        }
        let v = &cache[&f[..]];
        let w = term.sign * term.coefficient / total;
        out.iter_mut().zip(v).for_each(|(o, x)| *o += w * x);
    }
    out
}

/// Run the program and read out the post-selected data register.
pub fn execute(program: &LcuProgram) -> Result<SolveResult> {
    let expansion = &program.expansion;
    let total = expansion.coefficient_sum();
    let (solution, p) = match &program.body {
        Body::Emulation => {
            let raw = emulate(expansion);
            let p = norm2(&raw).powi(2);
            if p < MIN_POST_SELECTION {
                return Err(Error::PostSelection { probability: p });
            }
            let s = p.sqrt();
            (raw.into_iter().map(|v| v / s).collect::<Vec<_>>(), p)
        }
        Body::Gate { circuit, sign } => {
            let state = run_circuit(circuit, Statevector::zero(circuit.n_qubits())?)?;
            let ancillas = program.layout.ancilla_qubits();
            let (reduced, p) = if ancillas.is_empty() { (state, 1.0) } else { post_select_zeros(&state, &ancillas)? };
            let amps = reduced.to_real(1e-9)?;
            (amps[..expansion.dim].iter().map(|v| v * sign).collect(), p)
        }
    };
    let fidelity = expansion.reference.as_ref().map(|r| fidelity_error(&solution, r));
    let mut result = SolveResult {
        k: expansion.k,
        solution,
        raw_norm: total * p.sqrt(),
        success_probability: p,
        resources: program.resources(),
        fidelity_error: fidelity,
        error_trace: Vec::new(),
    };
    result.error_trace.push(result.trace_point());
    Ok(result)
}

pub fn build_expansion(split: &SplitSystem, scheme: LcuScheme, k: usize) -> Result<LcuExpansion> {
    match scheme {
        LcuScheme::Jacobi => build_jacobi_expansion(split, k),
        LcuScheme::GaussSeidel { levels } => build_gauss_seidel_expansion(split, k, levels),
        LcuScheme::QForm => build_q_form_expansion(split, k),
    }
}

/// Build, assemble and execute at `k`. With `trace` the program is rebuilt
/// and re-run for every `k' = 0..=k`, since earlier iterates are not
/// accessible from inside one circuit. Trace points whose iterate vanishes
/// (no state to prepare) are left out.
pub fn solve(split: &SplitSystem, scheme: LcuScheme, k: usize, backend: Backend, trace: bool) -> Result<SolveResult> {
    let run = |kk| execute(&assemble_lcu_program(&build_expansion(split, scheme, kk)?, backend)?);
    let mut result = run(k)?;
    if trace {
        let mut points = Vec::with_capacity(k + 1);
        for kk in 0..k {
            match run(kk) {
                Ok(r) => points.push(r.trace_point()),
                Err(Error::Degenerate(_) | Error::PostSelection { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        points.push(result.trace_point());
        result.error_trace = points;
    }
    Ok(result)
}

/// `⟨x|M|x⟩` for the unit-norm solution state.
pub fn expectation(result: &SolveResult, observable: &DenseMatrix) -> Result<f64> {
    let n = result.solution.len();
    if observable.rows() != n || observable.cols() != n {
        return Err(Error::Dimension(format!(
            "observable is {}x{}, state has {n} amplitudes",
            observable.rows(),
            observable.cols()
        )));
    }
    if observable.max_abs_diff(&observable.transpose()) > 1e-12 * observable.max_abs().max(1.0) {
        return Err(Error::Parameter("observable must be symmetric".into()));
    }
    let x = &result.solution;
    Ok((0..n).map(|i| x[i] * (0..n).map(|j| observable[(i, j)] * x[j]).sum::<f64>()).sum())
}

/// CSV rows `k, fidelity_error, success_probability, width, gate_count`;
/// unknown values are left empty.
pub fn write_results_csv<W: Write>(points: &[TracePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "fidelity_error", "success_probability", "width", "gate_count"])?;
    for p in points {
        w.write_record([
            p.k.to_string(),
            p.fidelity_error.map(|e| format!("{e:.6e}")).unwrap_or_default(),
            format!("{:.12e}", p.success_probability),
            p.width.to_string(),
            p.gate_count.map(|g| g.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn save_results_csv(points: &[TracePoint], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_results_csv(points, std::io::BufWriter::new(f))
}
