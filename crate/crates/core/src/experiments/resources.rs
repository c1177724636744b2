use crate::blockenc::{block_encode_matrix, Backend};
use crate::error::Result;
use crate::iterate::{split_jacobi, InitialGuess};
use crate::lcu::{assemble_lcu_program, build_jacobi_expansion, estimate_resources, WidthMode};
use crate::numkit::{tridiagonal, CsrMatrix};

/// Largest system whose encoding is synthesised to measure `C`.
const MEASURE_LIMIT: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ResourcesReport {
    pub n: usize,
    pub k: usize,
    pub width_multiplication: usize,
    pub width_q_form: usize,
    /// Size at which the per-encoding gate count was measured.
    pub measured_n: usize,
    /// Gate count `C` of one block encoding of `tridiag(−1, 0, −1)`.
    pub gates_per_encoding: usize,
    /// Gate counts of assembled Jacobi programs at `measured_n`, `(k, width, gates)`.
    pub small_programs: Vec<(usize, usize, usize)>,
    /// `k² · C`.
    pub depth_estimate: usize,
}

impl ResourcesReport {
    pub fn render(&self) -> String {
        let mut s = format!(
            "N = {}, k = {}\nwidth (multiplication) = {}\nwidth (q-form)         = {}\nC (gates per encoding, N = {}) = {}\ndepth class O(k^2): k^2 * C = {}\n",
            self.n, self.k, self.width_multiplication, self.width_q_form, self.measured_n, self.gates_per_encoding, self.depth_estimate
        );
        for (k, w, g) in &self.small_programs {
            s.push_str(&format!("assembled Jacobi program N = {}, k = {k}: width {w}, gates {g}\n", self.measured_n));
        }
        s
    }
}

pub fn resources_report(n: usize, k: usize) -> Result<ResourcesReport> {
    let multiplication = estimate_resources(n, k, WidthMode::Multiplication);
    let q_form = estimate_resources(n, k, WidthMode::QForm);
    let measured_n = n.clamp(2, MEASURE_LIMIT);
    let r = tridiagonal(measured_n, -1.0, 0.0, -1.0);
    let c = block_encode_matrix(&r, Backend::Gate)?.circuit().map(|c| c.gate_count()).unwrap_or(0);
    let small_n = n.clamp(2, 4);
    let a = CsrMatrix::from_dense(&tridiagonal(small_n, -1.0, 4.0, -1.0))?;
    let split = split_jacobi(&a, &vec![1.0; small_n], &InitialGuess::Rhs)?;
    let mut small_programs = Vec::new();
    for kk in 1..=k.min(2) {
        let p = assemble_lcu_program(&build_jacobi_expansion(&split, kk)?, Backend::Gate)?;
        let res = p.resources();
        small_programs.push((kk, res.width, res.gate_count.unwrap_or(0)));
    }
    Ok(ResourcesReport {
        n,
        k,
        width_multiplication: multiplication.width,
        width_q_form: q_form.width,
        measured_n,
        gates_per_encoding: c,
        small_programs,
        depth_estimate: multiplication.depth_estimate(c),
    })
}
