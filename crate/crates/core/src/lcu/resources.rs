use super::ceil_log2;
use crate::blockenc::data_qubits_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthMode {
    /// One ancilla per multiplied block encoding.
    Multiplication,
    /// `Q = D⁻¹R` powers through a fixed-size signal register.
    QForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceEstimate {
    pub n: usize,
    pub k: usize,
    pub mode: WidthMode,
    pub width: usize,
    /// Number of block-encoding applications, `k²`.
    pub multiplications: usize,
}

impl ResourceEstimate {
    /// `k² · C` for a measured per-encoding gate count `C`.
    pub fn depth_estimate(&self, gates_per_encoding: usize) -> usize {
        self.multiplications * gates_per_encoding
    }

    pub fn depth_class(&self) -> String {
        format!("O(k^2) = {} multiplications x C", self.multiplications)
    }
}

/// Width `log₂N + 2k + ⌈log₂(k+1)⌉` (multiplication) or
/// `log₂N + 4 + ⌈log₂(k+1)⌉` (q-form). `N` is rounded up to a power of two.
pub fn estimate_resources(n: usize, k: usize, mode: WidthMode) -> ResourceEstimate {
    let data = data_qubits_for(n);
    let a = ceil_log2(k + 1);
    let width = match mode {
        WidthMode::Multiplication => data + 2 * k + a,
        WidthMode::QForm => data + 4 + a,
    };
    ResourceEstimate { n, k, mode, width, multiplications: k * k }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_examples() {
        assert_eq!(estimate_resources(128, 80, WidthMode::Multiplication).width, 174);
        assert_eq!(estimate_resources(128, 80, WidthMode::QForm).width, 18);
        assert_eq!(estimate_resources(128, 0, WidthMode::Multiplication).width, 7);
        assert_eq!(estimate_resources(2, 1, WidthMode::Multiplication).width, 4);
        assert_eq!(estimate_resources(4, 3, WidthMode::Multiplication).width, 10);
        let e = estimate_resources(16, 5, WidthMode::Multiplication);
        assert_eq!(e.depth_estimate(40), 25 * 40);
    }
}
