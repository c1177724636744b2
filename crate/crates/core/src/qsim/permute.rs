//! Transpositions of two basis states as X / CNOT / multi-controlled-X gates.
//!
//! The path `i = g_0, g_1, …, g_m = j` flips one differing bit at a time, so
//! neighbours differ in a single bit and each hop `τ_l = (g_l g_{l+1})` is an
//! X on that bit controlled by every other qubit of the register (0-controls
//! conjugated by X). Then `(i j) = τ_0 ⋯ τ_{m-2} τ_{m-1} τ_{m-2} ⋯ τ_0`.

use super::Gate;

/// Gates exchanging basis states `i` and `j` of an `n`-qubit register.
/// Empty when `i == j`.
pub fn permutation_to_gates(i: usize, j: usize, n: usize) -> Vec<Gate> {
    let qubits: Vec<usize> = (0..n).collect();
    transposition_gates(i, j, &qubits)
}

/// As [`permutation_to_gates`] on an arbitrary list of qubits, where
/// `qubits[b]` carries bit `b` of `i` and `j`.
pub fn transposition_gates(i: usize, j: usize, qubits: &[usize]) -> Vec<Gate> {
    if i == j {
        return Vec::new();
    }
    let diff = i ^ j;
    let bits: Vec<usize> = (0..qubits.len()).filter(|b| diff >> b & 1 == 1).collect();
    let mut path = vec![i];
    for &b in &bits {
        let last = *path.last().unwrap();
        path.push(last ^ (1 << b));
    }
    let hops: Vec<Vec<Gate>> = bits
        .iter()
        .zip(&path)
        .map(|(&b, &from)| hop(from, b, qubits))
        .collect();
    let m = hops.len();
    let mut out = Vec::new();
    for h in &hops[..m - 1] {
        out.extend(h.iter().cloned());
    }
    out.extend(hops[m - 1].iter().cloned());
    for h in hops[..m - 1].iter().rev() {
        out.extend(h.iter().cloned());
    }
    out
}

/// `(from, from ^ 1<<bit)` as one controlled X.
fn hop(from: usize, bit: usize, qubits: &[usize]) -> Vec<Gate> {
    let target = qubits[bit];
    let controls: Vec<usize> = (0..qubits.len()).filter(|&b| b != bit).map(|b| qubits[b]).collect();
    let zeros: Vec<usize> = (0..qubits.len())
        .filter(|&b| b != bit && from >> b & 1 == 0)
        .map(|b| qubits[b])
        .collect();
    let mut out: Vec<Gate> = zeros.iter().map(|&q| Gate::X { target: q }).collect();
    out.push(match controls.len() {
        0 => Gate::X { target },
        1 => Gate::Cnot { control: controls[0], target },
        _ => Gate::Mcx { controls, target },
    });
    out.extend(zeros.iter().map(|&q| Gate::X { target: q }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{real_unitary, Circuit};

    fn transposition_matrix(i: usize, j: usize, n: usize) -> crate::numkit::DenseMatrix {
        let dim = 1 << n;
        crate::numkit::DenseMatrix::from_fn(dim, dim, |r, c| {
            let image = if c == i { j } else if c == j { i } else { c };
            if r == image { 1.0 } else { 0.0 }
        })
    }

    #[test]
    fn small_cases() {
        assert_eq!(permutation_to_gates(0, 1, 1), vec![Gate::X { target: 0 }]);
        assert_eq!(permutation_to_gates(2, 3, 2), vec![Gate::Cnot { control: 1, target: 0 }]);
        assert!(permutation_to_gates(5, 5, 3).is_empty());
    }

    #[test]
    fn gray_path_for_one_and_six() {
        let gates = permutation_to_gates(1, 6, 3);
        let c = Circuit::from_gates(3, gates).unwrap();
        assert_eq!(real_unitary(&c).unwrap(), transposition_matrix(1, 6, 3));
    }

    #[test]
    fn sub_register_transposition() {
        // Swap local states 1 and 2 of qubits (3, 1): globally |q3=1⟩ ↔ |q1=1⟩.
        let gates = transposition_gates(1, 2, &[3, 1]);
        let c = Circuit::from_gates(4, gates).unwrap();
        let u = real_unitary(&c).unwrap();
        let direct = Circuit::from_gates(4, vec![Gate::Permutation { i: 1, j: 2, qubits: vec![3, 1] }]).unwrap();
        assert_eq!(u, real_unitary(&direct).unwrap());
    }
}
