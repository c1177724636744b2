//! Statevector simulator over the small real gate set used by the
//! block-encoding and LCU circuits.
//!
//! Qubit `q` is bit `q` of the basis index, so qubit 0 is least significant.
//! `Ry(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`.

mod circuit;
mod permute;

pub use circuit::{
    controlled_circuit, dump_circuit, expand_permutations, parse_circuit, run_circuit, Circuit,
    NamedBlock,
};
pub use permute::{permutation_to_gates, transposition_gates};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::DenseMatrix;

/// Dense-unitary utilities refuse registers wider than this.
pub const MAX_UNITARY_QUBITS: usize = 10;

/// Largest register the simulator will allocate.
pub const MAX_SIM_QUBITS: usize = 24;

/// Post-selection below this probability is treated as failure.
pub const MIN_POST_SELECTION: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_SIM_QUBITS {
            return Err(Error::Capacity {
                what: "statevector qubits".into(),
                required: n_qubits,
                limit: MAX_SIM_QUBITS,
            });
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Dimension(format!("basis index {index} outside 2^{n_qubits}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wrap raw amplitudes; the length must be a power of two. No
    /// normalisation is imposed.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Dimension(format!("amplitude count {len} is not a power of two")));
        }
        Ok(Self { n_qubits: len.trailing_zeros() as usize, amps })
    }

    pub fn from_real(v: &[f64]) -> Result<Self> {
        Self::from_amplitudes(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real parts, failing if any imaginary part exceeds `tol`.
    pub fn to_real(&self, tol: f64) -> Result<Vec<f64>> {
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if a.im.abs() > tol {
                    Err(Error::Parameter(format!("amplitude {i} has imaginary part {}", a.im)))
                } else {
                    Ok(a.re)
                }
            })
            .collect()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X { target: usize },
    Cnot { control: usize, target: usize },
    Swap { a: usize, b: usize },
    /// X on `target` when every control is 1.
    Mcx { controls: Vec<usize>, target: usize },
    /// `Ry(theta)` on `target` when every control is 1.
    Mcry { controls: Vec<usize>, target: usize, theta: f64 },
    /// Phase −1 on basis states where every control and the target are 1.
    Mcz { controls: Vec<usize>, target: usize },
    /// Exchange basis states `i` and `j` of the register `qubits`
    /// (`qubits[b]` carries bit `b` of the local index).
    Permutation { i: usize, j: usize, qubits: Vec<usize> },
}

impl Gate {
    /// Every qubit the gate reads or writes.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X { target } => vec![*target],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Swap { a, b } => vec![*a, *b],
            Gate::Mcx { controls, target }
            | Gate::Mcry { controls, target, .. }
            | Gate::Mcz { controls, target } => {
                let mut q = controls.clone();
                q.push(*target);
                q
            }
            Gate::Permutation { qubits, .. } => qubits.clone(),
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let q = self.qubits();
        for (pos, &a) in q.iter().enumerate() {
            if a >= n_qubits {
                return Err(Error::QubitRange { index: a, n_qubits });
            }
            if q[..pos].contains(&a) {
                return Err(Error::InvalidGate(format!("qubit {a} used twice in {self:?}")));
            }
        }
        match self {
            Gate::Mcry { theta, .. } if !theta.is_finite() => {
                Err(Error::InvalidGate(format!("non-finite angle {theta}")))
            }
            Gate::Permutation { i, j, qubits } => {
                let dim = 1usize.checked_shl(qubits.len() as u32).unwrap_or(0);
                if qubits.is_empty() || *i >= dim || *j >= dim {
                    Err(Error::InvalidGate(format!("permutation ({i}, {j}) outside its register")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Gate count charged for resource estimates; permutations are charged
    /// at the length of their literal decomposition.
    pub fn cost(&self) -> usize {
        match self {
            Gate::Permutation { i, j, qubits } => transposition_gates(*i, *j, qubits).len(),
            _ => 1,
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Mcry { controls, target, theta } => Gate::Mcry {
                controls: controls.clone(),
                target: *target,
                theta: -theta,
            },
            g => g.clone(),
        }
    }

    /// Relabel qubits through `map` (old index → new index).
    pub fn remap(&self, map: &[usize]) -> Gate {
        let m = |q: &usize| map[*q];
        let mv = |qs: &Vec<usize>| qs.iter().map(m).collect::<Vec<_>>();
        match self {
            Gate::X { target } => Gate::X { target: m(target) },
            Gate::Cnot { control, target } => Gate::Cnot { control: m(control), target: m(target) },
            Gate::Swap { a, b } => Gate::Swap { a: m(a), b: m(b) },
            Gate::Mcx { controls, target } => Gate::Mcx { controls: mv(controls), target: m(target) },
            Gate::Mcry { controls, target, theta } => Gate::Mcry {
                controls: mv(controls),
                target: m(target),
                theta: *theta,
            },
            Gate::Mcz { controls, target } => Gate::Mcz { controls: mv(controls), target: m(target) },
            Gate::Permutation { i, j, qubits } => Gate::Permutation { i: *i, j: *j, qubits: mv(qubits) },
        }
    }
}

fn mask(qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |m, q| m | (1 << q))
}

/// Global basis index of local index `local` on register `qubits`.
fn scatter(local: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .filter(|(b, _)| local >> b & 1 == 1)
        .fold(0, |acc, (_, q)| acc | (1 << q))
}

pub fn apply_gate(state: &mut Statevector, gate: &Gate) -> Result<()> {
    gate.validate(state.n_qubits)?;
    let amps = &mut state.amps;
    match gate {
        Gate::X { target } => flip(amps, 0, *target),
        Gate::Cnot { control, target } => flip(amps, 1 << control, *target),
        Gate::Mcx { controls, target } => flip(amps, mask(controls), *target),
        Gate::Swap { a, b } => {
            let (ma, mb) = (1usize << a, 1usize << b);
            for idx in 0..amps.len() {
                if idx & ma != 0 && idx & mb == 0 {
                    amps.swap(idx, idx ^ ma ^ mb);
                }
            }
        }
        Gate::Mcry { controls, target, theta } => {
            let cm = mask(controls);
            let t = 1usize << target;
            let (s, c) = (theta / 2.0).sin_cos();
            for idx in 0..amps.len() {
                if idx & t == 0 && idx & cm == cm {
                    let (a0, a1) = (amps[idx], amps[idx | t]);
                    amps[idx] = a0 * c - a1 * s;
                    amps[idx | t] = a0 * s + a1 * c;
                }
            }
        }
        Gate::Mcz { controls, target } => {
            let m = mask(controls) | (1 << target);
            for (idx, a) in amps.iter_mut().enumerate() {
                if idx & m == m {
                    *a = -*a;
                }
            }
        }
        Gate::Permutation { i, j, qubits } => {
            let (gi, gj) = (scatter(*i, qubits), scatter(*j, qubits));
            if gi != gj {
                let rest = !mask(qubits) & (amps.len() - 1);
                // Iterate over every assignment of the untouched qubits.
                let mut sub = 0usize;
                loop {
                    amps.swap(sub | gi, sub | gj);
                    if sub == rest {
                        break;
                    }
                    sub = (sub.wrapping_sub(rest)) & rest;
                }
            }
        }
    }
    Ok(())
}

fn flip(amps: &mut [Complex64], control_mask: usize, target: usize) {
    let t = 1usize << target;
    for idx in 0..amps.len() {
        if idx & t == 0 && idx & control_mask == control_mask {
            amps.swap(idx, idx | t);
        }
    }
}

/// Project the listed qubits onto `|0⟩`, drop them, and renormalise.
/// Returns the reduced state and the pre-projection weight of the kept branch.
pub fn post_select_zeros(state: &Statevector, qubits: &[usize]) -> Result<(Statevector, f64)> {
    let (raw, p) = project_zeros(state, qubits)?;
    if p < MIN_POST_SELECTION {
        return Err(Error::PostSelection { probability: p });
    }
    let s = p.sqrt();
    let amps = raw.amps.into_iter().map(|a| a / s).collect();
    Ok((Statevector { n_qubits: raw.n_qubits, amps }, p))
}

/// Like [`post_select_zeros`] without renormalisation.
pub fn project_zeros(state: &Statevector, qubits: &[usize]) -> Result<(Statevector, f64)> {
    if qubits.is_empty() {
        return Err(Error::Parameter("post-selection needs at least one qubit".into()));
    }
    for (pos, &q) in qubits.iter().enumerate() {
        if q >= state.n_qubits {
            return Err(Error::QubitRange { index: q, n_qubits: state.n_qubits });
        }
        if qubits[..pos].contains(&q) {
            return Err(Error::Parameter(format!("qubit {q} selected twice")));
        }
    }
    let sel = mask(qubits);
    let keep: Vec<usize> = (0..state.n_qubits).filter(|q| sel >> q & 1 == 0).collect();
    let mut out = Vec::with_capacity(1 << keep.len());
    for local in 0..1usize << keep.len() {
        out.push(state.amps[scatter(local, &keep)]);
    }
    let p = out.iter().map(|a| a.norm_sqr()).sum();
    Ok((Statevector { n_qubits: keep.len(), amps: out }, p))
}

/// Dense unitary of a circuit, one simulated column per basis state.
pub fn unitary(circuit: &Circuit) -> Result<DenseMatrix<Complex64>> {
    let n = circuit.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::Capacity {
            what: "dense unitary qubits".into(),
            required: n,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut u = DenseMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let out = run_circuit(circuit, Statevector::basis(n, col)?)?;
        for (row, a) in out.amps.into_iter().enumerate() {
            u[(row, col)] = a;
        }
    }
    Ok(u)
}

/// [`unitary`] for circuits known to be real.
pub fn real_unitary(circuit: &Circuit) -> Result<DenseMatrix> {
    unitary(circuit)?.to_real(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pauli_x_flips_zero() {
        let mut s = Statevector::zero(1).unwrap();
        apply_gate(&mut s, &Gate::X { target: 0 }).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0), c(1.0)]);
    }

    #[test]
    fn controlled_ry_pi_on_ones() {
        // Controls are qubits 1 and 2, target qubit 0: |11⟩|0⟩ is index 6.
        let mut s = Statevector::basis(3, 6).unwrap();
        apply_gate(&mut s, &Gate::Mcry { controls: vec![1, 2], target: 0, theta: PI }).unwrap();
        assert!((s.amplitudes()[7] - c(1.0)).norm() < 1e-15);
        assert!(s.amplitudes()[6].norm() < 1e-15);
        // Ry(π)|1⟩ = −|0⟩.
        let mut s = Statevector::basis(1, 1).unwrap();
        apply_gate(&mut s, &Gate::Mcry { controls: vec![], target: 0, theta: PI }).unwrap();
        assert!((s.amplitudes()[0] - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn basis_permutation_swaps_amplitudes() {
        let mut s = Statevector::from_real(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        apply_gate(&mut s, &Gate::Permutation { i: 1, j: 2, qubits: vec![0, 1] }).unwrap();
        assert_eq!(s.to_real(0.0).unwrap(), vec![0.1, 0.3, 0.2, 0.4]);
        // Sub-register permutation acts on every assignment of the other qubits.
        let mut s = Statevector::from_real(&(0..8).map(|v| v as f64).collect::<Vec<_>>()).unwrap();
        apply_gate(&mut s, &Gate::Permutation { i: 0, j: 1, qubits: vec![2] }).unwrap();
        assert_eq!(s.to_real(0.0).unwrap(), vec![4.0, 5.0, 6.0, 7.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn invalid_gates_rejected() {
        let mut s = Statevector::zero(2).unwrap();
        assert!(apply_gate(&mut s, &Gate::X { target: 2 }).is_err());
        assert!(apply_gate(&mut s, &Gate::Cnot { control: 1, target: 1 }).is_err());
        assert!(apply_gate(&mut s, &Gate::Mcry { controls: vec![], target: 0, theta: f64::NAN }).is_err());
        assert!(apply_gate(&mut s, &Gate::Permutation { i: 0, j: 4, qubits: vec![0, 1] }).is_err());
    }

    #[test]
    fn post_selection_examples() {
        let h = 1.0 / 2f64.sqrt();
        let bell = Statevector::from_real(&[h, 0.0, 0.0, h]).unwrap();
        let (s, p) = post_select_zeros(&bell, &[0]).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert_eq!(s.n_qubits(), 1);
        assert!((s.amplitudes()[0] - c(1.0)).norm() < 1e-15);

        // |ψ⟩ on qubits 1..2 tensored with |0⟩ on qubit 0.
        let psi = [0.6, 0.0, 0.0, 0.8];
        let mut full = vec![0.0; 8];
        for (k, v) in psi.iter().enumerate() {
            full[k << 1] = *v;
        }
        let (s, p) = post_select_zeros(&Statevector::from_real(&full).unwrap(), &[0]).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert_eq!(s.to_real(0.0).unwrap(), psi.to_vec());

        let one = Statevector::basis(1, 1).unwrap();
        assert!(matches!(post_select_zeros(&one, &[0]), Err(Error::PostSelection { .. })));
        assert!(post_select_zeros(&one, &[]).is_err());
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Statevector {
        let v: Vec<Complex64> =
            (0..1 << n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let s = Statevector::from_amplitudes(v).unwrap();
        let nrm = s.norm();
        Statevector::from_amplitudes(s.amplitudes().iter().map(|a| a / nrm).collect()).unwrap()
    }

    #[test]
    fn every_gate_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gates = [
            Gate::X { target: 2 },
            Gate::Cnot { control: 0, target: 3 },
            Gate::Swap { a: 1, b: 3 },
            Gate::Mcx { controls: vec![0, 1], target: 2 },
            Gate::Mcry { controls: vec![3], target: 0, theta: 0.37 },
            Gate::Mcz { controls: vec![1, 2], target: 0 },
            Gate::Permutation { i: 3, j: 12, qubits: vec![0, 1, 2, 3] },
        ];
        for g in &gates {
            let mut s = random_state(4, &mut rng);
            apply_gate(&mut s, g).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12, "{g:?}");
        }
    }
}
