use std::fmt::Write as _;

use super::{apply_gate, transposition_gates, Gate, Statevector};
use crate::error::{Error, Result};

/// Labelled gate range `[start, end)` used for resource accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedBlock {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    blocks: Vec<NamedBlock>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new(), blocks: Vec::new() }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn blocks(&self) -> &[NamedBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Gates charged with permutations at their decomposed length.
    pub fn gate_count(&self) -> usize {
        self.gates.iter().map(Gate::cost).sum()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Append `other` (on the same or a narrower register), keeping its blocks.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::Dimension(format!(
                "cannot append a {}-qubit circuit to a {}-qubit one",
                other.n_qubits, self.n_qubits
            )));
        }
        let off = self.gates.len();
        self.gates.extend(other.gates.iter().cloned());
        self.blocks.extend(other.blocks.iter().map(|b| NamedBlock {
            name: b.name.clone(),
            start: b.start + off,
            end: b.end + off,
        }));
        Ok(())
    }

    /// Append `other` as a single named block.
    pub fn append_block(&mut self, name: &str, other: &Circuit) -> Result<()> {
        let start = self.gates.len();
        self.append(other)?;
        self.blocks.push(NamedBlock { name: name.to_string(), start, end: self.gates.len() });
        Ok(())
    }

    /// Gate count inside every block with the given name.
    pub fn block_gate_count(&self, name: &str) -> usize {
        self.blocks
            .iter()
            .filter(|b| b.name == name)
            .map(|b| self.gates[b.start..b.end].iter().map(Gate::cost).sum::<usize>())
            .sum()
    }

    pub fn inverse(&self) -> Circuit {
        let n = self.gates.len();
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            blocks: self
                .blocks
                .iter()
                .map(|b| NamedBlock { name: b.name.clone(), start: n - b.end, end: n - b.start })
                .collect(),
        }
    }

    /// Relabel qubit `q` as `map[q]` on an `n_qubits`-wide register.
    pub fn remap(&self, map: &[usize], n_qubits: usize) -> Result<Circuit> {
        if map.len() < self.n_qubits {
            return Err(Error::Dimension(format!(
                "qubit map covers {} of {} qubits",
                map.len(),
                self.n_qubits
            )));
        }
        let mut out = Circuit::new(n_qubits);
        for g in &self.gates {
            out.push(g.remap(map))?;
        }
        out.blocks = self.blocks.clone();
        Ok(out)
    }

    /// Same gates on a wider register.
    pub fn widened(&self, n_qubits: usize) -> Result<Circuit> {
        let map: Vec<usize> = (0..self.n_qubits).collect();
        self.remap(&map, n_qubits)
    }

    /// Rebuild with every gate replaced by `f(gate)`, carrying blocks over.
    fn map_gates(&self, n_qubits: usize, f: impl Fn(&Gate) -> Vec<Gate>) -> Result<Circuit> {
        let mut out = Circuit::new(n_qubits);
        let mut starts = Vec::with_capacity(self.gates.len() + 1);
        for g in &self.gates {
            starts.push(out.gates.len());
            for h in f(g) {
                out.push(h)?;
            }
        }
        starts.push(out.gates.len());
        out.blocks = self
            .blocks
            .iter()
            .map(|b| NamedBlock { name: b.name.clone(), start: starts[b.start], end: starts[b.end] })
            .collect();
        Ok(out)
    }
}

pub fn run_circuit(circuit: &Circuit, initial: Statevector) -> Result<Statevector> {
    if initial.n_qubits() != circuit.n_qubits {
        return Err(Error::Dimension(format!(
            "{}-qubit circuit given a {}-qubit state",
            circuit.n_qubits,
            initial.n_qubits()
        )));
    }
    let mut s = initial;
    for g in &circuit.gates {
        apply_gate(&mut s, g)?;
    }
    Ok(s)
}

/// Replace every basis permutation by its literal gate decomposition.
pub fn expand_permutations(circuit: &Circuit) -> Result<Circuit> {
    circuit.map_gates(circuit.n_qubits, |g| match g {
        Gate::Permutation { i, j, qubits } => transposition_gates(*i, *j, qubits),
        g => vec![g.clone()],
    })
}

/// Circuit applying `circuit` only when `controls` read `pattern`.
///
/// 0-controls are X-conjugated around the whole block; inside, every gate
/// gains the full control set. The result is as wide as the circuit or the
/// highest control, whichever is larger.
pub fn controlled_circuit(circuit: &Circuit, controls: &[usize], pattern: &[bool]) -> Result<Circuit> {
    if controls.len() != pattern.len() {
        return Err(Error::Parameter(format!(
            "{} control qubits but a {}-bit pattern",
            controls.len(),
            pattern.len()
        )));
    }
    for (pos, c) in controls.iter().enumerate() {
        if controls[..pos].contains(c) {
            return Err(Error::Parameter(format!("control qubit {c} listed twice")));
        }
    }
    if let Some(g) = circuit.gates.iter().find(|g| g.qubits().iter().any(|q| controls.contains(q))) {
        return Err(Error::Parameter(format!("control register overlaps gate {g:?}")));
    }
    let n = controls.iter().map(|c| c + 1).max().unwrap_or(0).max(circuit.n_qubits);
    let with = |qs: &[usize]| {
        let mut v = qs.to_vec();
        v.extend_from_slice(controls);
        v
    };
    let inner = circuit.map_gates(n, |g| match g {
        Gate::X { target } => vec![Gate::Mcx { controls: with(&[]), target: *target }],
        Gate::Cnot { control, target } => vec![Gate::Mcx { controls: with(&[*control]), target: *target }],
        Gate::Mcx { controls: c, target } => vec![Gate::Mcx { controls: with(c), target: *target }],
        // The outer CNOTs cancel when the controls are off.
        Gate::Swap { a, b } => vec![
            Gate::Cnot { control: *a, target: *b },
            Gate::Mcx { controls: with(&[*b]), target: *a },
            Gate::Cnot { control: *a, target: *b },
        ],
        Gate::Mcry { controls: c, target, theta } => {
            vec![Gate::Mcry { controls: with(c), target: *target, theta: *theta }]
        }
        Gate::Mcz { controls: c, target } => vec![Gate::Mcz { controls: with(c), target: *target }],
        Gate::Permutation { i, j, qubits } => {
            let high = ((1usize << controls.len()) - 1) << qubits.len();
            vec![Gate::Permutation { i: i | high, j: j | high, qubits: with(qubits) }]
        }
    })?;
    let flips: Vec<Gate> = controls
        .iter()
        .zip(pattern)
        .filter(|(_, &p)| !p)
        .map(|(&c, _)| Gate::X { target: c })
        .collect();
    let mut out = Circuit::new(n);
    for g in &flips {
        out.push(g.clone())?;
    }
    out.append(&inner)?;
    for g in &flips {
        out.push(g.clone())?;
    }
    Ok(out)
}

fn list(qs: &[usize]) -> String {
    if qs.is_empty() {
        "-".into()
    } else {
        qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Plain-text dump, one gate per line, with an optional `alpha` metadata line.
pub fn dump_circuit(circuit: &Circuit, alpha: Option<f64>) -> String {
    let mut s = String::new();
    writeln!(s, "qubits {}", circuit.n_qubits).unwrap();
    if let Some(a) = alpha {
        writeln!(s, "alpha {a:?}").unwrap();
    }
    for b in &circuit.blocks {
        let name: String = b.name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
        writeln!(s, "block {name} {} {}", b.start, b.end).unwrap();
    }
    for g in &circuit.gates {
        match g {
            Gate::X { target } => writeln!(s, "x {target}"),
            Gate::Cnot { control, target } => writeln!(s, "cx {control} {target}"),
            Gate::Swap { a, b } => writeln!(s, "swap {a} {b}"),
            Gate::Mcx { controls, target } => writeln!(s, "mcx {} {target}", list(controls)),
            Gate::Mcry { controls, target, theta } => {
                writeln!(s, "mcry {} {target} {theta:?}", list(controls))
            }
            Gate::Mcz { controls, target } => writeln!(s, "mcz {} {target}", list(controls)),
            Gate::Permutation { i, j, qubits } => writeln!(s, "perm {i} {j} {}", list(qubits)),
        }
        .unwrap();
    }
    s
}

/// Inverse of [`dump_circuit`].
pub fn parse_circuit(text: &str) -> Result<(Circuit, Option<f64>)> {
    let bad = |line: usize, msg: &str| Error::InvalidGate(format!("line {line}: {msg}"));
    let mut circuit: Option<Circuit> = None;
    let mut alpha = None;
    let mut blocks = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let num = |k: usize| -> Result<usize> {
            tok.get(k).and_then(|t| t.parse().ok()).ok_or_else(|| bad(ln, "expected an integer"))
        };
        let qs = |k: usize| -> Result<Vec<usize>> {
            match tok.get(k) {
                Some(&"-") => Ok(Vec::new()),
                Some(t) => t
                    .split(',')
                    .map(|q| q.parse().map_err(|_| bad(ln, "bad qubit list")))
                    .collect(),
                None => Err(bad(ln, "missing qubit list")),
            }
        };
        let arity = |n: usize| if tok.len() == n { Ok(()) } else { Err(bad(ln, "wrong field count")) };
        match tok[0] {
            "qubits" => {
                arity(2)?;
                circuit = Some(Circuit::new(num(1)?));
                continue;
            }
            "alpha" => {
                arity(2)?;
                alpha = Some(tok[1].parse::<f64>().map_err(|_| bad(ln, "bad alpha"))?);
                continue;
            }
            "block" => {
                arity(4)?;
                blocks.push(NamedBlock { name: tok[1].to_string(), start: num(2)?, end: num(3)? });
                continue;
            }
            _ => {}
        }
        let gate = match tok[0] {
            "x" => {
                arity(2)?;
                Gate::X { target: num(1)? }
            }
            "cx" => {
                arity(3)?;
                Gate::Cnot { control: num(1)?, target: num(2)? }
            }
            "swap" => {
                arity(3)?;
                Gate::Swap { a: num(1)?, b: num(2)? }
            }
            "mcx" => {
                arity(3)?;
                Gate::Mcx { controls: qs(1)?, target: num(2)? }
            }
            "mcry" => {
                arity(4)?;
                let theta = tok[3].parse::<f64>().map_err(|_| bad(ln, "bad angle"))?;
                Gate::Mcry { controls: qs(1)?, target: num(2)?, theta }
            }
            "mcz" => {
                arity(3)?;
                Gate::Mcz { controls: qs(1)?, target: num(2)? }
            }
            "perm" => {
                arity(4)?;
                Gate::Permutation { i: num(1)?, j: num(2)?, qubits: qs(3)? }
            }
            other => return Err(bad(ln, &format!("unknown gate kind '{other}'"))),
        };
        circuit.as_mut().ok_or_else(|| bad(ln, "gate before 'qubits' header"))?.push(gate)?;
    }
    let mut circuit = circuit.ok_or_else(|| Error::InvalidGate("missing 'qubits' header".into()))?;
    if let Some(b) = blocks.iter().find(|b| b.start > b.end || b.end > circuit.gates.len()) {
        return Err(Error::InvalidGate(format!("block '{}' outside the gate list", b.name)));
    }
    circuit.blocks = blocks;
    Ok((circuit, alpha))
}
