//! Flat gate lists, so the same circuit can be run ideally or under noise.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pauli::{Pauli, PauliPair};
use crate::statevec::State;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// `exp(-i angle/2 σ_axis)`.
    Rotation { qubit: usize, axis: Pauli, angle: f64 },
    /// `exp(-i angle σσ)` on a pair.
    TwoPauli {
        i: usize,
        j: usize,
        basis: PauliPair,
        angle: f64,
    },
}

impl Gate {
    pub fn apply(&self, state: &mut State) -> Result<()> {
        match *self {
            Gate::Rotation { qubit, axis, angle } => state.rotate(qubit, axis, angle),
            Gate::TwoPauli { i, j, basis, angle } => state.apply_two_pauli_exp(i, j, basis, angle),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::TwoPauli { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn rotation(&mut self, qubit: usize, axis: Pauli, angle: f64) -> &mut Self {
        self.push(Gate::Rotation { qubit, axis, angle })
    }

    pub fn two_pauli(&mut self, i: usize, j: usize, basis: PauliPair, angle: f64) -> &mut Self {
        self.push(Gate::TwoPauli { i, j, basis, angle })
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Noiseless execution on `state`.
    pub fn run_on(&self, state: &mut State) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.apply(state))
    }

    pub fn run(&self, initial: &State) -> Result<State> {
        let mut s = initial.clone();
        self.run_on(&mut s)?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_and_run() {
        let mut c = Circuit::new(2);
        c.rotation(0, Pauli::X, std::f64::consts::PI)
            .two_pauli(0, 1, PauliPair::ZZ, 0.3);
        assert_eq!(c.gates().len(), 2);
        assert_eq!(c.two_qubit_count(), 1);
        let s = c.run(&State::zero(2).unwrap()).unwrap();
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-14);
    }
}
