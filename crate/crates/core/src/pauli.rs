//! Pauli operators and weighted Pauli strings.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "X" | "x" => Ok(Pauli::X),
            "Y" | "y" => Ok(Pauli::Y),
            "Z" | "z" => Ok(Pauli::Z),
            other => Err(Error::argument(format!("unknown Pauli `{other}`"))),
        }
    }
}

/// Two-body Pauli products available as native exponentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliPair {
    XX,
    ZZ,
}

/// Real coefficient times a tensor product of single-qubit Paulis.
///
/// The identity is the term with no factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    coefficient: f64,
    factors: BTreeMap<usize, Pauli>,
}

impl PauliTerm {
    /// Builds a term, rejecting repeated qubit indices.
    pub fn new(coefficient: f64, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(q, p) in factors {
            if map.insert(q, p).is_some() {
                return Err(Error::argument(format!("qubit {q} appears twice in Pauli term")));
            }
        }
        Ok(Self {
            coefficient,
            factors: map,
        })
    }

    pub fn identity(coefficient: f64) -> Self {
        Self {
            coefficient,
            factors: BTreeMap::new(),
        }
    }

    pub fn single(coefficient: f64, qubit: usize, pauli: Pauli) -> Self {
        let mut factors = BTreeMap::new();
        factors.insert(qubit, pauli);
        Self {
            coefficient,
            factors,
        }
    }

    pub fn pair(coefficient: f64, a: usize, b: usize, pauli: Pauli) -> Result<Self> {
        Self::new(coefficient, &[(a, pauli), (b, pauli)])
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn factors(&self) -> &BTreeMap<usize, Pauli> {
        &self.factors
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn with_coefficient(&self, coefficient: f64) -> Self {
        Self {
            coefficient,
            factors: self.factors.clone(),
        }
    }

    /// Same Pauli string with every qubit index shifted by `offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        Self {
            coefficient: self.coefficient,
            factors: self.factors.iter().map(|(&q, &p)| (q + offset, p)).collect(),
        }
    }

    /// Largest qubit index plus one (0 for the identity).
    pub fn support_width(&self) -> usize {
        self.factors.keys().next_back().map_or(0, |&q| q + 1)
    }

    pub fn check_range(&self, n_qubits: usize) -> Result<()> {
        match self.factors.keys().find(|&&q| q >= n_qubits) {
            Some(q) => Err(Error::argument(format!(
                "Pauli term acts on qubit {q} outside a {n_qubits}-qubit register"
            ))),
            None => Ok(()),
        }
    }

    /// Bit masks `(flip, z_phase, y_count)` describing the action on basis states:
    /// `P|x> = i^{y_count} (-1)^{popcount(x & z_phase)} |x ^ flip>`.
    pub(crate) fn masks(&self) -> (usize, usize, u32) {
        let mut flip = 0usize;
        let mut phase = 0usize;
        let mut ys = 0u32;
        for (&q, &p) in &self.factors {
            let bit = 1usize << q;
            match p {
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    ys += 1;
                }
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase, ys)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        if self.factors.is_empty() {
            return f.write_str("·I");
        }
        for (q, p) in &self.factors {
            write!(f, "·{p}{q}")?;
        }
        Ok(())
    }
}
