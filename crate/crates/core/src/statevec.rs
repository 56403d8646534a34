//! Dense statevector simulation.
//!
//! Qubit 0 is the least-significant bit of the amplitude index. Single-qubit
//! rotations are `exp(-i θ/2 σ)` and two-body exponentials are `exp(-i χ σσ)`;
//! ansatz builders translate their own sign conventions into these.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliPair, PauliTerm};
use crate::rng;

/// Largest register handled by the dense backend (dimension 16384).
pub const MAX_QUBITS: usize = 14;

/// Tolerance on the unit-norm invariant.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Largest imaginary residue tolerated in a Hermitian expectation value.
pub const HERMITIAN_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Normalized pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::argument("register must hold at least one qubit"));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::Capability(format!(
            "{n_qubits} qubits exceeds the dense limit of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl State {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::argument(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps amplitudes that are already normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::from_raw(amplitudes)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::argument(format!("amplitudes have norm {norm}, expected 1")));
        }
        Ok(state)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::from_raw(amplitudes)?;
        let norm = state.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::argument("cannot normalize a zero or non-finite vector"));
        }
        state.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn from_raw(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::argument(format!(
                "amplitude vector length {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_register(n_qubits)?;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &State) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::argument(format!(
                "register mismatch: {} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensor product with `self` on the low qubits and `high` above them.
    pub fn tensor(&self, high: &State) -> Result<State> {
        let n = self.n_qubits + high.n_qubits;
        check_register(n)?;
        let low_dim = self.dim();
        let mut amplitudes = vec![ZERO; 1 << n];
        for (h, &bh) in high.amplitudes.iter().enumerate() {
            for (l, &al) in self.amplitudes.iter().enumerate() {
                amplitudes[l | (h * low_dim)] = al * bh;
            }
        }
        Ok(State {
            n_qubits: n,
            amplitudes,
        })
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::argument(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Applies an arbitrary 2x2 matrix `[[m00, m01], [m10, m11]]` to one qubit.
    pub fn apply_single_qubit(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        for base in 0..self.amplitudes.len() {
            if base & bit != 0 {
                continue;
            }
            let a0 = self.amplitudes[base];
            let a1 = self.amplitudes[base | bit];
            self.amplitudes[base] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[base | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(())
    }

    /// `exp(-i angle/2 σ_axis)` on `qubit`.
    pub fn rotate(&mut self, qubit: usize, axis: Pauli, angle: f64) -> Result<()> {
        if !angle.is_finite() {
            return Err(Error::argument("rotation angle must be finite"));
        }
        self.apply_single_qubit(qubit, rotation_matrix(axis, angle))
    }

    /// `exp(-i angle σ_i σ_j)` for the chosen Pauli pair.
    pub fn apply_two_pauli_exp(
        &mut self,
        qubit_i: usize,
        qubit_j: usize,
        basis: PauliPair,
        angle: f64,
    ) -> Result<()> {
        self.check_qubit(qubit_i)?;
        self.check_qubit(qubit_j)?;
        if qubit_i == qubit_j {
            return Err(Error::argument("two-body exponential needs distinct qubits"));
        }
        if !angle.is_finite() {
            return Err(Error::argument("two-body angle must be finite"));
        }
        let (bi, bj) = (1usize << qubit_i, 1usize << qubit_j);
        match basis {
            PauliPair::XX => {
                let c = Complex64::new(angle.cos(), 0.0);
                let ms = Complex64::new(0.0, -angle.sin());
                let mask = bi | bj;
                for x in 0..self.amplitudes.len() {
                    // visit each pair (x, x ^ mask) once, from the member with bit i clear
                    if x & bi != 0 {
                        continue;
                    }
                    let y = x ^ mask;
                    let (ax, ay) = (self.amplitudes[x], self.amplitudes[y]);
                    self.amplitudes[x] = c * ax + ms * ay;
                    self.amplitudes[y] = c * ay + ms * ax;
                }
            }
            PauliPair::ZZ => {
                let same = Complex64::from_polar(1.0, -angle);
                let diff = Complex64::from_polar(1.0, angle);
                for (x, a) in self.amplitudes.iter_mut().enumerate() {
                    let parity = ((x & bi) != 0) ^ ((x & bj) != 0);
                    *a *= if parity { diff } else { same };
                }
            }
        }
        Ok(())
    }

    /// `P|ψ>` for a single Pauli term (coefficient included).
    pub fn apply_pauli_term(&self, term: &PauliTerm) -> Result<Vec<Complex64>> {
        term.check_range(self.n_qubits)?;
        let (flip, phase_mask, ys) = term.masks();
        let global = I.powu(ys) * term.coefficient();
        let mut out = vec![ZERO; self.amplitudes.len()];
        for (x, &a) in self.amplitudes.iter().enumerate() {
            let sign = if (x & phase_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out[x ^ flip] += global * sign * a;
        }
        Ok(out)
    }

    /// `<ψ|P|ψ>` for one term, complex (no Hermiticity check).
    fn term_expectation(&self, term: &PauliTerm) -> Complex64 {
        let (flip, phase_mask, ys) = term.masks();
        let mut acc = ZERO;
        for (x, &a) in self.amplitudes.iter().enumerate() {
            let sign = if (x & phase_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.amplitudes[x ^ flip].conj() * a * sign;
        }
        acc * I.powu(ys) * term.coefficient()
    }

    /// `Σ_k c_k <ψ|P_k|ψ>`, which must be real.
    pub fn expectation(&self, observable: &[PauliTerm]) -> Result<f64> {
        let mut total = ZERO;
        for term in observable {
            term.check_range(self.n_qubits)?;
            total += self.term_expectation(term);
        }
        if total.im.abs() > HERMITIAN_TOLERANCE {
            return Err(Error::Consistency(format!(
                "expectation has imaginary part {:e}",
                total.im
            )));
        }
        Ok(total.re)
    }

    /// Expectation of a single Pauli string with unit coefficient.
    pub fn pauli_expectation(&self, factors: &[(usize, Pauli)]) -> Result<f64> {
        let term = PauliTerm::new(1.0, factors)?;
        self.expectation(std::slice::from_ref(&term))
    }

    /// Reduced density matrix of the lowest `k` qubits (tracing out the rest).
    pub fn reduced_density_low(&self, k: usize) -> Result<DMatrix<Complex64>> {
        if k == 0 || k > self.n_qubits {
            return Err(Error::argument(format!(
                "cannot keep {k} of {} qubits",
                self.n_qubits
            )));
        }
        let low = 1usize << k;
        let high = self.dim() / low;
        let mut rho = DMatrix::<Complex64>::zeros(low, low);
        for h in 0..high {
            let block = &self.amplitudes[h * low..(h + 1) * low];
            for r in 0..low {
                for c in 0..low {
                    rho[(r, c)] += block[r] * block[c].conj();
                }
            }
        }
        Ok(rho)
    }
}

/// Matrix of `exp(-i angle/2 σ_axis)`.
pub fn rotation_matrix(axis: Pauli, angle: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    let cr = Complex64::new(c, 0.0);
    match axis {
        Pauli::X => [
            [cr, Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), cr],
        ],
        Pauli::Y => [
            [cr, Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), cr],
        ],
        Pauli::Z => [
            [Complex64::from_polar(1.0, -angle / 2.0), ZERO],
            [ZERO, Complex64::from_polar(1.0, angle / 2.0)],
        ],
    }
}

/// Matrix of `exp(-i angle/2 n·σ)` for a unit axis `n`.
pub fn axis_rotation_matrix(axis: [f64; 3], angle: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    let [nx, ny, nz] = axis;
    [
        [Complex64::new(c, -s * nz), Complex64::new(-s * ny, -s * nx)],
        [Complex64::new(s * ny, -s * nx), Complex64::new(c, s * nz)],
    ]
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &State, b: &State) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// Free-function form of [`State::rotate`].
pub fn apply_rotation(mut state: State, qubit: usize, axis: Pauli, angle: f64) -> Result<State> {
    state.rotate(qubit, axis, angle)?;
    Ok(state)
}

/// Free-function form of [`State::apply_two_pauli_exp`].
pub fn apply_two_pauli_exp(
    mut state: State,
    qubit_i: usize,
    qubit_j: usize,
    basis: PauliPair,
    angle: f64,
) -> Result<State> {
    state.apply_two_pauli_exp(qubit_i, qubit_j, basis, angle)?;
    Ok(state)
}

/// Measurement outcome over `n` qubits; bit `q` is the outcome of qubit `q`
/// (0 for the `+1` eigenvalue of the measured Pauli).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    bits: u64,
    n_qubits: u8,
}

impl Bitstring {
    pub fn new(bits: u64, n_qubits: usize) -> Self {
        debug_assert!(n_qubits <= 64);
        let mask = if n_qubits >= 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
        Self {
            bits: bits & mask,
            n_qubits: n_qubits as u8,
        }
    }

    /// Parses `"0110"`, qubit 0 first.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        for (q, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << q,
                _ => return Err(Error::argument(format!("invalid bit `{ch}` in `{s}`"))),
            }
        }
        Ok(Self::new(bits, s.chars().count()))
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn bit(&self, qubit: usize) -> bool {
        self.bits >> qubit & 1 == 1
    }

    /// `+1` for outcome 0, `-1` for outcome 1.
    pub fn eigenvalue(&self, qubit: usize) -> f64 {
        if self.bit(qubit) {
            -1.0
        } else {
            1.0
        }
    }

    /// Product of eigenvalues over the qubits in `range`.
    pub fn parity(&self, range: std::ops::Range<usize>) -> f64 {
        let mask = range.fold(0u64, |m, q| m | 1 << q);
        if (self.bits & mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits() {
            f.write_str(if self.bit(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Rotates each qubit so that measuring Z afterwards measures `basis[q]`.
pub fn rotate_to_basis(state: &mut State, basis: &[Pauli]) -> Result<()> {
    if basis.len() != state.n_qubits() {
        return Err(Error::argument(format!(
            "measurement basis lists {} qubits, state has {}",
            basis.len(),
            state.n_qubits()
        )));
    }
    for (q, &b) in basis.iter().enumerate() {
        match b {
            Pauli::X => state.rotate(q, Pauli::Y, -std::f64::consts::FRAC_PI_2)?,
            Pauli::Y => state.rotate(q, Pauli::X, std::f64::consts::FRAC_PI_2)?,
            Pauli::Z => {}
        }
    }
    Ok(())
}

/// Draws `shots` outcomes from `|amplitude|^2` using `rng`.
pub fn sample_with<R: Rng + ?Sized>(state: &State, shots: usize, rng: &mut R) -> Vec<Bitstring> {
    let mut cumulative = Vec::with_capacity(state.dim());
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let total = acc;
    let last = cumulative.len() - 1;
    (0..shots)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cumulative.partition_point(|&c| c <= u).min(last);
            Bitstring::new(idx as u64, state.n_qubits())
        })
        .collect()
}

/// Projective readout of every qubit in the requested bases, `shots` times.
pub fn sample_bitstrings(
    state: &State,
    basis: &[Pauli],
    shots: usize,
    seed: u64,
) -> Result<Vec<Bitstring>> {
    if shots == 0 {
        return Err(Error::argument("shots must be at least 1"));
    }
    let mut rotated = state.clone();
    rotate_to_basis(&mut rotated, basis)?;
    let mut rng = rng::root(seed);
    Ok(sample_with(&rotated, shots, &mut rng))
}
