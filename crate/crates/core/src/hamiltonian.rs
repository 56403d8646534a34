//! Spin Hamiltonians as Pauli-term lists, plus dense exact diagonalization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliTerm};
use crate::statevec::{State, MAX_QUBITS};

/// Eigenvalues closer than this are treated as one multiplet.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real linear combination of Pauli strings on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Ring,
    Open,
}

impl HamiltonianSpec {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::argument("Hamiltonian needs at least one qubit"));
        }
        for t in &terms {
            t.check_range(n_qubits)?;
            if !t.coefficient().is_finite() {
                return Err(Error::argument("Hamiltonian coefficients must be finite"));
            }
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| t.with_coefficient(t.coefficient() * factor))
                .collect(),
        }
    }

    /// Sum of two Hamiltonians on the same register.
    pub fn plus(&self, other: &HamiltonianSpec) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::argument("cannot add Hamiltonians on different registers"));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self {
            n_qubits: self.n_qubits,
            terms,
        })
    }

    /// Embeds into an `n_qubits` register with every index shifted by `offset`.
    pub fn embedded(&self, n_qubits: usize, offset: usize) -> Result<Self> {
        Self::new(n_qubits, self.terms.iter().map(|t| t.shifted(offset)).collect())
    }

    /// `Θ H Θ⁻¹` for `Θ = ⊗(-iY) K`: every Pauli flips sign, so a string of
    /// weight `w` picks up `(-1)^w`.
    pub fn time_reversed(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let sign = if t.weight() % 2 == 0 { 1.0 } else { -1.0 };
                    t.with_coefficient(sign * t.coefficient())
                })
                .collect(),
        }
    }

    /// `H|ψ>` as a raw amplitude vector.
    pub fn apply(&self, state: &State) -> Result<Vec<Complex64>> {
        self.check_register(state)?;
        let mut out = vec![ZERO; state.dim()];
        for t in &self.terms {
            for (o, v) in out.iter_mut().zip(state.apply_pauli_term(t)?) {
                *o += v;
            }
        }
        Ok(out)
    }

    pub fn expectation(&self, state: &State) -> Result<f64> {
        self.check_register(state)?;
        state.expectation(&self.terms)
    }

    fn check_register(&self, state: &State) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::argument(format!(
                "Hamiltonian on {} qubits applied to a {}-qubit state",
                self.n_qubits,
                state.n_qubits()
            )));
        }
        Ok(())
    }

    /// Dense matrix in the computational basis (qubit 0 least significant).
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > MAX_QUBITS {
            return Err(Error::Capability(format!(
                "{} qubits exceeds the dense limit of {MAX_QUBITS}",
                self.n_qubits
            )));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        let i = Complex64::new(0.0, 1.0);
        for t in &self.terms {
            let (flip, phase, ys) = t.masks();
            let global = i.powu(ys) * t.coefficient();
            for x in 0..dim {
                let sign = if (x & phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(x ^ flip, x)] += global * sign;
            }
        }
        Ok(m)
    }
}

/// `sign · (Σ X_i X_{i+1} + g Σ Z_i)` on `l` sites.
///
/// The Z terms are omitted entirely when `g == 0`.
pub fn build_tfim(l: usize, g: f64, sign: f64, boundary: Boundary) -> Result<HamiltonianSpec> {
    if l < 2 {
        return Err(Error::argument(format!("TFIM needs at least 2 sites, got {l}")));
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::argument("sign must be +1 or -1"));
    }
    if !g.is_finite() {
        return Err(Error::argument("field g must be finite"));
    }
    let bonds = match boundary {
        // a 2-site ring would double the single bond
        Boundary::Ring if l > 2 => l,
        _ => l - 1,
    };
    let mut terms = Vec::with_capacity(bonds + l);
    for i in 0..bonds {
        terms.push(PauliTerm::pair(sign, i, (i + 1) % l, Pauli::X)?);
    }
    if g != 0.0 {
        terms.extend((0..l).map(|i| PauliTerm::single(sign * g, i, Pauli::Z)));
    }
    HamiltonianSpec::new(l, terms)
}

/// Ring XX part of the TFIM, `Σ X_i X_{i+1}`.
pub fn build_xx_ring(l: usize) -> Result<HamiltonianSpec> {
    build_tfim(l, 0.0, 1.0, Boundary::Ring)
}

/// Field part `Σ Z_i`.
pub fn build_z_field(l: usize) -> Result<HamiltonianSpec> {
    HamiltonianSpec::new(l, (0..l).map(|i| PauliTerm::single(1.0, i, Pauli::Z)).collect())
}

/// Cross couplings `(Σ X_i X_{i+L}, Σ Z_i Z_{i+L})` on a `2l`-qubit register.
pub fn build_h_ab(l: usize) -> Result<(HamiltonianSpec, HamiltonianSpec)> {
    if l == 0 {
        return Err(Error::argument("need at least one pair"));
    }
    let pairs = |p: Pauli| -> Result<Vec<PauliTerm>> {
        (0..l).map(|i| PauliTerm::pair(1.0, i, i + l, p)).collect()
    };
    Ok((
        HamiltonianSpec::new(2 * l, pairs(Pauli::X)?)?,
        HamiltonianSpec::new(2 * l, pairs(Pauli::Z)?)?,
    ))
}

/// Full eigendecomposition with ascending energies.
#[derive(Debug, Clone)]
pub struct Spectrum {
    energies: Vec<f64>,
    eigenstates: Vec<State>,
}

impl Spectrum {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn eigenstates(&self) -> &[State] {
        &self.eigenstates
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Index ranges of multiplets (energies within [`DEGENERACY_TOLERANCE`]).
    pub fn multiplets(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..=self.energies.len() {
            if k == self.energies.len()
                || self.energies[k] - self.energies[k - 1] > DEGENERACY_TOLERANCE
            {
                out.push(start..k);
                start = k;
            }
        }
        out
    }

    /// Lowest gap between distinct levels.
    pub fn gap(&self) -> Option<f64> {
        let m = self.multiplets();
        m.get(1).map(|r| self.energies[r.start] - self.energies[0])
    }

    /// `f(H)|ψ>` for a real spectral function applied as complex weights.
    pub fn apply_function(
        &self,
        state: &State,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Vec<Complex64>> {
        let mut out = vec![ZERO; state.dim()];
        for (e, v) in self.energies.iter().zip(&self.eigenstates) {
            let overlap = v.inner(state)? * f(*e);
            for (o, a) in out.iter_mut().zip(v.amplitudes()) {
                *o += overlap * a;
            }
        }
        Ok(out)
    }
}

/// Exact dense diagonalization.
pub fn diagonalize(h: &HamiltonianSpec) -> Result<Spectrum> {
    let dense = h.to_dense()?;
    let dim = dense.nrows();
    let real = dense.iter().all(|z| z.im == 0.0);
    let (values, vectors): (Vec<f64>, Vec<Vec<Complex64>>) = if real {
        let m = dense.map(|z| z.re);
        let eig = SymmetricEigen::new(m);
        let vecs = (0..dim)
            .map(|k| eig.eigenvectors.column(k).iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        (eig.eigenvalues.iter().copied().collect(), vecs)
    } else {
        let eig = SymmetricEigen::new(dense);
        let vecs = (0..dim)
            .map(|k| eig.eigenvectors.column(k).iter().copied().collect())
            .collect();
        (eig.eigenvalues.iter().copied().collect(), vecs)
    };

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let energies: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut columns: Vec<Vec<Complex64>> = order.iter().map(|&k| vectors[k].clone()).collect();

    let mut spectrum = Spectrum {
        energies,
        eigenstates: Vec::new(),
    };
    for range in spectrum.multiplets() {
        gram_schmidt(&mut columns[range])?;
    }
    spectrum.eigenstates = columns
        .into_iter()
        .map(State::from_amplitudes)
        .collect::<Result<_>>()?;
    Ok(spectrum)
}

fn gram_schmidt(vectors: &mut [Vec<Complex64>]) -> Result<()> {
    for k in 0..vectors.len() {
        let (done, rest) = vectors.split_at_mut(k);
        let v = &mut rest[0];
        for u in done.iter() {
            let proj: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in v.iter_mut().zip(u) {
                *x -= proj * a;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            return Err(Error::Consistency("eigenvectors are linearly dependent".into()));
        }
        v.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(())
}

/// Lowest multiplet of a Hamiltonian.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// First vector of the multiplet.
    pub state: State,
    /// Orthonormal basis of the whole ground multiplet.
    pub multiplet: Vec<State>,
}

impl GroundState {
    pub fn is_degenerate(&self) -> bool {
        self.multiplet.len() > 1
    }

    /// Weight of `psi` inside the ground multiplet.
    pub fn fidelity(&self, psi: &State) -> Result<f64> {
        subspace_fidelity(psi, &self.multiplet)
    }
}

pub fn ground_state(h: &HamiltonianSpec) -> Result<GroundState> {
    let spectrum = diagonalize(h)?;
    let range = spectrum.multiplets()[0].clone();
    let multiplet = spectrum.eigenstates[range].to_vec();
    Ok(GroundState {
        energy: spectrum.energies[0],
        state: multiplet[0].clone(),
        multiplet,
    })
}

/// `Σ_k |<v_k|ψ>|²` over an orthonormal set.
pub fn subspace_fidelity(psi: &State, basis: &[State]) -> Result<f64> {
    basis.iter().try_fold(0.0, |acc, v| Ok(acc + v.inner(psi)?.norm_sqr()))
}

/// Exact time evolution `exp(-i t H)` for a Hamiltonian on a block of qubits.
#[derive(Debug, Clone)]
pub struct Propagator {
    n_qubits: usize,
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl Propagator {
    pub fn new(h: &HamiltonianSpec) -> Result<Self> {
        let spectrum = diagonalize(h)?;
        let dim = 1usize << h.n_qubits();
        let vectors = DMatrix::from_fn(dim, dim, |r, c| spectrum.eigenstates[c].amplitudes()[r]);
        Ok(Self {
            n_qubits: h.n_qubits(),
            energies: spectrum.energies,
            vectors,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Dense `exp(-i t H)`.
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let phases = DVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
        );
        let scaled = DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |r, c| {
            self.vectors[(r, c)] * phases[c]
        });
        scaled * self.vectors.adjoint()
    }

    /// Applies `exp(-i t H)` to qubits `[offset, offset + n)` of `state`.
    pub fn apply(&self, state: &mut State, t: f64, offset: usize) -> Result<()> {
        if offset + self.n_qubits > state.n_qubits() {
            return Err(Error::argument(format!(
                "block [{offset}, {}) exceeds a {}-qubit register",
                offset + self.n_qubits,
                state.n_qubits()
            )));
        }
        let u = self.unitary(t);
        apply_block_unitary(state, &u, offset, self.n_qubits);
        Ok(())
    }
}

fn apply_block_unitary(state: &mut State, u: &DMatrix<Complex64>, offset: usize, width: usize) {
    let block = 1usize << width;
    let low = 1usize << offset;
    let mask = (block - 1) << offset;
    let amps = state.amplitudes_mut();
    let mut buf = vec![ZERO; block];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (k, b) in buf.iter_mut().enumerate() {
            *b = amps[base + k * low];
        }
        for r in 0..block {
            let mut acc = ZERO;
            for (c, b) in buf.iter().enumerate() {
                acc += u[(r, c)] * b;
            }
            amps[base + r * low] = acc;
        }
    }
}
