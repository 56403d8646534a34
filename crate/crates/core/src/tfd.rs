//! Thermofield-double targets, the Bell-pair reference state and the
//! variational circuits that prepare TFD states from it.
//!
//! The register holds `2L` qubits: subsystem A on `[0, L)` and B on `[L, 2L)`,
//! with site `i` of A paired to site `i + L` of B.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::{self, HamiltonianSpec, Propagator};
use crate::optimize::{self, MultistartOptions, MultistartResult};
use crate::pauli::{Pauli, PauliPair};
use crate::statevec::{self, State};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Angle of the XX gate in the compiled singlet sequence.
pub const BELL_XX_ANGLE: f64 = -FRAC_PI_4;

/// Inverse temperature, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::argument(format!("beta must be nonnegative, got {beta}")));
        }
        Ok(if beta.is_infinite() {
            Beta::Infinite
        } else {
            Beta::Finite(beta)
        })
    }

    /// `β = 1/T`; `T = 0` maps to infinite β and `T = ∞` to zero.
    pub fn from_temperature(t: f64) -> Result<Self> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::argument(format!("temperature must be nonnegative, got {t}")));
        }
        Self::new(if t == 0.0 { f64::INFINITY } else { 1.0 / t })
    }

    pub fn temperature(&self) -> f64 {
        match *self {
            Beta::Infinite => 0.0,
            Beta::Finite(b) if b == 0.0 => f64::INFINITY,
            Beta::Finite(b) => 1.0 / b,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Beta::Finite(b) => b,
            Beta::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Beta::Infinite)
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Beta::Infinite),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::argument(format!("cannot parse beta `{other}`")))
                .and_then(Beta::new),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(*b),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Number(b) => Beta::new(b),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// `Θ = ⊗_j (-iY_j) K`, so that `Θ|0> = |1>` and `Θ|1> = -|0>`.
///
/// On basis states `Θ|x> = (-1)^{popcount(x)} |x̄>`, conjugating amplitudes.
pub fn time_reversal(state: &State) -> State {
    let n = state.n_qubits();
    let all = (1usize << n) - 1;
    let mut out = vec![ZERO; state.dim()];
    for (x, a) in state.amplitudes().iter().enumerate() {
        let sign = if x.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        out[x ^ all] = a.conj() * sign;
    }
    State::from_amplitudes(out).expect("time reversal preserves the norm")
}

/// Exact TFD state of `H_A` at inverse temperature `β`.
#[derive(Debug, Clone)]
pub struct TfdTarget {
    pub beta: Beta,
    pub subsystem_size: usize,
    pub state: State,
    /// Set when `β = ∞` and the ground level of `H_A` is degenerate; the
    /// target is then the equal-weight purification of the ground multiplet.
    pub degenerate_ground: bool,
}

/// `Σ_n e^{-β E_n / 2} |n>_A ⊗ Θ|n>_B`, normalized.
pub fn build_tfd_target(h_a: &HamiltonianSpec, beta: Beta) -> Result<TfdTarget> {
    let l = h_a.n_qubits();
    if 2 * l > statevec::MAX_QUBITS {
        return Err(Error::Capability(format!(
            "TFD of {l} sites needs {} qubits",
            2 * l
        )));
    }
    let spectrum = hamiltonian::diagonalize(h_a)?;
    let e0 = spectrum.energies()[0];
    let ground_len = spectrum.multiplets()[0].len();
    let dim_a = 1usize << l;
    let mut amps = vec![ZERO; dim_a * dim_a];
    for (k, (&e, n)) in spectrum.energies().iter().zip(spectrum.eigenstates()).enumerate() {
        let w = match beta {
            Beta::Infinite if k < ground_len => 1.0,
            Beta::Infinite => continue,
            // shifting by E0 keeps the weights finite at large β
            Beta::Finite(b) => (-b * (e - e0) / 2.0).exp(),
        };
        let partner = time_reversal(n);
        for (bi, &bv) in partner.amplitudes().iter().enumerate() {
            if bv == ZERO {
                continue;
            }
            for (ai, &av) in n.amplitudes().iter().enumerate() {
                amps[ai | (bi << l)] += av * bv * w;
            }
        }
    }
    Ok(TfdTarget {
        beta,
        subsystem_size: l,
        state: State::normalized(amps)?,
        degenerate_ground: beta.is_infinite() && ground_len > 1,
    })
}

/// `⊗_i (|0_A 1_B> - |1_A 0_B>)/√2` over pairs `(i, i + L)`.
pub fn prepare_bell_product(l: usize) -> Result<State> {
    if l == 0 || 2 * l > statevec::MAX_QUBITS {
        return Err(Error::argument(format!("unsupported pair count {l}")));
    }
    let amp = FRAC_1_SQRT_2.powi(l as i32);
    let a_mask = (1usize << l) - 1;
    let mut amps = vec![ZERO; 1 << (2 * l)];
    for a in 0..=a_mask {
        let b = a ^ a_mask;
        let sign = if a.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        amps[a | (b << l)] = Complex64::new(sign * amp, 0.0);
    }
    State::from_amplitudes(amps)
}

/// Same state built from native gates on each pair: `RX_B(-π)` prepares
/// `|0_A 1_B>`, an XX gate entangles, `RZ_A(π/2)` fixes the relative phase.
/// Agrees with [`prepare_bell_product`] up to a global phase.
pub fn prepare_bell_product_compiled(l: usize) -> Result<State> {
    bell_product_circuit(l)?.run(&State::zero(2 * l)?)
}

/// Gate list behind [`prepare_bell_product_compiled`].
pub fn bell_product_circuit(l: usize) -> Result<Circuit> {
    if l == 0 || 2 * l > statevec::MAX_QUBITS {
        return Err(Error::argument(format!("unsupported pair count {l}")));
    }
    let mut c = Circuit::new(2 * l);
    for i in 0..l {
        let j = i + l;
        c.rotation(j, Pauli::X, -PI)
            .two_pauli(i, j, PauliPair::XX, BELL_XX_ANGLE)
            .rotation(i, Pauli::Z, FRAC_PI_2);
    }
    Ok(c)
}

/// Variational circuit families acting on the Bell product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TfdFamily {
    /// `e^{iα₂H_ABZ} e^{iα₁H_ABX} e^{iγ₂H_XX} e^{iγ₁H_Z}` with the field and
    /// hopping terms on A only; angles `(γ₁, γ₂, α₁, α₂)`.
    Minimal,
    /// Layers of `e^{iα H_AB} e^{iγ(H_A + H_B)/2}` with `H_B = Θ H_A Θ⁻¹`;
    /// angles `(γ_j, α_j)` per layer.
    General { layers: usize },
    /// Layers of `e^{iα H_ABZ} e^{iγ H_A}`; angles `(γ_j, α_j)` per layer.
    ClassicalIsing { layers: usize },
}

impl TfdFamily {
    pub fn n_params(&self) -> usize {
        match *self {
            TfdFamily::Minimal => 4,
            TfdFamily::General { layers } | TfdFamily::ClassicalIsing { layers } => 2 * layers,
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match *self {
            TfdFamily::Minimal => ["gamma1", "gamma2", "alpha1", "alpha2"]
                .map(String::from)
                .to_vec(),
            TfdFamily::General { layers } | TfdFamily::ClassicalIsing { layers } => (1..=layers)
                .flat_map(|j| [format!("gamma{j}"), format!("alpha{j}")])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfdAnsatzParams {
    pub family: TfdFamily,
    pub angles: Vec<f64>,
}

impl TfdAnsatzParams {
    pub fn new(family: TfdFamily, angles: Vec<f64>) -> Result<Self> {
        if let TfdFamily::General { layers: 0 } | TfdFamily::ClassicalIsing { layers: 0 } = family {
            return Err(Error::argument("ansatz needs at least one layer"));
        }
        if angles.len() != family.n_params() {
            return Err(Error::argument(format!(
                "{family:?} takes {} angles, got {}",
                family.n_params(),
                angles.len()
            )));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::argument("angles must be finite"));
        }
        Ok(Self { family, angles })
    }

    pub fn zeros(family: TfdFamily) -> Result<Self> {
        Self::new(family, vec![0.0; family.n_params()])
    }
}

/// Precomputed pieces needed to evaluate a TFD ansatz repeatedly.
#[derive(Debug, Clone)]
pub struct TfdCircuit {
    family: TfdFamily,
    l: usize,
    initial: State,
    /// Exact propagators for `H_A` and `H_B`, only for the general family.
    propagators: Option<(Propagator, Propagator)>,
    /// Bonds of `H_A` when it is a pure XX coupling list.
    xx_bonds: Vec<(usize, usize)>,
}

impl TfdCircuit {
    pub fn new(family: TfdFamily, h_a: &HamiltonianSpec) -> Result<Self> {
        let l = h_a.n_qubits();
        let initial = prepare_bell_product(l)?;
        let mut xx_bonds = Vec::new();
        let mut propagators = None;
        match family {
            TfdFamily::Minimal => {
                if l < 2 {
                    return Err(Error::argument("minimal ansatz needs at least 2 sites"));
                }
                xx_bonds = bonds_of(&hamiltonian::build_xx_ring(l)?)?;
            }
            TfdFamily::ClassicalIsing { .. } => {
                xx_bonds = bonds_of(h_a)?;
            }
            TfdFamily::General { .. } => {
                propagators = Some((Propagator::new(h_a)?, Propagator::new(&h_a.time_reversed())?));
            }
        }
        Ok(Self {
            family,
            l,
            initial,
            propagators,
            xx_bonds,
        })
    }

    pub fn family(&self) -> TfdFamily {
        self.family
    }

    pub fn n_sites(&self) -> usize {
        self.l
    }

    fn check_arity(&self, angles: &[f64]) -> Result<()> {
        if angles.len() != self.family.n_params() {
            return Err(Error::argument(format!(
                "expected {} angles, got {}",
                self.family.n_params(),
                angles.len()
            )));
        }
        Ok(())
    }

    /// Native-gate form of the ansatz, acting on the Bell product. The
    /// general family has no gate form.
    pub fn gates(&self, angles: &[f64]) -> Result<Circuit> {
        self.check_arity(angles)?;
        let l = self.l;
        let mut c = Circuit::new(2 * l);
        // e^{+iθ P} is exp(-iχ P) with χ = -θ, and e^{+iθ Z} is RZ(-2θ)
        let cross = |c: &mut Circuit, basis: PauliPair, theta: f64| {
            for i in 0..l {
                c.two_pauli(i, i + l, basis, -theta);
            }
        };
        let intra_xx = |c: &mut Circuit, theta: f64| {
            for &(i, j) in &self.xx_bonds {
                c.two_pauli(i, j, PauliPair::XX, -theta);
            }
        };
        match self.family {
            TfdFamily::Minimal => {
                let [g1, g2, a1, a2] = [angles[0], angles[1], angles[2], angles[3]];
                for i in 0..l {
                    c.rotation(i, Pauli::Z, -2.0 * g1);
                }
                intra_xx(&mut c, g2);
                cross(&mut c, PauliPair::XX, a1);
                cross(&mut c, PauliPair::ZZ, a2);
            }
            TfdFamily::ClassicalIsing { .. } => {
                for layer in angles.chunks(2) {
                    intra_xx(&mut c, layer[0]);
                    cross(&mut c, PauliPair::ZZ, layer[1]);
                }
            }
            TfdFamily::General { .. } => {
                return Err(Error::Capability(
                    "the general family uses exact propagators and has no gate list".into(),
                ))
            }
        }
        Ok(c)
    }

    /// Gate list starting from `|0…0>`: compiled Bell preparation, then the ansatz.
    pub fn gates_from_zero(&self, angles: &[f64]) -> Result<Circuit> {
        let mut c = bell_product_circuit(self.l)?;
        for g in self.gates(angles)?.gates() {
            c.push(*g);
        }
        Ok(c)
    }

    pub fn prepare(&self, angles: &[f64]) -> Result<State> {
        self.check_arity(angles)?;
        let l = self.l;
        let mut s = self.initial.clone();
        match self.family {
            TfdFamily::General { .. } => {
                let (pa, pb) = self.propagators.as_ref().expect("built for the general family");
                for layer in angles.chunks(2) {
                    // e^{iγ(H_A + H_B)/2} factorizes since A and B are disjoint
                    pa.apply(&mut s, -layer[0] / 2.0, 0)?;
                    pb.apply(&mut s, -layer[0] / 2.0, l)?;
                    for i in 0..l {
                        s.apply_two_pauli_exp(i, i + l, PauliPair::XX, -layer[1])?;
                    }
                    for i in 0..l {
                        s.apply_two_pauli_exp(i, i + l, PauliPair::ZZ, -layer[1])?;
                    }
                }
            }
            _ => self.gates(angles)?.run_on(&mut s)?,
        }
        Ok(s)
    }
}

fn bonds_of(h: &HamiltonianSpec) -> Result<Vec<(usize, usize)>> {
    h.terms()
        .iter()
        .map(|t| {
            let f = t.factors();
            let ok = t.coefficient() == 1.0 && f.len() == 2 && f.values().all(|&p| p == Pauli::X);
            if !ok {
                return Err(Error::argument(
                    "this ansatz needs H_A to be a sum of unit XX bonds",
                ));
            }
            let mut k = f.keys();
            Ok((*k.next().unwrap(), *k.next().unwrap()))
        })
        .collect()
}

/// Minimal ansatz state for `L = h_a.n_qubits()` sites.
pub fn tfd_ansatz_minimal(l: usize, params: &TfdAnsatzParams) -> Result<State> {
    if params.family != TfdFamily::Minimal {
        return Err(Error::argument("expected minimal-family parameters"));
    }
    let h = hamiltonian::build_tfim(l, 1.0, 1.0, hamiltonian::Boundary::Ring)?;
    TfdCircuit::new(TfdFamily::Minimal, &h)?.prepare(&params.angles)
}

/// Layered ansatz with exact spectral evolution under `H_A` and `H_B`.
pub fn tfd_ansatz_general(h_a: &HamiltonianSpec, params: &TfdAnsatzParams) -> Result<State> {
    if !matches!(params.family, TfdFamily::General { .. }) {
        return Err(Error::argument("expected general-family parameters"));
    }
    TfdCircuit::new(params.family, h_a)?.prepare(&params.angles)
}

#[derive(Debug, Clone, Serialize)]
pub struct TfdOptimum {
    /// Best angles, reduced into `[-π, π]`.
    pub params: TfdAnsatzParams,
    pub fidelity: f64,
    #[serde(skip)]
    pub state: State,
    #[serde(skip)]
    pub target: TfdTarget,
    pub trace: MultistartResult,
}

/// Maximizes the overlap with the exact TFD over multistart Nelder-Mead.
pub fn optimize_tfd(
    family: TfdFamily,
    h_a: &HamiltonianSpec,
    beta: Beta,
    options: &MultistartOptions,
) -> Result<TfdOptimum> {
    let target = build_tfd_target(h_a, beta)?;
    let circuit = TfdCircuit::new(family, h_a)?;
    let cost = |x: &[f64]| -> f64 {
        match circuit.prepare(x) {
            Ok(s) => 1.0 - fidelity_unchecked(&target.state, &s),
            Err(_) => f64::INFINITY,
        }
    };
    let trace = optimize::minimize_multistart(cost, family.n_params(), options);
    let angles: Vec<f64> = trace.x.iter().map(|&a| optimize::wrap_angle(a)).collect();
    let state = circuit.prepare(&angles)?;
    let fidelity = statevec::fidelity(&target.state, &state)?;
    Ok(TfdOptimum {
        params: TfdAnsatzParams::new(family, angles)?,
        fidelity,
        state,
        target,
        trace,
    })
}

fn fidelity_unchecked(a: &State, b: &State) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm_sqr()
}
