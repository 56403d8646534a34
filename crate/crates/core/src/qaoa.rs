//! Alternating-evolution ansatz for the critical Ising ring, its exact
//! optimum, shot-based energy estimation and the finite-difference
//! gradient-descent loop.

use std::f64::consts::FRAC_PI_4;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::{self, Boundary, GroundState, HamiltonianSpec};
use crate::noise::{self, NoiseModel};
use crate::optimize::{self, MultistartOptions, MultistartResult};
use crate::pauli::{Pauli, PauliPair};
use crate::rng;
use crate::statevec::{self, State};

/// Layer angles: `gammas[k]` multiplies `H_XX`, `alphas[k]` multiplies `H_Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsAnsatzParams {
    pub gammas: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl GsAnsatzParams {
    pub fn new(gammas: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if gammas.len() != alphas.len() {
            return Err(Error::argument(format!(
                "{} gammas but {} alphas",
                gammas.len(),
                alphas.len()
            )));
        }
        if gammas.iter().chain(&alphas).any(|a| !a.is_finite()) {
            return Err(Error::argument("angles must be finite"));
        }
        Ok(Self { gammas, alphas })
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            gammas: vec![0.0; p],
            alphas: vec![0.0; p],
        }
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    /// Interleaved `(γ₁, α₁, γ₂, α₂, ...)`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.gammas.iter().zip(&self.alphas).flat_map(|(&g, &a)| [g, a]).collect()
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() % 2 != 0 {
            return Err(Error::argument("interleaved angle vector must have even length"));
        }
        Self::new(
            x.iter().step_by(2).copied().collect(),
            x.iter().skip(1).step_by(2).copied().collect(),
        )
    }

    pub fn names(p: usize) -> Vec<String> {
        (1..=p).flat_map(|k| [format!("gamma{k}"), format!("alpha{k}")]).collect()
    }

    /// Angles wrapped into `[-π, π]`.
    pub fn wrapped(&self) -> Self {
        Self {
            gammas: self.gammas.iter().map(|&a| optimize::wrap_angle(a)).collect(),
            alphas: self.alphas.iter().map(|&a| optimize::wrap_angle(a)).collect(),
        }
    }

    /// Representatives in `(-π/4, π/4]`.
    ///
    /// On a ring, `exp(-iπ/2 H_XX)` is a global phase and `exp(-iπ/2 H_Z)` is
    /// a global phase times the parity, which is fixed on the even sector the
    /// ansatz never leaves. So these angles give the same ideal state while
    /// using the smallest gate angles, which matters for noise that scales
    /// with the angle.
    pub fn minimal_representative(&self) -> Self {
        let reduce = |a: f64| {
            let q = std::f64::consts::FRAC_PI_2;
            let r = a - q * (a / q).round();
            if r <= -FRAC_PI_4 {
                r + q
            } else {
                r
            }
        };
        Self {
            gammas: self.gammas.iter().map(|&a| reduce(a)).collect(),
            alphas: self.alphas.iter().map(|&a| reduce(a)).collect(),
        }
    }
}

/// `-H_XX - H_Z` on a ring of `l` sites.
pub fn cost_hamiltonian(l: usize) -> Result<HamiltonianSpec> {
    hamiltonian::build_tfim(l, 1.0, -1.0, Boundary::Ring)
}

fn ring_bonds(l: usize) -> Vec<(usize, usize)> {
    if l == 2 {
        vec![(0, 1)]
    } else {
        (0..l).map(|i| (i, (i + 1) % l)).collect()
    }
}

/// `e^{-iα_p H_Z} e^{-iγ_p H_XX} ⋯ e^{-iα₁H_Z} e^{-iγ₁H_XX}` as gates; apply to `|0...0>`.
pub fn gs_circuit(l: usize, params: &GsAnsatzParams) -> Result<Circuit> {
    if l < 2 {
        return Err(Error::argument("ring needs at least 2 sites"));
    }
    let mut c = Circuit::new(l);
    for (&g, &a) in params.gammas.iter().zip(&params.alphas) {
        for (i, j) in ring_bonds(l) {
            c.two_pauli(i, j, PauliPair::XX, g);
        }
        for q in 0..l {
            c.rotation(q, Pauli::Z, 2.0 * a);
        }
    }
    Ok(c)
}

pub fn gs_ansatz(l: usize, params: &GsAnsatzParams) -> Result<State> {
    gs_circuit(l, params)?.run(&State::zero(l)?)
}

/// `<ψ| -H_XX - H_Z |ψ>` on a ring.
pub fn energy_cost(state: &State, l: usize) -> Result<f64> {
    if state.n_qubits() != l {
        return Err(Error::argument("state size does not match the ring"));
    }
    cost_hamiltonian(l)?.expectation(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GsObjective {
    /// Maximize the overlap with the exact ground multiplet.
    Fidelity,
    /// Minimize the cost energy.
    Energy,
}

#[derive(Debug, Clone, Serialize)]
pub struct GsOptimum {
    pub l: usize,
    pub objective: GsObjective,
    /// Wrapped into `[-π, π]`.
    pub params: GsAnsatzParams,
    pub energy: f64,
    pub fidelity: f64,
    pub trace: MultistartResult,
}

/// Multistart search for the best `p`-layer angles under `objective`; both
/// energy and fidelity of the result are reported.
pub fn optimize_gs_exact(
    l: usize,
    p: usize,
    objective: GsObjective,
    ground: &GroundState,
    options: &MultistartOptions,
) -> Result<GsOptimum> {
    let h = cost_hamiltonian(l)?;
    let initial = State::zero(l)?;
    let eval = |x: &[f64]| -> Result<State> { gs_circuit(l, &GsAnsatzParams::from_slice(x)?)?.run(&initial) };
    let cost = |x: &[f64]| -> f64 {
        let value = eval(x).and_then(|s| match objective {
            GsObjective::Fidelity => ground.fidelity(&s).map(|f| 1.0 - f),
            GsObjective::Energy => h.expectation(&s),
        });
        value.unwrap_or(f64::INFINITY)
    };
    let trace = optimize::minimize_multistart(cost, 2 * p, options);
    let params = GsAnsatzParams::from_slice(&trace.x)?.wrapped();
    let s = eval(&params.to_vec())?;
    Ok(GsOptimum {
        l,
        objective,
        energy: h.expectation(&s)?,
        fidelity: ground.fidelity(&s)?,
        params,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub energy: f64,
    pub std_error: f64,
}

/// Energy from two measurement settings: all-Z for the field term and all-X
/// for the bonds, each with `shots` samples.
///
/// `shots = None` returns the exact expectation. With a noise model, every
/// shot runs its own noisy trajectory.
pub fn measure_energy_sampled(
    circuit: &Circuit,
    initial: &State,
    shots: Option<usize>,
    seed: u64,
    noise: Option<&NoiseModel>,
) -> Result<EnergyEstimate> {
    let l = circuit.n_qubits();
    let h = cost_hamiltonian(l)?;
    let Some(shots) = shots else {
        return match noise {
            None => Ok(EnergyEstimate {
                energy: h.expectation(&circuit.run(initial)?)?,
                std_error: 0.0,
            }),
            Some(model) => {
                let (energy, std_error) = noise::mc_energy(circuit, initial, &h, model)?;
                Ok(EnergyEstimate { energy, std_error })
            }
        };
    };
    if shots == 0 {
        return Err(Error::argument("shots must be at least 1"));
    }
    let bonds = ring_bonds(l);
    let z_basis = vec![Pauli::Z; l];
    let x_basis = vec![Pauli::X; l];
    let field = |b: &statevec::Bitstring| (0..l).map(|q| b.eigenvalue(q)).sum::<f64>();
    let hopping = |b: &statevec::Bitstring| {
        bonds.iter().map(|&(i, j)| b.eigenvalue(i) * b.eigenvalue(j)).sum::<f64>()
    };

    let (z_values, x_values): (Vec<f64>, Vec<f64>) = match noise {
        None => {
            let s = circuit.run(initial)?;
            let z = statevec::sample_bitstrings(&s, &z_basis, shots, rng::substream(seed, &[0]).random())?;
            let x = statevec::sample_bitstrings(&s, &x_basis, shots, rng::substream(seed, &[1]).random())?;
            (z.iter().map(field).collect(), x.iter().map(hopping).collect())
        }
        Some(model) => {
            model.validate()?;
            let one_shot = |group: u64, basis: &[Pauli], k: usize| -> Result<statevec::Bitstring> {
                let mut r = rng::substream(seed, &[group, k as u64]);
                let mut s = noise::run_noisy(circuit, initial, model, &mut r)?;
                statevec::rotate_to_basis(&mut s, basis)?;
                Ok(statevec::sample_with(&s, 1, &mut r)[0])
            };
            let z: Vec<_> = (0..shots)
                .into_par_iter()
                .map(|k| one_shot(0, &z_basis, k))
                .collect::<Result<_>>()?;
            let x: Vec<_> = (0..shots)
                .into_par_iter()
                .map(|k| one_shot(1, &x_basis, k))
                .collect::<Result<_>>()?;
            (z.iter().map(field).collect(), x.iter().map(hopping).collect())
        }
    };
    let (mz, sz) = noise::mean_and_se(&z_values);
    let (mx, sx) = noise::mean_and_se(&x_values);
    Ok(EnergyEstimate {
        energy: -mx - mz,
        std_error: (sz * sz + sx * sx).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GradientRule {
    /// `(E(θ + ε e_k) - E(θ)) / ε`.
    #[default]
    OneSided,
    /// `(E(θ + ε e_k) - E(θ - ε e_k)) / 2ε`.
    Central,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "angles", rename_all = "snake_case")]
pub enum HybridInit {
    /// Uniform in `[-π, π]` from the run seed.
    Random,
    /// Interleaved `(γ₁, α₁, ...)`.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridRunConfig {
    pub l: usize,
    pub p: usize,
    /// Shots per measurement setting; `None` uses exact expectations.
    pub shots: Option<usize>,
    pub epsilon: f64,
    pub eta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub init: HybridInit,
    #[serde(default)]
    pub gradient: GradientRule,
    /// Stop early once the gradient norm falls below this.
    pub grad_tol: f64,
}

impl Default for HybridRunConfig {
    fn default() -> Self {
        Self {
            l: 7,
            p: 1,
            shots: Some(2000),
            epsilon: 0.05,
            eta: 0.005,
            iterations: 100,
            seed: 1,
            init: HybridInit::Random,
            gradient: GradientRule::OneSided,
            grad_tol: 1e-6,
        }
    }
}

impl HybridRunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == Some(0) {
            return Err(Error::usage("shots", "must be at least 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::usage("epsilon", "must be positive"));
        }
        if !(self.eta > 0.0) {
            return Err(Error::usage("eta", "must be positive"));
        }
        if self.p == 0 {
            return Err(Error::usage("p", "must be at least 1"));
        }
        if let HybridInit::Explicit(x) = &self.init {
            if x.len() != 2 * self.p {
                return Err(Error::usage("init", format!("expected {} angles", 2 * self.p)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridStep {
    pub iteration: usize,
    pub params: Vec<f64>,
    pub energy: f64,
    pub std_error: f64,
    /// Norm of the gradient estimated at these parameters (absent on the last entry).
    pub gradient_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridTrace {
    pub steps: Vec<HybridStep>,
    /// Energy rose for 10 consecutive iterations at some point.
    pub diverged: bool,
    pub converged: bool,
}

const DIVERGENCE_RUN: usize = 10;

/// Gradient descent on measured energies with finite-difference gradients.
///
/// Entry `k` of the trace holds the parameters after `k` updates and the
/// energy measured there.
pub fn hybrid_gradient_descent(config: &HybridRunConfig, noise: Option<&NoiseModel>) -> Result<HybridTrace> {
    config.validate()?;
    let l = config.l;
    let n = 2 * config.p;
    let initial = State::zero(l)?;
    let mut theta = match &config.init {
        HybridInit::Random => optimize::restart_start(config.seed, usize::MAX, n, std::f64::consts::PI),
        HybridInit::Explicit(x) => x.clone(),
    };
    // every evaluation gets its own stream: (iteration, slot)
    let measure = |x: &[f64], iteration: usize, slot: usize| -> Result<EnergyEstimate> {
        let circuit = gs_circuit(l, &GsAnsatzParams::from_slice(x)?)?;
        let seed = rng::substream(config.seed, &[iteration as u64, slot as u64]).random();
        measure_energy_sampled(&circuit, &initial, config.shots, seed, noise)
    };

    let mut steps = Vec::with_capacity(config.iterations + 1);
    let mut rising = 0usize;
    let mut diverged = false;
    let mut converged = false;
    let mut here = measure(&theta, 0, 0)?;
    for it in 0..config.iterations {
        let grad: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| -> Result<f64> {
                let mut plus = theta.clone();
                plus[k] += config.epsilon;
                let e_plus = measure(&plus, it, 1 + 2 * k)?.energy;
                match config.gradient {
                    GradientRule::OneSided => Ok((e_plus - here.energy) / config.epsilon),
                    GradientRule::Central => {
                        let mut minus = theta.clone();
                        minus[k] -= config.epsilon;
                        let e_minus = measure(&minus, it, 2 + 2 * k)?.energy;
                        Ok((e_plus - e_minus) / (2.0 * config.epsilon))
                    }
                }
            })
            .collect::<Result<_>>()?;
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        steps.push(HybridStep {
            iteration: it,
            params: theta.clone(),
            energy: here.energy,
            std_error: here.std_error,
            gradient_norm: Some(norm),
        });
        if norm < config.grad_tol {
            converged = true;
            break;
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= config.eta * g;
        }
        let next = measure(&theta, it + 1, 0)?;
        if next.energy > here.energy {
            rising += 1;
            if rising >= DIVERGENCE_RUN {
                diverged = true;
            }
        } else {
            rising = 0;
        }
        here = next;
    }
    if !converged {
        steps.push(HybridStep {
            iteration: steps.len(),
            params: theta,
            energy: here.energy,
            std_error: here.std_error,
            gradient_norm: None,
        });
    }
    Ok(HybridTrace {
        steps,
        diverged,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_ansatz_energy() {
        let s = gs_ansatz(7, &GsAnsatzParams::zeros(0)).unwrap();
        assert_eq!(s, State::zero(7).unwrap());
        assert!((energy_cost(&s, 7).unwrap() + 7.0).abs() < 1e-12);
        let s = gs_ansatz(7, &GsAnsatzParams::zeros(3)).unwrap();
        assert_eq!(s, State::zero(7).unwrap());
    }

    #[test]
    fn plus_state_energy() {
        let mut s = State::zero(7).unwrap();
        for q in 0..7 {
            s.rotate(q, Pauli::Y, std::f64::consts::FRAC_PI_2).unwrap();
        }
        assert!((energy_cost(&s, 7).unwrap() + 7.0).abs() < 1e-12);
    }

    #[test]
    fn interleaving_round_trip() {
        let p = GsAnsatzParams::new(vec![0.1, 0.2], vec![0.3, 0.4]).unwrap();
        assert_eq!(p.to_vec(), vec![0.1, 0.3, 0.2, 0.4]);
        assert_eq!(GsAnsatzParams::from_slice(&p.to_vec()).unwrap(), p);
        assert!(GsAnsatzParams::new(vec![0.1], vec![]).is_err());
    }

    #[test]
    fn minimal_representative_keeps_the_state() {
        let p = GsAnsatzParams::new(vec![2.1, -1.4], vec![-2.9, 0.9]).unwrap();
        let r = p.minimal_representative();
        assert!(r.gammas.iter().chain(&r.alphas).all(|a| a.abs() <= FRAC_PI_4 + 1e-12));
        let f = statevec::fidelity(&gs_ansatz(7, &p).unwrap(), &gs_ansatz(7, &r).unwrap()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_mode_matches_energy_cost() {
        let p = GsAnsatzParams::new(vec![0.4], vec![-0.7]).unwrap();
        let c = gs_circuit(7, &p).unwrap();
        let init = State::zero(7).unwrap();
        let est = measure_energy_sampled(&c, &init, None, 3, None).unwrap();
        let exact = energy_cost(&c.run(&init).unwrap(), 7).unwrap();
        assert!((est.energy - exact).abs() < 1e-12);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn product_state_shots() {
        let c = gs_circuit(7, &GsAnsatzParams::zeros(1)).unwrap();
        let est = measure_energy_sampled(&c, &State::zero(7).unwrap(), Some(10_000), 5, None).unwrap();
        assert!((est.energy + 7.0).abs() <= 3.0 * est.std_error.max(1e-12));
    }

    #[test]
    fn zero_iterations_give_initial_energy_only() {
        let cfg = HybridRunConfig {
            iterations: 0,
            shots: None,
            ..Default::default()
        };
        let t = hybrid_gradient_descent(&cfg, None).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.steps[0].iteration, 0);
    }

    #[test]
    fn invalid_hybrid_config() {
        let bad = HybridRunConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(matches!(hybrid_gradient_descent(&bad, None), Err(Error::Usage { .. })));
    }
}
