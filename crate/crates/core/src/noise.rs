//! Monte Carlo gate noise: fractional XX-angle errors and random-axis
//! rotations after every two-qubit gate.
//!
//! Each trajectory draws from its own stream keyed by `(seed, trajectory)`.
//! The stream does not depend on Γ, so curves over a Γ grid share their
//! random numbers and come out smooth.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::pauli::PauliPair;
use crate::rng::{self, StreamRng};
use crate::statevec::{self, State};

const TRAJECTORY_STREAM: u64 = 0x6e6f_6973;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseCorrelation {
    /// Fresh `r` for every two-qubit gate.
    #[default]
    PerGate,
    /// One `r` per trajectory shared by all its gates.
    PerTrajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Relative standard deviation of two-qubit gate angles.
    pub gamma: f64,
    /// Standard deviation of the random rotation angle, radians.
    pub lambda: f64,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub correlation: NoiseCorrelation,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            lambda: 0.0,
            n_samples: 1000,
            seed: 1,
            correlation: NoiseCorrelation::PerGate,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::argument(format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::argument(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if self.n_samples == 0 {
            return Err(Error::argument("n_samples must be at least 1"));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.gamma == 0.0 && self.lambda == 0.0
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Stream for trajectory `index`.
    pub fn trajectory_rng(&self, index: usize) -> StreamRng {
        rng::substream(self.seed, &[TRAJECTORY_STREAM, index as u64])
    }
}

/// `θ₀(1 + Γr)` with `r ~ N(0, 1)`.
pub fn draw_xx_angle<R: Rng + ?Sized>(theta0: f64, gamma: f64, rng: &mut R) -> f64 {
    let r: f64 = StandardNormal.sample(rng);
    theta0 * (1.0 + gamma * r)
}

/// Uniform axis on the sphere and `φ ~ N(0, λ)` conditioned on `|φ| ≤ π`.
pub fn draw_rotation<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> ([f64; 3], f64) {
    let axis = loop {
        let v: [f64; 3] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-12 {
            break v.map(|x| x / norm);
        }
    };
    let normal = Normal::new(0.0, lambda).expect("lambda is finite and nonnegative");
    let phi = loop {
        let phi: f64 = normal.sample(rng);
        if phi.abs() <= PI {
            break phi;
        }
    };
    (axis, phi)
}

fn apply_random_rotation<R: Rng + ?Sized>(
    state: &mut State,
    qubit: usize,
    lambda: f64,
    rng: &mut R,
) -> Result<()> {
    let (axis, phi) = draw_rotation(lambda, rng);
    state.apply_single_qubit(qubit, statevec::axis_rotation_matrix(axis, phi))
}

/// One noisy two-qubit gate: perturbed angle, then random rotations on both qubits.
pub fn noisy_two_pauli<R: Rng + ?Sized>(
    state: &mut State,
    (i, j): (usize, usize),
    basis: PauliPair,
    theta0: f64,
    model: &NoiseModel,
    r: Option<f64>,
    rng: &mut R,
) -> Result<()> {
    let angle = match r {
        Some(r) => theta0 * (1.0 + model.gamma * r),
        None => draw_xx_angle(theta0, model.gamma, rng),
    };
    // Γ = 0 must reproduce the ideal gate bit for bit
    let angle = if model.gamma == 0.0 { theta0 } else { angle };
    state.apply_two_pauli_exp(i, j, basis, angle)?;
    if model.lambda > 0.0 {
        apply_random_rotation(state, i, model.lambda, rng)?;
        apply_random_rotation(state, j, model.lambda, rng)?;
    }
    Ok(())
}

/// Noisy XX gate acting on `state`.
pub fn noisy_xx<R: Rng + ?Sized>(
    state: &mut State,
    i: usize,
    j: usize,
    theta0: f64,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<()> {
    noisy_two_pauli(state, (i, j), PauliPair::XX, theta0, model, None, rng)
}

/// One trajectory of `circuit` with every two-qubit gate noised.
pub fn run_noisy<R: Rng + ?Sized>(
    circuit: &Circuit,
    initial: &State,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<State> {
    let shared = match model.correlation {
        NoiseCorrelation::PerTrajectory => Some(StandardNormal.sample(rng)),
        NoiseCorrelation::PerGate => None,
    };
    let mut s = initial.clone();
    for gate in circuit.gates() {
        match *gate {
            Gate::TwoPauli { i, j, basis, angle } => {
                noisy_two_pauli(&mut s, (i, j), basis, angle, model, shared, rng)?
            }
            g => g.apply(&mut s)?,
        }
    }
    Ok(s)
}

/// Sample mean and its standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Energies of `model.n_samples` independent noisy trajectories.
pub fn trajectory_energies(
    circuit: &Circuit,
    initial: &State,
    observable: &HamiltonianSpec,
    model: &NoiseModel,
) -> Result<Vec<f64>> {
    model.validate()?;
    (0..model.n_samples)
        .into_par_iter()
        .map(|t| {
            let mut rng = model.trajectory_rng(t);
            let s = run_noisy(circuit, initial, model, &mut rng)?;
            observable.expectation(&s)
        })
        .collect()
}

/// Mean energy over noisy trajectories with its standard error.
pub fn mc_energy(
    circuit: &Circuit,
    initial: &State,
    observable: &HamiltonianSpec,
    model: &NoiseModel,
) -> Result<(f64, f64)> {
    Ok(mean_and_se(&trajectory_energies(circuit, initial, observable, model)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub gamma: f64,
    pub mean: f64,
    pub std_error: f64,
}

/// Mean energy versus Γ at fixed λ for one circuit depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseCurve {
    pub p: usize,
    pub lambda: f64,
    pub rows: Vec<CurvePoint>,
}

/// `0, step, 2 step, ... ≤ max` without accumulating rounding.
pub fn gamma_grid(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && max >= 0.0 && max.is_finite()) {
        return Err(Error::argument("gamma grid needs step > 0 and max >= 0"));
    }
    let n = (max / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| k as f64 * step).collect())
}

pub const DEFAULT_LAMBDA_GRID: [f64; 6] = [0.10, 0.14, 0.18, 0.22, 0.26, 0.30];

pub fn noise_curve(
    p: usize,
    circuit: &Circuit,
    initial: &State,
    observable: &HamiltonianSpec,
    model: &NoiseModel,
    gammas: &[f64],
) -> Result<NoiseCurve> {
    if gammas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::argument("gamma grid must be strictly increasing"));
    }
    let rows = gammas
        .iter()
        .map(|&g| {
            let (mean, std_error) =
                mc_energy(circuit, initial, observable, &model.with_gamma(g))?;
            Ok(CurvePoint {
                gamma: g,
                mean,
                std_error,
            })
        })
        .collect::<Result<_>>()?;
    Ok(NoiseCurve {
        p,
        lambda: model.lambda,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "gamma", rename_all = "snake_case")]
pub enum Threshold {
    /// The deep circuit is already worse at the first grid point.
    AtOrBelowStart(f64),
    Crossing(f64),
}

impl Threshold {
    pub fn gamma(&self) -> f64 {
        match *self {
            Threshold::AtOrBelowStart(g) | Threshold::Crossing(g) => g,
        }
    }
}

/// Smallest Γ where the deep curve rises above the shallow one, linearly interpolated.
pub fn find_threshold(shallow: &NoiseCurve, deep: &NoiseCurve) -> Result<Threshold> {
    let grid_ok = shallow.rows.len() == deep.rows.len()
        && shallow.rows.iter().zip(&deep.rows).all(|(a, b)| a.gamma == b.gamma);
    if !grid_ok || shallow.rows.is_empty() {
        return Err(Error::argument("threshold needs two curves on the same nonempty grid"));
    }
    let diff: Vec<f64> = deep.rows.iter().zip(&shallow.rows).map(|(d, s)| d.mean - s.mean).collect();
    let g: Vec<f64> = shallow.rows.iter().map(|r| r.gamma).collect();
    if diff[0] > 0.0 {
        return Ok(Threshold::AtOrBelowStart(g[0]));
    }
    match (1..diff.len()).find(|&k| diff[k] > 0.0) {
        Some(k) => {
            let t = -diff[k - 1] / (diff[k] - diff[k - 1]);
            Ok(Threshold::Crossing(g[k - 1] + t * (g[k] - g[k - 1])))
        }
        None => Err(Error::NoCrossing {
            gamma_start: g[0],
            gamma_end: g[g.len() - 1],
            diff_start: diff[0],
            diff_end: diff[diff.len() - 1],
        }),
    }
}

/// Γ at which the curve reaches `measured`, by inverse linear interpolation.
pub fn infer_gamma(curve: &NoiseCurve, measured: f64) -> Result<f64> {
    let rows = &curve.rows;
    if let Some(r) = rows.iter().find(|r| r.mean == measured) {
        return Ok(r.gamma);
    }
    for w in rows.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a.mean - measured) * (b.mean - measured) < 0.0 {
            let t = (measured - a.mean) / (b.mean - a.mean);
            return Ok(a.gamma + t * (b.gamma - a.gamma));
        }
    }
    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.mean), hi.max(r.mean))
    });
    Err(Error::Range(format!(
        "energy {measured} outside the p={} λ={} curve range [{lo}, {hi}]",
        curve.p, curve.lambda
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub lambda: f64,
    /// Inferred Γ per input depth, `None` when out of range.
    pub gammas: Vec<Option<f64>>,
    pub variance: Option<f64>,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub depths: Vec<usize>,
    pub rows: Vec<CalibrationRow>,
    pub best_lambda: Option<f64>,
}

/// For each λ, infers Γ̂ per depth and picks the λ with the smallest spread.
///
/// `curves(p, λ)` supplies the model curve; `measured` pairs depth with energy.
/// λ values where any inference fails are kept in the output but excluded.
pub fn calibrate_lambda<F>(measured: &[(usize, f64)], lambdas: &[f64], mut curves: F) -> Result<Calibration>
where
    F: FnMut(usize, f64) -> Result<NoiseCurve>,
{
    if measured.len() < 2 {
        return Err(Error::argument("calibration needs energies for at least two depths"));
    }
    if lambdas.is_empty() {
        return Err(Error::argument("empty lambda grid"));
    }
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mut gammas = Vec::with_capacity(measured.len());
        for &(p, e) in measured {
            let curve = curves(p, lambda)?;
            gammas.push(infer_gamma(&curve, e).ok());
        }
        let variance = if gammas.iter().all(Option::is_some) {
            let g: Vec<f64> = gammas.iter().flatten().copied().collect();
            let m = g.iter().sum::<f64>() / g.len() as f64;
            Some(g.iter().map(|x| (x - m).powi(2)).sum::<f64>() / g.len() as f64)
        } else {
            None
        };
        rows.push(CalibrationRow {
            lambda,
            gammas,
            excluded: variance.is_none(),
            variance,
        });
    }
    let best_lambda = rows
        .iter()
        .filter_map(|r| r.variance.map(|v| (r.lambda, v)))
        .fold(None::<(f64, f64)>, |best, (l, v)| match best {
            Some((_, bv)) if bv <= v => best,
            _ => Some((l, v)),
        })
        .map(|(l, _)| l);
    Ok(Calibration {
        depths: measured.iter().map(|m| m.0).collect(),
        rows,
        best_lambda,
    })
}

/// Monte Carlo estimate of the averaged random-rotation channel in the
/// process (chi) representation, with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimate {
    pub samples: usize,
    /// Weight of the identity, `<cos²(φ/2)>`.
    pub identity: (f64, f64),
    /// Weights of X, Y, Z, `<sin²(φ/2) n_k²>`.
    pub pauli: [(f64, f64); 3],
    /// Differences X−Y, Y−Z, Z−X estimated per sample.
    pub asymmetry: [(f64, f64); 3],
    /// Terms odd in φ, `<cos(φ/2) sin(φ/2) n_k>`.
    pub odd: [(f64, f64); 3],
    /// Off-diagonal Pauli pairs XY, YZ, ZX, `<sin²(φ/2) n_k n_l>`.
    pub cross: [(f64, f64); 3],
}

pub fn rotation_channel(lambda: f64, samples: usize, seed: u64) -> Result<ChannelEstimate> {
    if samples < 2 || !(lambda >= 0.0) {
        return Err(Error::argument("channel estimate needs λ ≥ 0 and at least 2 samples"));
    }
    let draws: Vec<([f64; 3], f64)> = (0..samples)
        .into_par_iter()
        .map(|k| draw_rotation(lambda, &mut rng::substream(seed, &[k as u64])))
        .collect();
    let stat = |f: &dyn Fn(&([f64; 3], f64)) -> f64| -> (f64, f64) {
        mean_and_se(&draws.iter().map(f).collect::<Vec<_>>())
    };
    let s2 = |phi: f64| (phi / 2.0).sin().powi(2);
    let pair = [(0usize, 1usize), (1, 2), (2, 0)];
    Ok(ChannelEstimate {
        samples,
        identity: stat(&|&(_, phi)| (phi / 2.0).cos().powi(2)),
        pauli: [0, 1, 2].map(|k| stat(&|&(n, phi)| s2(phi) * n[k] * n[k])),
        asymmetry: pair.map(|(a, b)| stat(&|&(n, phi)| s2(phi) * (n[a] * n[a] - n[b] * n[b]))),
        odd: [0, 1, 2].map(|k| stat(&|&(n, phi)| (phi / 2.0).cos() * (phi / 2.0).sin() * n[k])),
        cross: pair.map(|(a, b)| stat(&|&(n, phi)| s2(phi) * n[a] * n[b])),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;

    #[test]
    fn zero_noise_is_bit_identical() {
        let mut c = Circuit::new(3);
        c.rotation(0, Pauli::Y, 0.7)
            .two_pauli(0, 1, PauliPair::XX, 0.4)
            .two_pauli(1, 2, PauliPair::ZZ, -1.3)
            .rotation(2, Pauli::Z, 0.2);
        let init = State::zero(3).unwrap();
        let ideal = c.run(&init).unwrap();
        let model = NoiseModel::default();
        let noisy = run_noisy(&c, &init, &model, &mut model.trajectory_rng(0)).unwrap();
        assert_eq!(ideal, noisy);
    }

    #[test]
    fn angle_moments() {
        let mut rng = rng::root(4);
        let n = 100_000;
        let theta0 = 0.8;
        let draws: Vec<f64> = (0..n).map(|_| draw_xx_angle(theta0, 0.1, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((mean - theta0).abs() < 0.01 * theta0);
        assert!((sd - 0.1 * theta0).abs() < 0.01 * 0.1 * theta0 * 2.0);
    }

    #[test]
    fn truncated_angle_stays_in_range() {
        let mut rng = rng::root(9);
        for _ in 0..10_000 {
            let (n, phi) = draw_rotation(3.0, &mut rng);
            assert!(phi.abs() <= PI);
            assert!((n.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    fn curve(p: usize, means: &[f64]) -> NoiseCurve {
        NoiseCurve {
            p,
            lambda: 0.0,
            rows: means
                .iter()
                .enumerate()
                .map(|(k, &m)| CurvePoint {
                    gamma: k as f64 * 0.01,
                    mean: m,
                    std_error: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn threshold_cases() {
        let shallow = curve(1, &[-8.0, -7.9, -7.8, -7.7]);
        let deep = curve(3, &[-9.0, -8.4, -7.7, -7.0]);
        match find_threshold(&shallow, &deep).unwrap() {
            Threshold::Crossing(g) => assert!((g - (0.01 + 0.01 * 0.5 / 0.6)).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(find_threshold(&shallow, &shallow), Err(Error::NoCrossing { .. })));
        let worse = curve(3, &[-7.5, -7.0, -6.5, -6.0]);
        assert_eq!(find_threshold(&shallow, &worse).unwrap(), Threshold::AtOrBelowStart(0.0));
    }

    #[test]
    fn gamma_inference() {
        let c = curve(2, &[-9.0, -8.5, -8.0, -7.0]);
        assert_eq!(infer_gamma(&c, -8.5).unwrap(), 0.01);
        assert!((infer_gamma(&c, -7.5).unwrap() - 0.025).abs() < 1e-12);
        assert!(matches!(infer_gamma(&c, -6.0), Err(Error::Range(_))));
    }

    #[test]
    fn calibration_arity() {
        let r = calibrate_lambda(&[(1, -8.0)], &[0.1], |p, _| Ok(curve(p, &[-9.0, -7.0])));
        assert!(matches!(r, Err(Error::Argument(_))));
    }

    #[test]
    fn calibration_picks_consistent_lambda() {
        // at λ = 0.2 both depths agree on Γ = 0.01
        let make = |p: usize, lambda: f64| {
            let shift = if p == 1 { 0.0 } else { (lambda - 0.2) * 10.0 };
            Ok(curve(p, &[-9.0 + shift, -8.0 + shift, -7.0 + shift]))
        };
        let cal = calibrate_lambda(&[(1, -8.0), (2, -8.0)], &[0.1, 0.2, 0.3], make).unwrap();
        assert_eq!(cal.best_lambda, Some(0.2));
        assert!(cal.rows.iter().all(|r| !r.excluded));
    }

    #[test]
    fn gamma_grid_has_exact_points() {
        let g = gamma_grid(0.3, 0.01).unwrap();
        assert_eq!(g.len(), 31);
        assert_eq!(g[13], 13.0 * 0.01);
    }
}
