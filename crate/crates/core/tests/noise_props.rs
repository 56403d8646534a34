mod common;

use std::f64::consts::PI;

use tfdsim::circuit::Circuit;
use tfdsim::noise::{
    calibrate_lambda, gamma_grid, mc_energy, noise_curve, rotation_channel, run_noisy, trajectory_energies, NoiseModel, DEFAULT_LAMBDA_GRID,
};
use tfdsim::qaoa::{cost_hamiltonian, gs_circuit, GsAnsatzParams};
use tfdsim::{Pauli, PauliPair, State};

use common::simpson;

/// `E[f(φ)]` for `φ ~ N(0, λ)` truncated to `[-π, π]`.
fn truncated_mean(lambda: f64, f: impl Fn(f64) -> f64) -> f64 {
    let w = |x: f64| (-x * x / (2.0 * lambda * lambda)).exp();
    simpson(|x| w(x) * f(x), -PI, PI, 4000) / simpson(w, -PI, PI, 4000)
}

fn within(estimate: (f64, f64), expected: f64, k: f64) -> bool {
    (estimate.0 - expected).abs() <= k * estimate.1.max(1e-15)
}

#[test]
fn averaged_rotation_is_a_depolarizing_channel() {
    for lambda in [0.1, 0.22, 0.3] {
        let ch = rotation_channel(lambda, 200_000, 17).unwrap();
        let identity = truncated_mean(lambda, |x| (x / 2.0).cos().powi(2));
        assert!(within(ch.identity, identity, 3.0), "λ={lambda}: {:?} vs {identity}", ch.identity);
        for k in 0..3 {
            assert!(within(ch.pauli[k], (1.0 - identity) / 3.0, 3.0), "λ={lambda} pauli {k}");
            assert!(within(ch.asymmetry[k], 0.0, 3.0), "λ={lambda} asymmetry {k}");
            assert!(within(ch.odd[k], 0.0, 3.0), "λ={lambda} odd {k}");
            assert!(within(ch.cross[k], 0.0, 3.0), "λ={lambda} cross {k}");
        }
    }
}

#[test]
fn trajectory_average_contracts_the_bloch_vector() {
    // identity gate followed by the noise rotations: <Z> -> (1 + 2 E[cos φ]) / 3
    let lambda = 0.3;
    let mut c = Circuit::new(2);
    c.two_pauli(0, 1, PauliPair::XX, 0.0);
    let model = NoiseModel {
        lambda,
        ..NoiseModel::default()
    };
    let init = State::zero(2).unwrap();
    let values: Vec<f64> = (0..20_000)
        .map(|t| {
            let s = run_noisy(&c, &init, &model, &mut model.trajectory_rng(t)).unwrap();
            s.pauli_expectation(&[(0, Pauli::Z)]).unwrap()
        })
        .collect();
    let est = tfdsim::noise::mean_and_se(&values);
    let expected = (1.0 + 2.0 * truncated_mean(lambda, f64::cos)) / 3.0;
    assert!(within(est, expected, 3.0), "{est:?} vs {expected}");
}

fn p1_circuit(l: usize) -> Circuit {
    gs_circuit(l, &GsAnsatzParams::new(vec![0.196], vec![0.393]).unwrap()).unwrap()
}

#[test]
fn noiseless_trajectories_give_the_exact_energy() {
    let c = p1_circuit(7);
    let init = State::zero(7).unwrap();
    let h = cost_hamiltonian(7).unwrap();
    let exact = h.expectation(&c.run(&init).unwrap()).unwrap();
    let model = NoiseModel::default();
    let energies = trajectory_energies(&c, &init, &h, &model).unwrap();
    assert!(energies.iter().all(|&e| e == exact));
    let (mean, se) = mc_energy(&c, &init, &h, &model).unwrap();
    assert!((mean - exact).abs() < 1e-12 && se < 1e-12);
}

#[test]
fn standard_error_halves_with_four_times_the_trajectories() {
    let c = p1_circuit(5);
    let init = State::zero(5).unwrap();
    let h = cost_hamiltonian(5).unwrap();
    let model = NoiseModel {
        gamma: 0.1,
        lambda: 0.22,
        n_samples: 500,
        ..NoiseModel::default()
    };
    let (_, se1) = mc_energy(&c, &init, &h, &model).unwrap();
    let (_, se4) = mc_energy(&c, &init, &h, &NoiseModel { n_samples: 2000, ..model }).unwrap();
    let ratio = se4 / se1;
    assert!((0.4..0.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn energy_curve_rises_with_gate_error() {
    let c = gs_circuit(7, &GsAnsatzParams::new(vec![-0.196], vec![-0.393]).unwrap()).unwrap();
    let init = State::zero(7).unwrap();
    let h = cost_hamiltonian(7).unwrap();
    let model = NoiseModel {
        n_samples: 300,
        ..NoiseModel::default()
    };
    let curve = noise_curve(1, &c, &init, &h, &model, &gamma_grid(0.3, 0.03).unwrap()).unwrap();
    for w in curve.rows.windows(2) {
        let slack = 2.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        assert!(w[1].mean >= w[0].mean - slack, "{:?}", w);
    }
    assert!(curve.rows.last().unwrap().mean > curve.rows[0].mean);
}

#[test]
fn calibration_recovers_a_planted_lambda() {
    let l = 4;
    let init = State::zero(l).unwrap();
    let h = cost_hamiltonian(l).unwrap();
    let circuits = [
        gs_circuit(l, &GsAnsatzParams::new(vec![0.3], vec![0.35]).unwrap()).unwrap(),
        gs_circuit(l, &GsAnsatzParams::new(vec![0.3, 0.4], vec![0.35, 0.2]).unwrap()).unwrap(),
    ];
    let grid = gamma_grid(0.3, 0.01).unwrap();
    let curves = |p: usize, lambda: f64| {
        let model = NoiseModel {
            lambda,
            n_samples: 200,
            ..NoiseModel::default()
        };
        noise_curve(p, &circuits[p - 1], &init, &h, &model, &grid)
    };
    let planted = 0.18;
    let measured: Vec<(usize, f64)> = [1, 2]
        .into_iter()
        .map(|p| (p, curves(p, planted).unwrap().rows[5].mean))
        .collect();
    let cal = calibrate_lambda(&measured, &DEFAULT_LAMBDA_GRID, curves).unwrap();
    assert_eq!(cal.best_lambda, Some(planted), "{cal:?}");
    let row = cal.rows.iter().find(|r| r.lambda == planted).unwrap();
    assert!(row.gammas.iter().all(|g| (g.unwrap() - 0.05).abs() < 1e-12));
}
