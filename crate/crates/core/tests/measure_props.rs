mod common;

use rayon::prelude::*;
use tfdsim::hamiltonian::{build_tfim, ground_state, Boundary};
use tfdsim::measure::{correlators, ring_distance_correlators, symmetry_postselect, z_correlators_from_samples};
use tfdsim::noise::{run_noisy, NoiseModel};
use tfdsim::qaoa::cost_hamiltonian;
use tfdsim::statevec::{sample_bitstrings, sample_with};
use tfdsim::tfd::{build_tfd_target, Beta, TfdCircuit, TfdFamily};
use tfdsim::{Bitstring, Pauli, State};

use common::{jacobi_eigh, tfim_matrix, xx_real, z_string};

const ANGLES: [f64; 4] = [2.55, 1.40, -0.785, 1.22];

fn noisy_samples(model: &NoiseModel, shots: usize) -> Vec<Bitstring> {
    let h = build_tfim(3, 1.0, 1.0, Boundary::Ring).unwrap();
    let gates = TfdCircuit::new(TfdFamily::Minimal, &h).unwrap().gates_from_zero(&ANGLES).unwrap();
    let zero = State::zero(6).unwrap();
    (0..shots)
        .into_par_iter()
        .map(|t| {
            let mut rng = model.trajectory_rng(t);
            let s = run_noisy(&gates, &zero, model, &mut rng).unwrap();
            sample_with(&s, 1, &mut rng)[0]
        })
        .collect()
}

#[test]
fn ideal_tfd_samples_all_survive() {
    let h = build_tfim(3, 1.0, 1.0, Boundary::Ring).unwrap();
    for beta in [0.0, 1.0, f64::INFINITY] {
        let target = build_tfd_target(&h, Beta::new(beta).unwrap()).unwrap();
        let samples = sample_bitstrings(&target.state, &[Pauli::Z; 6], 10_000, 3).unwrap();
        assert_eq!(symmetry_postselect(&samples, 3).unwrap().selection_rate, 1.0);
    }
    let ansatz = TfdCircuit::new(TfdFamily::Minimal, &h).unwrap().prepare(&ANGLES).unwrap();
    let samples = sample_bitstrings(&ansatz, &[Pauli::Z; 6], 10_000, 4).unwrap();
    assert_eq!(symmetry_postselect(&samples, 3).unwrap().selection_rate, 1.0);
}

#[test]
fn gate_angle_errors_keep_the_parity_sector() {
    let model = NoiseModel {
        gamma: 0.3,
        ..NoiseModel::default()
    };
    let samples = noisy_samples(&model, 2000);
    assert_eq!(symmetry_postselect(&samples, 3).unwrap().selection_rate, 1.0);
}

#[test]
fn depolarizing_noise_lowers_the_selection_rate() {
    let model = NoiseModel {
        lambda: 0.22,
        ..NoiseModel::default()
    };
    let samples = noisy_samples(&model, 2000);
    let report = symmetry_postselect(&samples, 3).unwrap();
    assert!(report.selection_rate < 1.0);
    assert!(report.corrected.entries().iter().all(|c| c.value.abs() <= 1.0));
}

#[test]
fn exact_z_correlators_match_the_amplitude_oracle() {
    let h = build_tfim(3, 1.0, 1.0, Boundary::Ring).unwrap();
    let target = build_tfd_target(&h, Beta::new(0.8).unwrap()).unwrap();
    let amps: Vec<(f64, f64)> = target.state.amplitudes().iter().map(|a| (a.re, a.im)).collect();
    let set = correlators(&target.state, 3, Pauli::Z).unwrap();
    let cases: [(&str, &[usize]); 5] = [("1A2A", &[0, 1]), ("1A3A", &[0, 2]), ("2A2B", &[1, 4]), ("1A", &[0]), ("3B", &[5])];
    for (label, sites) in cases {
        assert!((set.get(label, Pauli::Z).unwrap() - z_string(&amps, sites)).abs() < 1e-12, "{label}");
    }
}

#[test]
fn sampled_correlators_converge_to_exact_values() {
    let h = build_tfim(3, 1.0, 1.0, Boundary::Ring).unwrap();
    let target = build_tfd_target(&h, Beta::new(1.0).unwrap()).unwrap();
    let n = 40_000;
    let samples = sample_bitstrings(&target.state, &[Pauli::Z; 6], n, 8).unwrap();
    let sampled = z_correlators_from_samples(&samples, 3).unwrap();
    let exact = correlators(&target.state, 3, Pauli::Z).unwrap();
    for c in sampled.entries() {
        let e = exact.get(&c.label, Pauli::Z).unwrap();
        let se = ((1.0 - e * e) / n as f64).sqrt().max(1e-12);
        assert!((c.value - e).abs() <= 4.0 * se, "{}: {} vs {e}", c.label, c.value);
    }
}

#[test]
fn cross_correlations_are_strongest_at_infinite_temperature() {
    let h = build_tfim(3, 1.0, 1.0, Boundary::Ring).unwrap();
    let cross = |beta: f64| {
        let t = build_tfd_target(&h, Beta::new(beta).unwrap()).unwrap();
        let set = correlators(&t.state, 3, Pauli::Z).unwrap();
        set.get("1A1B", Pauli::Z).unwrap().abs()
    };
    let hot = cross(0.0);
    for beta in [0.5, 1.0, 2.0, f64::INFINITY] {
        assert!(hot >= cross(beta) - 1e-12);
    }
}

#[test]
fn ring_distance_correlators_match_the_dense_ground_state() {
    let (_, vectors) = jacobi_eigh(&tfim_matrix(7, 1.0, -1.0));
    let ground = ground_state(&cost_hamiltonian(7).unwrap()).unwrap();
    let x = ring_distance_correlators(&ground.state, 7, Pauli::X).unwrap();
    let z = ring_distance_correlators(&ground.state, 7, Pauli::Z).unwrap();
    let amps: Vec<(f64, f64)> = vectors[0].iter().map(|&a| (a, 0.0)).collect();
    assert_eq!(x.len(), 3);
    for d in 1..=3 {
        assert!((x[d - 1].1 - xx_real(&vectors[0], 0, d)).abs() < 1e-9);
        assert!((z[d - 1].1 - z_string(&amps, &[0, d])).abs() < 1e-9);
        assert!(x[d - 1].2 < 1e-9 && z[d - 1].2 < 1e-9, "translation invariance");
    }
}
