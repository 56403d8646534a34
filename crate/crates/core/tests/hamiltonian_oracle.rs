mod common;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfdsim::hamiltonian::{build_tfim, diagonalize, ground_state, Boundary};
use tfdsim::{Pauli, PauliTerm, State};

use common::{jacobi_eigh, matvec, tfim_matrix};

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> State {
    let amps = (0..1 << n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    State::normalized(amps).unwrap()
}

#[test]
fn critical_ring_energy_and_gap_match_dense_oracle() {
    let h = build_tfim(7, 1.0, -1.0, Boundary::Ring).unwrap();
    let spectrum = diagonalize(&h).unwrap();
    let (oracle, _) = jacobi_eigh(&tfim_matrix(7, 1.0, -1.0));
    for (a, b) in spectrum.energies().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
    let e0 = spectrum.energies()[0];
    let gap = spectrum.gap().unwrap();
    assert!((e0 - -8.98).abs() <= 0.01, "E0 = {e0}");
    assert!((gap - 0.23).abs() <= 0.01, "gap = {gap}");
    assert!((oracle[1] - oracle[0] - gap).abs() < 1e-9);
}

#[test]
fn classical_ring_of_three_has_known_levels() {
    let h = build_tfim(3, 0.0, 1.0, Boundary::Ring).unwrap();
    let e = diagonalize(&h).unwrap().energies().to_vec();
    let expected = [-1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 3.0, 3.0];
    for (a, b) in e.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{e:?}");
    }
    assert_eq!(diagonalize(&h).unwrap().multiplets().len(), 2);
}

#[test]
fn open_chain_matches_oracle_without_the_wrap_bond() {
    let h = build_tfim(4, 0.7, 1.0, Boundary::Open).unwrap();
    let mut m = tfim_matrix(4, 0.7, 1.0);
    // drop the (3, 0) bond
    for x in 0..16usize {
        m[x ^ 0b1001][x] -= 1.0;
    }
    let (oracle, _) = jacobi_eigh(&m);
    for (a, b) in diagonalize(&h).unwrap().energies().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn spectral_reconstruction_on_random_states() {
    let h = build_tfim(5, 1.3, -1.0, Boundary::Ring).unwrap();
    let spectrum = diagonalize(&h).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let psi = random_state(5, &mut rng);
        let direct = h.apply(&psi).unwrap();
        let rebuilt = spectrum.apply_function(&psi, |e| Complex64::new(e, 0.0)).unwrap();
        let err = direct.iter().zip(&rebuilt).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "reconstruction error {err}");
    }
}

#[test]
fn eigenstates_carry_definite_parity() {
    let h = build_tfim(6, 1.0, -1.0, Boundary::Ring).unwrap();
    let parity: Vec<(usize, Pauli)> = (0..6).map(|q| (q, Pauli::Z)).collect();
    let parity = [PauliTerm::new(1.0, &parity).unwrap()];
    let spectrum = diagonalize(&h).unwrap();
    for range in spectrum.multiplets() {
        if range.len() != 1 {
            continue;
        }
        let p = spectrum.eigenstates()[range.start].expectation(&parity).unwrap();
        assert!((p.abs() - 1.0).abs() < 1e-9, "parity {p}");
    }
    let ground = ground_state(&h).unwrap();
    assert!((ground.state.expectation(&parity).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn flipping_the_sign_mirrors_the_spectrum() {
    let up = diagonalize(&build_tfim(5, 0.6, 1.0, Boundary::Ring).unwrap()).unwrap();
    let down = diagonalize(&build_tfim(5, 0.6, -1.0, Boundary::Ring).unwrap()).unwrap();
    for (a, b) in up.energies().iter().zip(down.energies().iter().rev()) {
        assert!((a + b).abs() < 1e-10);
    }
}

#[test]
fn oracle_eigenvectors_are_eigenvectors() {
    let m = tfim_matrix(4, 1.0, -1.0);
    let (values, vectors) = jacobi_eigh(&m);
    for (e, v) in values.iter().zip(&vectors) {
        let hv = matvec(&m, v);
        let err = hv.iter().zip(v).map(|(a, b)| (a - e * b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }
}
