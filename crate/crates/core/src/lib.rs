//! Exact statevector simulation of thermofield-double and critical Ising
//! state preparation with variational circuits, gate-noise Monte Carlo and
//! parity post-selection.

pub mod circuit;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod measure;
pub mod noise;
pub mod optimize;
pub mod pauli;
pub mod qaoa;
pub mod rng;
pub mod statevec;
pub mod tfd;

pub use error::{Error, Result};
pub use pauli::{Pauli, PauliPair, PauliTerm};
pub use statevec::{Bitstring, State};
