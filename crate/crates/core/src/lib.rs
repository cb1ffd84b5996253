//! Stabilizer simulation of nine-qubit surface-code state preparation,
//! its concatenation to 81 qubits, and decoding of the resulting records.

pub mod analysis;
pub mod bits;
pub mod circuit;
pub mod concat;
pub mod dd;
pub mod error;
pub mod faultscan;
pub mod frame;
pub mod montecarlo;
pub mod noise;
pub mod pauli;
pub mod soft;
pub mod surface9;
pub mod tableau;

pub use circuit::{CliffordCircuit, Gate};
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString};
pub use tableau::StabilizerTableau;
