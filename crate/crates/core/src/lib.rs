//! Information-theoretically secure homomorphic encryption for IQP circuits
//! with Z one-time pads, simulated on dense density matrices.
//!
//! Layout:
//!
//! * [`pauli`]: Pauli operators in `i^c Z^u X^v` form, Pauli decomposition,
//!   Bloch vectors and the xy-plane input predicate.
//! * [`sim`]: density matrices, diagonal gates, X-basis measurement and the
//!   trace distance.
//! * [`circuit`]: IQP circuits and their admissibility check.
//! * [`hashing`]: the k-wise independent hash family over GF(2^κ).
//! * [`scheme`]: key generation, encryption, evaluation and decryption.
//! * [`verification`]: correctness and security distances, the
//!   weak-to-strong amplification factor and the PIR communication bound.
//! * [`formats`] and [`delegation`]: file formats and the client/server
//!   exchange.

pub mod circuit;
pub mod delegation;
pub mod error;
pub mod formats;
pub mod hashing;
pub mod linalg;
pub mod pauli;
pub mod random;
pub mod scheme;
pub mod sim;
pub mod verification;

pub use circuit::{validate_iqp, CircuitSpec, GateSpec, IqpCircuit};
pub use error::{Error, Result};
pub use hashing::{sample_hash, HashFunction};
pub use pauli::{bloch_vector, is_xy_state, pauli_decompose, BlochVector, Pauli, PauliOperator};
pub use scheme::{
    decrypt, encrypt, evaluate, evaluate_exact, keygen, Ciphertext, Decrypted, Register,
    SchemeParams, SecretKey,
};
pub use sim::{run_circuit, trace_distance, DensityMatrix, DiagonalGate, GateKind};
