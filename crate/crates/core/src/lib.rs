//! Stabilizer simulation of measurement-based hashing entanglement
//! purification.
//!
//! The crate is layered bottom-up:
//!
//! * [`gf2`], [`pauli`], [`circuit`], [`tableau`], [`dense`]: bit-packed
//!   Pauli algebra, Clifford circuits, the stabilizer tableau and a dense
//!   oracle for small systems.
//! * [`noise`]: local depolarizing noise, sampling and dense channels.
//! * [`resource`]: hashing plans, their Clifford circuits and the compact
//!   resource states that implement them by Bell-measurement read-in.
//! * [`engine`]: Monte Carlo execution of gate-based and measurement-based
//!   hashing on Bell-diagonal ensembles, with maximum-likelihood decoding.
//! * [`analytics`]: closed-form entropies, yields and noise thresholds.
//! * [`selftest`]: reduced-size property suites used by the CLI.

pub mod analytics;
pub mod circuit;
pub mod dense;
pub mod engine;
pub mod gf2;
pub mod noise;
pub mod pauli;
pub mod resource;
pub mod rng;
pub mod selftest;
pub mod tableau;

pub use circuit::{Basis, CliffordCircuit, Gate};
pub use pauli::{Pauli, PauliFrame, PauliOperator, Phase};
pub use tableau::StabilizerTableau;
