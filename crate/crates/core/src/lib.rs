//! Simulation of a succinct interactive argument for QMA: the two-prover
//! Pauli-braiding game, its single-prover compilation, the Hamiltonian
//! pipeline, a Merkle-based succinct layer, and numerical checks of the
//! underlying operator inequalities.

pub mod bits;
pub mod compiler;
pub mod error;
pub mod games;
pub mod hamiltonian;
pub mod normlab;
pub mod pauli;
pub mod rng;
pub mod simulator;
pub mod smallbias;
pub mod succinct;

pub use bits::Bits;
pub use error::{Error, Result};
