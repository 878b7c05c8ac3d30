//! Numerical laboratory for deterministic quantum mechanics on finite
//! permutation universes.
//!
//! * [`state`]: amplitudes, ontological vs superposed states, Born weights.
//! * [`evolution`]: permutation laws, universe builders, spectra and the
//!   emergent Hamiltonian `U = exp(-i H dt)`.
//! * [`conservation`]: checks that permutation dynamics carries the
//!   superposition coefficients unchanged, plus negative controls.
//! * [`operators`]: Heisenberg evolution, commutators, beable sets and the
//!   light-cone test on a local automaton.
//! * [`bell`]: a Bell/CHSH experiment driven by a setting-correlated
//!   hidden-variable density.
//! * [`cli`]: the experiment runner behind the `ontic` binary.

pub mod bell;
pub mod cli;
pub mod conservation;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod operators;
pub mod random;
pub mod state;

pub use error::{Error, Result};
