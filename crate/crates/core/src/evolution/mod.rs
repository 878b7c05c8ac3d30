//! Deterministic evolution laws and the Hamiltonians they generate.

mod permutation;
mod spectrum;
mod unitary;

pub use permutation::{
    bit_shift_universe, cogwheel, from_update_rule, GeneralizedPermutation, UniverseDescription,
    MAX_SHIFT_SITES,
};
pub use spectrum::{extract_hamiltonian, spectrum, Branch, Hamiltonian, Spectrum, DEGENERACY_GAP};
pub use unitary::{TimeStep, UnitaryMatrix, UNITARITY_TOL};
