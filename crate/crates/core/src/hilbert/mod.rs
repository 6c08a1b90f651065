//! Composite Hilbert spaces: layouts, sparse operators and density matrices.
//!
//! Basis indices are row-major over the factor list, first factor slowest.
//! A qubit's index 0 is its excited state, so `sigma^z = diag(+1, -1)`.

mod layout;
mod operator;
mod state;

pub use layout::{build_space, Factor, SpaceLayout};
pub use operator::{
    anticommutator, commutator, embed, fock_ops, ladder_ops, pauli, OperatorMatrix, HERMITIAN_TOL, PRUNE_TOL,
};
pub use state::{expectation, partial_trace, DensityState, EXPECTATION_IMAG_TOL, POSITIVITY_TOL, TRACE_TOL};
