//! Dense state-vector simulation primitives.
//!
//! Qubit ordering convention, used everywhere in the crate: qubit 0 is the
//! most significant bit of the basis-state index, i.e. the topmost wire of a
//! circuit diagram. When a circuit has an ancilla, the ancilla is qubit 0.

mod sampling;
mod state;
mod unitary;

pub use sampling::{sample_counts, ShotOutcome};
pub use state::{apply_unitary, make_register, prob_ancilla_zero, StateVector, MAX_QUBITS};
pub use unitary::{
    adjoint, compose, controlled_embed, inverse_qft, qft, UnitaryMatrix, ALGEBRA_TOL, STATE_TOL,
};
