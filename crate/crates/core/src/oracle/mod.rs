//! Exact small-system reference: dense density-matrix Lindblad integration,
//! exact Trotterized circuit simulation with ancilla reset, and exact
//! observable evaluation. Everything here is desk-scale (a few qubits) and
//! exists to pin the GGE scattering theory against ground truth.

pub mod lindblad;
pub mod observables;
pub mod ops;
pub mod reset;

pub use lindblad::{build_tfim_dense, jump_ops, LindbladPropagator, LindbladSpec};
pub use observables::{
    dense_gge, mode_occupations_exact, parity_op, project_even_parity, string_op, thermal_state,
};
pub use ops::{expectation, hermitize, min_eigenvalue, trace, CMat};
pub use reset::{embed_with_ancillas_down, system_marginal, ResetCircuit};
