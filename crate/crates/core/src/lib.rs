//! Scattering dynamics of weakly dissipative transverse-field Ising chains
//! in the generalized-Gibbs-ensemble (GGE) description, together with an
//! exact dense-density-matrix oracle for small chains.
//!
//! The crate covers both dissipation channels:
//!
//! - a continuous-time Lindblad bath, whose effect on the quasiparticle
//!   occupations reduces to Boltzmann-like scattering kernels
//!   ([`lindblad`]), and
//! - a digital reset protocol, where the chain is Trotterized and coupled
//!   to periodically reset ancilla qubits ([`reset`]).
//!
//! [`model`] builds the momentum grids and Bogoliubov tables, [`gge`] holds
//! the occupation state and its observables, [`steady`] finds stationary
//! distributions, and [`oracle`] integrates the full density matrix exactly
//! on short chains to validate everything else.

pub mod error;
pub mod gge;
pub mod lindblad;
pub mod model;
pub mod oracle;
pub mod reset;
pub mod steady;

pub use error::{Error, Result};
