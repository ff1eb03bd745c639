//! Adiabatic quantum counting by geometric phase estimation.
//!
//! The marked fraction `alpha` of a database is encoded in the Berry phase
//! acquired by a cyclic sweep through interpolated oracle Hamiltonians. A
//! control qubit drives the two halves of a superposition around the cycle in
//! opposite directions, so the dynamic phases cancel and the relative phase
//! `2 pi 2^j alpha` remains. Repeated sweeps at `j = 1..m`, each read out in
//! two bases, give coarse estimates of `2^j alpha mod 1` from which the binary
//! expansion of `alpha` is recovered.
//!
//! The sweep is simulated three ways: the exact two-level solution
//! ([`closed_form`]), fixed-step integration in the invariant subspace and
//! fixed-step integration of the full controlled register ([`integrator`]).

pub mod closed_form;
pub mod database;
pub mod error;
pub mod estimator;
pub mod hamiltonian;
pub mod integrator;
pub mod scheduler;
pub mod state;
pub mod validate;

pub use database::MarkedDatabase;
pub use error::{Error, Result};
pub use state::{StateVector, SubspaceState, C64};
