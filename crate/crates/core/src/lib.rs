//! Phase-space simulation of superposed thermal states.
//!
//! States are finite sums of Gaussian-weighted coherent-state dyadics whose
//! Wigner functions, traces, moments and channel images are all computed in
//! closed form ([`gaussian`]). A dense truncated-Fock implementation
//! ([`fock`]) serves as an independent oracle for small parameters.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agreement;
pub mod bell;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod observables;
pub mod reference;
pub mod states;

pub use error::{Error, Result};
pub use gaussian::{PhasePoint, StateSum};

pub type C64 = num_complex::Complex64;
