//! Symplectic description of Schrödinger dynamics on truncated separable
//! Hilbert spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense complex matrices, Hermitian eigendecomposition and
//!   exactly unitary exponential steps.
//! * [`hilbert`]: bases, states, the real chart `(q^j, p_j)`, the symplectic
//!   form `ω(u, v) = Im⟨u|v⟩` and the tautological one-form.
//! * [`operators`]: the concrete operators (position, momentum, quadratics,
//!   angular momentum, ...) in truncated bases, truncation-safety accounting,
//!   analytic-vector certificates and commutators.
//! * [`dynamics`]: time-dependent Hamiltonians, the Schrödinger vector field,
//!   Hamiltonian-function identities and unitary propagation.
//! * [`reduction`]: the U(1) momentum map, level sets, rays and the reduced
//!   (projective) dynamics.
//!
//! Everything here is `no_std` + `alloc`; file formats and the command line
//! live in the companion `geoschro` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod operators;
pub mod reduction;
pub mod tolerance;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use tolerance::Tolerances;
