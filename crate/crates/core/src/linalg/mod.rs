//! Dense complex linear algebra backbone.
//!
//! Storage is dense and row-major throughout. Band structure of the
//! physical operators is only exploited opportunistically (zero entries are
//! skipped in products, decoupled blocks are diagonalised separately).

pub(crate) mod eigen;
mod lu;
mod matrix;
mod random;
mod sparse;

pub use eigen::{hermitian_eigendecompose, hermitian_eigendecompose_with, unitary_exp_step, EigenSystem};
pub use lu::LuFactorization;
pub use matrix::ComplexMatrix;
pub use random::random_coefficients;
pub use sparse::SparseRows;

use alloc::vec::Vec;
use num_complex::Complex64;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// `⟨a|b⟩ = Σ conj(a_j) b_j`.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = ZERO;
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    libm::sqrt(norm_sqr(a))
}

/// Max-norm of the difference of two equally sized vectors.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub(crate) fn scaled(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|z| z * s).collect()
}
