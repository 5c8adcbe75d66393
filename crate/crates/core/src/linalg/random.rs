use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Deterministic unit-norm complex vector of length `dim` drawn from
/// `seed`; real and imaginary parts are independent uniforms on [-1, 1).
///
/// # Panics
/// If `dim == 0`.
pub fn random_coefficients(dim: usize, seed: u64) -> Vec<Complex64> {
    assert!(dim >= 1, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(uniform(&mut rng), uniform(&mut rng)))
            .collect();
        let norm = super::norm(&v);
        if norm > 0.0 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    let bits = rng.next_u64() >> 11;
    2.0 * (bits as f64) * (1.0 / (1u64 << 53) as f64) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_normalised() {
        let a = random_coefficients(64, 1);
        assert_eq!(a, random_coefficients(64, 1));
        assert!((super::super::norm(&a) - 1.0).abs() <= 1e-14);
        assert!(a.iter().any(|z| z.re != 0.0) && a.iter().any(|z| z.im != 0.0));

        let b = random_coefficients(64, 2);
        assert!(super::super::dot(&a, &b).norm() < 1.0);

        let one = random_coefficients(1, 77);
        assert!((one[0].norm() - 1.0).abs() <= 1e-15);
    }
}
