use alloc::vec::Vec;

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::{Error, Result};

/// Dense LU factorisation with partial pivoting, `PA = LU`.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&i, &j| lu[i * n + k].norm().total_cmp(&lu[j * n + k].norm()))
                .unwrap_or(k);
            if lu[pivot * n + k].norm() == 0.0 {
                return Err(Error::Singular);
            }
            if pivot != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot * n + j);
                }
                perm.swap(k, pivot);
            }
            let inv = 1.0 / lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] * inv;
                lu[i * n + k] = f;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= f * u;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, random_coefficients};

    #[test]
    fn solves_random_system() {
        let n = 9;
        let a = ComplexMatrix::from_row_major(n, random_coefficients(n * n, 11)).unwrap();
        let x = random_coefficients(n, 12);
        let b = a.apply(&x);
        let lu = LuFactorization::new(&a).unwrap();
        assert!(max_abs_diff(&lu.solve(&b), &x) <= 1e-12);
    }

    #[test]
    fn singular_is_reported() {
        let a = ComplexMatrix::zeros(3);
        assert_eq!(LuFactorization::new(&a).unwrap_err(), Error::Singular);
    }
}
