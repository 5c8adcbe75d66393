use alloc::vec::Vec;

use num_complex::Complex64;

use super::{ComplexMatrix, ZERO};

/// Row-compressed view of the nonzero entries of a matrix; used where a
/// banded generator multiplies a dense matrix many times.
#[derive(Debug, Clone)]
pub struct SparseRows {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseRows {
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let dim = m.dim();
        let rows = (0..dim)
            .map(|i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| **z != ZERO)
                    .map(|(j, z)| (j, *z))
                    .collect()
            })
            .collect();
        Self { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `S·P`.
    pub fn mul_dense(&self, p: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim;
        assert_eq!(p.dim(), n);
        let mut out = ComplexMatrix::zeros(n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(k, s) in row {
                let src = p.row(k);
                for j in 0..n {
                    out[(i, j)] += s * src[j];
                }
            }
        }
        out
    }

    /// `P·S`.
    pub fn dense_mul(&self, p: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim;
        assert_eq!(p.dim(), n);
        let mut out = ComplexMatrix::zeros(n);
        for (k, row) in self.rows.iter().enumerate() {
            for &(j, s) in row {
                for i in 0..n {
                    out[(i, j)] += p[(i, k)] * s;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| row.iter().fold(ZERO, |acc, &(j, s)| acc + s * v[j]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_coefficients;

    #[test]
    fn products_match_dense() {
        let n = 7;
        let s = ComplexMatrix::from_fn(n, |i, j| {
            if i.abs_diff(j) <= 1 {
                Complex64::new((i + j) as f64, i as f64 - j as f64)
            } else {
                ZERO
            }
        });
        let p = ComplexMatrix::from_row_major(n, random_coefficients(n * n, 3)).unwrap();
        let sp = SparseRows::from_dense(&s);
        assert!(sp.mul_dense(&p).max_abs_diff(&s.matmul(&p)) <= 1e-14);
        assert!(sp.dense_mul(&p).max_abs_diff(&p.matmul(&s)) <= 1e-14);
    }
}
