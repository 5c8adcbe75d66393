use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use super::{ONE, ZERO};
use crate::{Error, Result};

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// # Panics
    /// If `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = Complex64::new(*d, 0.0);
        }
        m
    }

    /// Build from row-major data, rejecting wrong lengths and non-finite
    /// entries.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::LengthMismatch { expected: 1, found: 0 });
        }
        if data.len() != dim * dim {
            return Err(Error::LengthMismatch { expected: dim * dim, found: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &Self, s: Complex64) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, ONE);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, -ONE);
        out
    }

    /// Dense product; zero entries of `self` are skipped.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let mut acc = ZERO;
                for (a, x) in self.row(i).iter().zip(v) {
                    acc += a * x;
                }
                acc
            })
            .collect()
    }

    /// Max-norm `max |a_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        super::max_abs_diff(&self.data, &other.data)
    }

    /// `max |A - A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `max |A + A†|`.
    pub fn skew_hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] + self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Copy of the leading `m × m` block.
    pub fn leading_block(&self, m: usize) -> Self {
        assert!(m >= 1 && m <= self.dim);
        Self::from_fn(m, |i, j| self[(i, j)])
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        assert_eq!(a.len(), b.len());
        Self::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn adjoint_and_defects() {
        let m = ComplexMatrix::from_row_major(2, vec![c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(3.0, 0.0)])
            .unwrap();
        assert_eq!(m.hermiticity_defect(), 0.0);
        assert_eq!(m.adjoint(), m);
        let skew = m.scale(c(0.0, 1.0));
        assert_eq!(skew.skew_hermiticity_defect(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            ComplexMatrix::from_row_major(2, vec![ZERO; 3]),
            Err(Error::LengthMismatch { expected: 4, found: 3 })
        );
        assert_eq!(ComplexMatrix::from_row_major(1, vec![c(f64::NAN, 0.0)]), Err(Error::NonFinite));
    }

    #[test]
    fn matmul_matches_naive() {
        let a = ComplexMatrix::from_fn(3, |i, j| c(i as f64 - j as f64, (i * j) as f64));
        let b = ComplexMatrix::from_fn(3, |i, j| c((i + 2 * j) as f64, 1.0));
        let p = a.matmul(&b);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = ZERO;
                for k in 0..3 {
                    acc += a[(i, k)] * b[(k, j)];
                }
                assert_eq!(p[(i, j)], acc);
            }
        }
        assert_eq!(a.commutator(&a).max_abs(), 0.0);
    }
}
