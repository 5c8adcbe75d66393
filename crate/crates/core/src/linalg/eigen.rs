//! Hermitian eigensolver: Householder reduction to real symmetric
//! tridiagonal form followed by implicit QL with Wilkinson-type shifts.
//!
//! Real symmetric input takes an all-real path, and matrices whose sparsity
//! graph splits into disconnected blocks (e.g. parity sectors of the
//! oscillator quadratics) are diagonalised block by block.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use super::{ComplexMatrix, ZERO};
use crate::{Error, Result, Tolerances};

/// Eigenvalues in ascending order with the matching orthonormal
/// eigenvectors stored as the columns of `eigenvectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V·diag(f(λ))·V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let phases: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for (m, ph) in phases.iter().enumerate() {
                    acc += v[(i, m)] * ph * v[(j, m)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `exp(-iτH) = V·exp(-iτΛ)·V†`.
    pub fn exp_step(&self, tau: f64) -> ComplexMatrix {
        self.map_spectrum(|l| phase(-tau * l))
    }

    /// `exp(-iτH)·ψ` in O(N²) without forming the propagator.
    pub fn apply_exp(&self, tau: f64, psi: &[Complex64]) -> Vec<Complex64> {
        let mut c = self.to_eigenbasis(psi);
        for (cm, l) in c.iter_mut().zip(&self.eigenvalues) {
            *cm *= phase(-tau * l);
        }
        self.from_eigenbasis(&c)
    }

    /// `V†ψ`.
    pub fn to_eigenbasis(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(psi.len(), n);
        let v = self.eigenvectors.as_slice();
        let mut c = vec![ZERO; n];
        for (i, p) in psi.iter().enumerate() {
            if *p == ZERO {
                continue;
            }
            let row = &v[i * n..(i + 1) * n];
            for (cm, vim) in c.iter_mut().zip(row) {
                *cm += vim.conj() * p;
            }
        }
        c
    }

    /// `V·c`.
    pub fn from_eigenbasis(&self, c: &[Complex64]) -> Vec<Complex64> {
        self.eigenvectors.apply(c)
    }

    /// Eigenvector of the largest eigenvalue.
    pub fn dominant(&self) -> (f64, Vec<Complex64>) {
        let n = self.dim();
        let col = (0..n).map(|i| self.eigenvectors[(i, n - 1)]).collect();
        (self.eigenvalues[n - 1], col)
    }
}

pub(crate) fn phase(angle: f64) -> Complex64 {
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

/// Eigendecomposition with the default Hermiticity tolerance.
pub fn hermitian_eigendecompose(h: &ComplexMatrix) -> Result<EigenSystem> {
    hermitian_eigendecompose_with(h, &Tolerances::DEFAULT)
}

pub fn hermitian_eigendecompose_with(h: &ComplexMatrix, tol: &Tolerances) -> Result<EigenSystem> {
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let defect = h.hermiticity_defect();
    if defect > tol.hermiticity {
        return Err(Error::NotHermitian { defect });
    }
    let n = h.dim();
    let herm = h.hermitian_part();
    let real = herm.is_real();

    let blocks = connected_blocks(&herm);
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n); // (λ, block, column)
    let mut block_vectors: Vec<(Vec<usize>, Vec<Complex64>)> = Vec::with_capacity(blocks.len());
    for (b, idx) in blocks.into_iter().enumerate() {
        let m = idx.len();
        let (vals, vecs) = if real {
            let sub: Vec<f64> = gather(&herm, &idx).into_iter().map(|z| z.re).collect();
            let (vals, vecs) = solve_dense(sub, m)?;
            (vals, vecs.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
        } else {
            solve_dense(gather(&herm, &idx), m)?
        };
        for (k, l) in vals.into_iter().enumerate() {
            pairs.push((l, b, k));
        }
        block_vectors.push((idx, vecs));
    }
    // Stable sort keeps block order for exact ties.
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut eigenvectors = ComplexMatrix::zeros(n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (col, &(l, b, k)) in pairs.iter().enumerate() {
        eigenvalues.push(l);
        let (idx, vecs) = &block_vectors[b];
        let m = idx.len();
        for (r, &row) in idx.iter().enumerate() {
            eigenvectors[(row, col)] = vecs[r * m + k];
        }
    }
    Ok(EigenSystem { eigenvalues, eigenvectors })
}

/// `exp(-iτH)` for Hermitian `H`, unitary to roundoff.
pub fn unitary_exp_step(h: &ComplexMatrix, tau: f64) -> Result<ComplexMatrix> {
    Ok(hermitian_eigendecompose(h)?.exp_step(tau))
}

fn gather(h: &ComplexMatrix, idx: &[usize]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(idx.len() * idx.len());
    for &i in idx {
        for &j in idx {
            out.push(h[(i, j)]);
        }
    }
    out
}

/// Index sets of the connected components of the nonzero pattern, each in
/// ascending order, components ordered by their smallest index.
fn connected_blocks(h: &ComplexMatrix) -> Vec<Vec<usize>> {
    let n = h.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if h[(i, j)] != ZERO {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[label[r]].push(i);
    }
    blocks
}

trait Scalar:
    Copy
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const ZERO: Self;
    const ONE: Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn abs(self) -> f64;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;
    /// `z / |z|`, or one for zero.
    fn unit_phase(self) -> Self;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn abs(self) -> f64 {
        libm::fabs(self)
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn unit_phase(self) -> Self {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn abs(self) -> f64 {
        libm::hypot(self.re, self.im)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn unit_phase(self) -> Self {
        let r = Scalar::abs(self);
        if r == 0.0 {
            Self::ONE
        } else {
            self / r
        }
    }
}

/// Full eigendecomposition of a dense Hermitian block. Returns ascending
/// eigenvalues and row-major eigenvector columns.
fn solve_dense<S: Scalar>(mut a: Vec<S>, n: usize) -> Result<(Vec<f64>, Vec<S>)> {
    if n == 1 {
        return Ok((vec![a[0].re()], vec![S::ONE]));
    }
    let mut q = vec![S::ZERO; n * n];
    for i in 0..n {
        q[i * n + i] = S::ONE;
    }
    tridiagonalize(&mut a, &mut q, n);

    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re()).collect();
    let mut e = vec![0.0; n];
    // Diagonal phase change making the off-diagonal real and non-negative.
    let mut delta = vec![S::ONE; n];
    for i in 0..n - 1 {
        let sub = a[(i + 1) * n + i];
        e[i] = sub.abs();
        delta[i + 1] = delta[i] * sub.unit_phase();
    }
    for r in 0..n {
        for c in 1..n {
            q[r * n + c] = q[r * n + c] * delta[c];
        }
    }

    // zt[j*n + c]: component c of the j-th tridiagonal eigenvector.
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    implicit_ql(&mut d, &mut e, &mut zt, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));

    let mut vecs = vec![S::ZERO; n * n];
    for (col, &j) in order.iter().enumerate() {
        let z = &zt[j * n..(j + 1) * n];
        for r in 0..n {
            let qrow = &q[r * n..(r + 1) * n];
            let mut acc = S::ZERO;
            for (qv, zv) in qrow.iter().zip(z) {
                if *zv != 0.0 {
                    acc += qv.scale(*zv);
                }
            }
            vecs[r * n + col] = acc;
        }
    }
    let vals = order.iter().map(|&j| d[j]).collect();
    Ok((vals, vecs))
}

/// In-place Householder reduction `A = Q T Q†` with `T` Hermitian
/// tridiagonal. `q` must hold the identity on entry.
fn tridiagonalize<S: Scalar>(a: &mut [S], q: &mut [S], n: usize) {
    let mut v = vec![S::ZERO; n];
    let mut p = vec![S::ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        let sigma: f64 = ((k + 2)..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if sigma == 0.0 {
            continue;
        }
        let alpha = libm::sqrt(x0.norm_sqr() + sigma);
        let ph = x0.unit_phase();
        let beta = -ph.scale(alpha);

        let v = &mut v[..m];
        v[0] = x0 + ph.scale(alpha);
        for i in 1..m {
            v[i] = a[(k + 1 + i) * n + k];
        }
        let vnorm2 = v[0].norm_sqr() + sigma;
        let tau = 2.0 / vnorm2;

        // p = τ B v on the trailing block B = A[k+1.., k+1..].
        let p = &mut p[..m];
        for i in 0..m {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            let mut acc = S::ZERO;
            for (bij, vj) in row.iter().zip(v.iter()) {
                acc += *bij * *vj;
            }
            p[i] = acc.scale(tau);
        }
        let mut vp = S::ZERO;
        for i in 0..m {
            vp += v[i].conj() * p[i];
        }
        let kk = 0.5 * tau * vp.re();
        // w = p - K v, stored in p.
        for i in 0..m {
            p[i] -= v[i].scale(kk);
        }
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for j in 0..m {
                row[j] = row[j] - vi * p[j].conj() - wi * v[j].conj();
            }
        }
        a[(k + 1) * n + k] = beta;
        a[k * n + k + 1] = beta.conj();
        for i in (k + 2)..n {
            a[i * n + k] = S::ZERO;
            a[k * n + i] = S::ZERO;
        }

        // Q ← Q (I - τ v v†) on columns k+1..n.
        for r in 0..n {
            let qrow = &mut q[r * n + k + 1..r * n + n];
            let mut s = S::ZERO;
            for (qv, vv) in qrow.iter().zip(v.iter()) {
                s += *qv * *vv;
            }
            if s == S::ZERO {
                continue;
            }
            let s = s.scale(tau);
            for (qv, vv) in qrow.iter_mut().zip(v.iter()) {
                *qv -= s * vv.conj();
            }
        }
    }
}

/// Implicit QL on the real symmetric tridiagonal (d, e), accumulating the
/// rotations into the rows of `zt`.
fn implicit_ql(d: &mut [f64], e: &mut [f64], zt: &mut [f64], n: usize) -> Result<()> {
    const MAX_SWEEPS: usize = 60;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = libm::fabs(d[m]) + libm::fabs(d[m + 1]);
                if libm::fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::ConvergenceFailure);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = zt.split_at_mut((i + 1) * n);
                let zi = &mut lo[i * n..(i + 1) * n];
                let zi1 = &mut hi[..n];
                for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                    let f = *b;
                    *b = s * *a + c * f;
                    *a = c * *a - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_coefficients, ONE};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let raw = random_coefficients(n * n, seed);
        let m = ComplexMatrix::from_row_major(n, raw).unwrap();
        m.add(&m.adjoint())
    }

    fn check_system(h: &ComplexMatrix, es: &EigenSystem) {
        let n = h.dim();
        let v = &es.eigenvectors;
        let vtv = v.adjoint().matmul(v);
        assert!(vtv.max_abs_diff(&ComplexMatrix::identity(n)) <= 1e-12, "orthonormality");
        let hv = h.matmul(v);
        let vl = v.matmul(&ComplexMatrix::from_diagonal(&es.eigenvalues));
        assert!(hv.max_abs_diff(&vl) <= 1e-10 * h.max_abs().max(1.0), "residual");
        assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn identity_and_diagonal() {
        let es = hermitian_eigendecompose(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(es.eigenvalues, vec![1.0, 1.0]);
        assert_eq!(es.eigenvectors, ComplexMatrix::identity(2));

        let es = hermitian_eigendecompose(&ComplexMatrix::from_diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(es.eigenvalues, vec![1.0, 3.0]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(hermitian_eigendecompose(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn random_complex_and_real() {
        for (n, seed) in [(2, 1), (5, 2), (17, 3), (64, 4)] {
            let h = random_hermitian(n, seed);
            check_system(&h, &hermitian_eigendecompose(&h).unwrap());
            let real = ComplexMatrix::from_fn(n, |i, j| c(h[(i, j)].re, 0.0));
            check_system(&real, &hermitian_eigendecompose(&real).unwrap());
        }
    }

    #[test]
    fn block_structure_is_exploited_transparently() {
        // Pentadiagonal with only (n, n±2) couplings: two parity blocks.
        let n = 40;
        let h = ComplexMatrix::from_fn(n, |i, j| {
            if i == j {
                c(i as f64 + 0.5, 0.0)
            } else if i + 2 == j || j + 2 == i {
                c(0.3 * (i.min(j) + 1) as f64, 0.0)
            } else {
                ZERO
            }
        });
        assert_eq!(connected_blocks(&h).len(), 2);
        check_system(&h, &hermitian_eigendecompose(&h).unwrap());
    }

    #[test]
    fn exp_step_examples() {
        let u = unitary_exp_step(&ComplexMatrix::identity(3), core::f64::consts::PI).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(3).scale(-ONE)) <= 1e-15);

        let h = random_hermitian(6, 9);
        let u = unitary_exp_step(&h, 0.0).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(6)) <= 1e-13);

        let u = unitary_exp_step(&ComplexMatrix::from_diagonal(&[0.5, 1.5]), 1.0).unwrap();
        assert!((u[(0, 0)] - phase(-0.5)).norm() <= 1e-15);
        assert!((u[(1, 1)] - phase(-1.5)).norm() <= 1e-15);
        assert_eq!(u[(0, 1)], ZERO);
    }

    #[test]
    fn apply_exp_matches_dense_propagator() {
        let h = random_hermitian(12, 5);
        let es = hermitian_eigendecompose(&h).unwrap();
        let psi = random_coefficients(12, 6);
        let dense = es.exp_step(0.7).apply(&psi);
        let fast = es.apply_exp(0.7, &psi);
        assert!(crate::linalg::max_abs_diff(&dense, &fast) <= 1e-13);
    }
}
