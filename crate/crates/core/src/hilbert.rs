//! Truncated separable Hilbert spaces.
//!
//! A state is a finite coefficient vector `ψ = Σ c_j ψ^j` over one of the
//! enumerated bases of [`BasisSpec`]. Tangent vectors reuse the same storage
//! (`T_ψ H ≅ H`), and the real chart is `q^j = Re c_j`, `p_j = Im c_j`.
//! Every truncation is finite dimensional, so the symplectic form
//! `ω(u, v) = Im⟨u|v⟩` is always strong here.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::{self, ComplexMatrix, ZERO};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// Hermite functions `φ_n(x) = H_n(x) e^{-x²/2} / (π^{1/4} 2^{n/2} √n!)`,
    /// index `n = 0..N-1`.
    Hermite1dOrthonormal,
    /// Non-orthonormal `He_n(x) e^{-x²/2}` with probabilists' Hermite
    /// polynomials, index `n = 0..N-1`.
    Hermite1dProbabilist,
    /// Orthonormal trigonometric basis of `L²([-l, l])`, interleaved:
    /// index `2k` is `sin(π(k+1)x/l)/√l`, index `2k+1` is `cos(πkx/l)/√l`
    /// (the constant mode `k = 0` is normalised as `1/√(2l)`).
    FourierInterval,
    /// Products `φ_{n1}(x) φ_{n2}(y) φ_{n3}(z)` with `n1+n2+n3 ≤ d`, ordered
    /// by total degree, then lexicographically descending in
    /// `(n1, n2, n3)`; the degree-one block is `x, y, z`.
    Hermite3dDegree,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Hermite1dOrthonormal => "hermite1d_orthonormal",
            BasisKind::Hermite1dProbabilist => "hermite1d_probabilist",
            BasisKind::FourierInterval => "fourier_interval",
            BasisKind::Hermite3dDegree => "hermite3d_degree",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "hermite1d_orthonormal" => BasisKind::Hermite1dOrthonormal,
            "hermite1d_probabilist" => BasisKind::Hermite1dProbabilist,
            "fourier_interval" => BasisKind::FourierInterval,
            "hermite3d_degree" => BasisKind::Hermite3dDegree,
            _ => return None,
        })
    }
}

/// Basis kind and truncation. For [`BasisKind::Hermite3dDegree`] `size` is
/// the maximal total degree `d` and the dimension is `C(d+3, 3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    kind: BasisKind,
    size: usize,
    half_length: Option<f64>,
}

impl BasisSpec {
    pub fn hermite(size: usize) -> Self {
        Self::new(BasisKind::Hermite1dOrthonormal, size, None).expect("size must be positive")
    }

    pub fn probabilist(size: usize) -> Self {
        Self::new(BasisKind::Hermite1dProbabilist, size, None).expect("size must be positive")
    }

    pub fn fourier(size: usize, half_length: f64) -> Result<Self> {
        Self::new(BasisKind::FourierInterval, size, Some(half_length))
    }

    pub fn hermite3d(max_degree: usize) -> Self {
        Self { kind: BasisKind::Hermite3dDegree, size: max_degree, half_length: None }
    }

    pub fn new(kind: BasisKind, size: usize, half_length: Option<f64>) -> Result<Self> {
        if size == 0 && kind != BasisKind::Hermite3dDegree {
            return Err(Error::InvalidBasis("size must be positive"));
        }
        match (kind, half_length) {
            (BasisKind::FourierInterval, Some(l)) if l.is_finite() && l > 0.0 => {}
            (BasisKind::FourierInterval, _) => {
                return Err(Error::InvalidBasis("fourier_interval needs a positive half-length"))
            }
            (_, Some(_)) => return Err(Error::InvalidBasis("half-length only applies to fourier_interval")),
            _ => {}
        }
        Ok(Self { kind, size, half_length })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// The declared size (`N`, or `d` for the 3-d basis).
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn half_length(&self) -> Option<f64> {
        self.half_length
    }

    /// Number of basis elements.
    pub fn dim(&self) -> usize {
        match self.kind {
            BasisKind::Hermite3dDegree => {
                let d = self.size;
                (d + 1) * (d + 2) * (d + 3) / 6
            }
            _ => self.size,
        }
    }

    pub fn is_orthonormal(&self) -> bool {
        self.kind != BasisKind::Hermite1dProbabilist
    }
}

/// Occupation triples of the 3-d basis in enumeration order.
pub fn hermite3d_indices(max_degree: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        for n1 in (0..=deg).rev() {
            for n2 in (0..=deg - n1).rev() {
                out.push([n1, n2, deg - n1 - n2]);
            }
        }
    }
    out
}

/// Momentum `π(k+1)/l` or `πk/l` carried by Fourier basis element `index`.
pub fn fourier_wavenumber(index: usize, half_length: f64) -> f64 {
    let k = index / 2;
    if index.is_multiple_of(2) {
        PI * (k + 1) as f64 / half_length
    } else {
        PI * k as f64 / half_length
    }
}

/// Change of basis from probabilists' Hermite functions to orthonormal
/// Hermite functions: column `n` holds the orthonormal coefficients of
/// `He_n(x) e^{-x²/2}`. Upper triangular, parity-checkerboarded.
pub fn probabilist_to_orthonormal(size: usize) -> ComplexMatrix {
    let ln2 = core::f64::consts::LN_2;
    let quarter_ln_pi = 0.25 * libm::log(PI);
    ComplexMatrix::from_fn(size, |m, n| {
        if m > n || (n - m) % 2 == 1 {
            return ZERO;
        }
        let k = (n - m) / 2;
        let log_mag = quarter_ln_pi + (0.5 * m as f64 - n as f64) * ln2 + libm::lgamma(n as f64 + 1.0)
            - libm::lgamma(k as f64 + 1.0)
            - 0.5 * libm::lgamma(m as f64 + 1.0);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(sign * libm::exp(log_mag), 0.0)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: BasisSpec,
    coeffs: Vec<Complex64>,
}

impl StateVector {
    pub fn new(basis: BasisSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::LengthMismatch { expected: basis.dim(), found: coeffs.len() });
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { basis, coeffs })
    }

    pub fn zeros(basis: BasisSpec) -> Self {
        Self { basis, coeffs: alloc::vec![ZERO; basis.dim()] }
    }

    /// The basis element `e_k`.
    pub fn basis_vector(basis: BasisSpec, k: usize) -> Result<Self> {
        if k >= basis.dim() {
            return Err(Error::LengthMismatch { expected: basis.dim(), found: k + 1 });
        }
        let mut s = Self::zeros(basis);
        s.coeffs[k] = linalg::ONE;
        Ok(s)
    }

    /// Deterministic random state of unit coefficient norm.
    pub fn random(basis: BasisSpec, seed: u64) -> Self {
        let mut s = Self { basis, coeffs: linalg::random_coefficients(basis.dim(), seed) };
        if !basis.is_orthonormal() {
            let n = s.norm();
            s = s.scale(Complex64::new(1.0 / n, 0.0));
        }
        s
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub(crate) fn with_coefficients(&self, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        Self { basis: self.basis, coeffs }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.with_coefficients(linalg::scaled(&self.coeffs, s))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        Ok(self.with_coefficients(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        Ok(self.with_coefficients(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect()))
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: Complex64, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        Ok(self.with_coefficients(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + s * b).collect()))
    }

    /// Multiply by `i`.
    pub fn times_i(&self) -> Self {
        self.with_coefficients(self.coeffs.iter().map(|z| Complex64::new(-z.im, z.re)).collect())
    }

    pub fn norm_sqr(&self) -> f64 {
        if self.basis.is_orthonormal() {
            linalg::norm_sqr(&self.coeffs)
        } else {
            linalg::norm_sqr(&self.orthonormal_coefficients())
        }
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    /// Coefficients in the orthonormal counterpart of the basis.
    pub fn orthonormal_coefficients(&self) -> Vec<Complex64> {
        match self.basis.kind {
            BasisKind::Hermite1dProbabilist => probabilist_to_orthonormal(self.dim()).apply(&self.coeffs),
            _ => self.coeffs.clone(),
        }
    }

    /// The same vector expressed in the orthonormal Hermite basis (identity
    /// for already orthonormal bases).
    pub fn to_orthonormal(&self) -> Self {
        let basis = match self.basis.kind {
            BasisKind::Hermite1dProbabilist => BasisSpec::hermite(self.basis.size),
            _ => self.basis,
        };
        Self { basis, coeffs: self.orthonormal_coefficients() }
    }

    /// Largest index carrying a nonzero coefficient.
    pub fn support_max(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|z| *z != ZERO)
    }

    pub(crate) fn check_basis(&self, other: &Self) -> Result<()> {
        if self.basis == other.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }
}

/// Unit-norm random state in the orthonormal Hermite basis of size `dim`.
pub fn random_state(dim: usize, seed: u64) -> StateVector {
    StateVector::random(BasisSpec::hermite(dim), seed)
}

/// Coherent state `c_n = e^{-|α|²/2} αⁿ/√n!`, truncated (not renormalised).
pub fn coherent_state(basis: BasisSpec, alpha: Complex64) -> Result<StateVector> {
    if basis.kind() != BasisKind::Hermite1dOrthonormal {
        return Err(Error::UnsupportedBasis);
    }
    let mut coeffs = Vec::with_capacity(basis.dim());
    let mut c = Complex64::new(libm::exp(-0.5 * alpha.norm_sqr()), 0.0);
    for n in 0..basis.dim() {
        coeffs.push(c);
        c = c * alpha / libm::sqrt((n + 1) as f64);
    }
    StateVector::new(basis, coeffs)
}

/// `⟨ψ|φ⟩`, antilinear in the first slot.
pub fn inner(psi: &StateVector, phi: &StateVector) -> Result<Complex64> {
    psi.check_basis(phi)?;
    if psi.basis.is_orthonormal() {
        Ok(linalg::dot(&psi.coeffs, &phi.coeffs))
    } else {
        Ok(linalg::dot(&psi.orthonormal_coefficients(), &phi.orthonormal_coefficients()))
    }
}

/// A tangent vector `ψ̇` at `base_point`, stored through `T_ψ H ≅ H`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base_point: StateVector,
    direction: StateVector,
}

impl TangentVector {
    pub fn new(base_point: StateVector, direction: StateVector) -> Result<Self> {
        base_point.check_basis(&direction)?;
        Ok(Self { base_point, direction })
    }

    /// A constant vector field evaluated at the origin; handy where the base
    /// point is irrelevant (ω is constant).
    pub fn at_origin(direction: StateVector) -> Self {
        Self { base_point: StateVector::zeros(direction.basis), direction }
    }

    pub fn base_point(&self) -> &StateVector {
        &self.base_point
    }

    pub fn direction(&self) -> &StateVector {
        &self.direction
    }
}

/// `ω(u, v) = Im⟨u|v⟩`.
pub fn symplectic_form(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    Ok(inner(&u.direction, &v.direction)?.im)
}

/// `Σ_j (q^j(u) p_j(v) - q^j(v) p_j(u))`, the chart expression of ω
/// (equal to [`symplectic_form`] in orthonormal bases).
pub fn symplectic_form_in_chart(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    u.direction.check_basis(&v.direction)?;
    let (a, b) = (to_real_chart(&u.direction), to_real_chart(&v.direction));
    Ok((0..a.q.len()).map(|j| a.q[j] * b.p[j] - b.q[j] * a.p[j]).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealChartPoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl RealChartPoint {
    /// `ℓ²` norm `(Σ q² + p²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.q.iter().chain(&self.p).map(|x| x * x).sum())
    }
}

pub fn to_real_chart(psi: &StateVector) -> RealChartPoint {
    RealChartPoint {
        q: psi.coeffs.iter().map(|z| z.re).collect(),
        p: psi.coeffs.iter().map(|z| z.im).collect(),
    }
}

pub fn from_real_chart(x: &RealChartPoint, basis: BasisSpec) -> Result<StateVector> {
    if x.q.len() != x.p.len() {
        return Err(Error::LengthMismatch { expected: x.q.len(), found: x.p.len() });
    }
    StateVector::new(basis, x.q.iter().zip(&x.p).map(|(q, p)| Complex64::new(*q, *p)).collect())
}

/// `θ_x(u) = Σ_j p_j(x) q^j(u)` for `θ = Σ p_j dq^j`.
pub fn tautological_one_form(x: &RealChartPoint, u: &TangentVector) -> Result<f64> {
    let dir = u.direction.coefficients();
    if x.p.len() != dir.len() {
        return Err(Error::LengthMismatch { expected: dir.len(), found: x.p.len() });
    }
    Ok(x.p.iter().zip(dir).map(|(p, z)| p * z.re).sum())
}

/// `dθ(u, v) = u(θ(v)) - v(θ(u))` for constant fields `u, v`. Since `θ(v)`
/// is linear in the base point, `u(θ(v))` is `θ(v)` evaluated at the chart
/// image of `u`.
pub fn tautological_differential(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    Ok(tautological_one_form(&to_real_chart(&u.direction), v)?
        - tautological_one_form(&to_real_chart(&v.direction), u)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e(k: usize) -> StateVector {
        StateVector::basis_vector(BasisSpec::hermite(4), k).unwrap()
    }

    fn tv(s: StateVector) -> TangentVector {
        TangentVector::at_origin(s)
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(inner(&e(0), &e(0)).unwrap(), c(1.0, 0.0));
        assert_eq!(inner(&e(0), &e(1)).unwrap(), c(0.0, 0.0));
        assert_eq!(inner(&e(0).times_i(), &e(0)).unwrap(), c(0.0, -1.0));
        let other = StateVector::basis_vector(BasisSpec::hermite(5), 0).unwrap();
        assert_eq!(inner(&e(0), &other), Err(Error::BasisMismatch));
    }

    #[test]
    fn symplectic_form_examples() {
        assert_eq!(symplectic_form(&tv(e(0)), &tv(e(0).times_i())).unwrap(), 1.0);
        assert_eq!(symplectic_form(&tv(e(0)), &tv(e(1))).unwrap(), 0.0);
        let r = StateVector::random(BasisSpec::hermite(4), 3);
        assert_eq!(symplectic_form(&tv(r.clone()), &tv(r)).unwrap(), 0.0);
    }

    #[test]
    fn chart_examples() {
        let psi = e(0).scale(c(1.0, 2.0));
        let x = to_real_chart(&psi);
        assert_eq!(x.q, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(x.p, vec![2.0, 0.0, 0.0, 0.0]);

        let r = random_state(8, 7);
        let back = from_real_chart(&to_real_chart(&r), *r.basis()).unwrap();
        assert_eq!(back, r);
        let bad = RealChartPoint { q: vec![0.0; 3], p: vec![0.0; 2] };
        assert!(matches!(from_real_chart(&bad, BasisSpec::hermite(3)), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn tautological_examples() {
        let zero_p = RealChartPoint { q: vec![1.0, 2.0, 3.0, 4.0], p: vec![0.0; 4] };
        assert_eq!(tautological_one_form(&zero_p, &tv(StateVector::random(BasisSpec::hermite(4), 1))).unwrap(), 0.0);
        let x = to_real_chart(&e(0).times_i());
        assert_eq!(tautological_one_form(&x, &tv(e(0))).unwrap(), 1.0);
    }

    #[test]
    fn hermite3d_enumeration() {
        let idx = hermite3d_indices(2);
        assert_eq!(idx.len(), BasisSpec::hermite3d(2).dim());
        assert_eq!(&idx[..4], &[[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        assert_eq!(idx[4], [2, 0, 0]);
        assert_eq!(BasisSpec::hermite3d(6).dim(), 84);
    }

    #[test]
    fn fourier_basis_validation() {
        assert!(BasisSpec::fourier(8, 0.0).is_err());
        assert!(BasisSpec::new(BasisKind::Hermite1dOrthonormal, 4, Some(1.0)).is_err());
        let l = 2.0;
        assert_eq!(fourier_wavenumber(1, l), 0.0);
        assert_eq!(fourier_wavenumber(0, l), PI / l);
        assert_eq!(fourier_wavenumber(4, l), 3.0 * PI / l);
    }

    #[test]
    fn probabilist_change_of_basis_low_orders() {
        let c = probabilist_to_orthonormal(4);
        let q = libm::pow(PI, 0.25);
        // He_0 e^{-x²/2} = π^{1/4} φ_0, He_1 e^{-x²/2} = π^{1/4}/√2 φ_1.
        assert!((c[(0, 0)].re - q).abs() < 1e-15);
        assert!((c[(1, 1)].re - q / libm::sqrt(2.0)).abs() < 1e-15);
        // He_2 = x² - 1 = (H_2 - 2 H_0)/4 → φ-coefficients π^{1/4}(1/√2, ., -1/2).
        assert!((c[(2, 2)].re - q / libm::sqrt(2.0)).abs() < 1e-15);
        assert!((c[(0, 2)].re + q / 2.0).abs() < 1e-15);
        assert_eq!(c[(1, 2)], ZERO);
    }

    #[test]
    fn coherent_state_is_nearly_normalised() {
        let s = coherent_state(BasisSpec::hermite(64), c(0.7, -0.2)).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-14);
        assert!(coherent_state(BasisSpec::probabilist(4), c(1.0, 0.0)).is_err());
    }
}
