//! Concrete operators in truncated bases.
//!
//! Convention: `p̂ = -i d/dx`, so `[x̂, p̂] = i`. In the orthonormal Hermite
//! basis `x̂ = (a + a†)/√2` and `p̂ = -i(a - a†)/√2`.
//!
//! A truncated banded operator is only faithful on a prefix of the basis:
//! [`safe_subspace`] reports the largest index from which `k` applications
//! never leave the truncation. Operators that map the truncated space into
//! itself (angular momentum, identity, user matrices taken as given) are
//! flagged exact and are safe everywhere.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::hilbert::{self, BasisKind, BasisSpec, StateVector};
use crate::linalg::{self, hermitian_eigendecompose, ComplexMatrix, I, ZERO};
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Hermitian,
    SkewHermitian,
    General,
}

impl Symmetry {
    pub fn name(self) -> &'static str {
        match self {
            Symmetry::Hermitian => "hermitian",
            Symmetry::SkewHermitian => "skew_hermitian",
            Symmetry::General => "none",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "hermitian" => Symmetry::Hermitian,
            "skew_hermitian" => Symmetry::SkewHermitian,
            "none" => Symmetry::General,
            _ => return None,
        })
    }

    /// Symmetry of `s·A` given the symmetry of `A`.
    fn scaled_by(self, s: Complex64) -> Self {
        match self {
            Symmetry::General => Symmetry::General,
            _ if s.im == 0.0 => self,
            Symmetry::Hermitian if s.re == 0.0 => Symmetry::SkewHermitian,
            Symmetry::SkewHermitian if s.re == 0.0 => Symmetry::Hermitian,
            _ => Symmetry::General,
        }
    }
}

/// An operator restricted to a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    basis: BasisSpec,
    matrix: ComplexMatrix,
    symmetry: Symmetry,
    raise_band: usize,
    lower_band: usize,
    exact: bool,
}

/// `(max i - j, max j - i)` over the nonzero entries.
fn measured_bands(m: &ComplexMatrix) -> (usize, usize) {
    let n = m.dim();
    let (mut raise, mut lower) = (0, 0);
    for i in 0..n {
        for (j, z) in m.row(i).iter().enumerate() {
            if *z != ZERO {
                if i > j {
                    raise = raise.max(i - j);
                } else {
                    lower = lower.max(j - i);
                }
            }
        }
    }
    (raise, lower)
}

fn symmetry_defect(m: &ComplexMatrix, symmetry: Symmetry) -> f64 {
    match symmetry {
        Symmetry::Hermitian => m.hermiticity_defect(),
        Symmetry::SkewHermitian => m.skew_hermiticity_defect(),
        Symmetry::General => 0.0,
    }
}

impl OperatorMatrix {
    /// Build from explicit properties, verifying the symmetry flag (relative
    /// to `max(1, ‖A‖_max)`) and that every entry outside the declared band
    /// is exactly zero.
    pub fn new(
        basis: BasisSpec,
        matrix: ComplexMatrix,
        symmetry: Symmetry,
        raise_band: usize,
        lower_band: usize,
    ) -> Result<Self> {
        Self::checked(basis, matrix, symmetry, raise_band, lower_band, false, &Tolerances::DEFAULT)
    }

    fn checked(
        basis: BasisSpec,
        matrix: ComplexMatrix,
        symmetry: Symmetry,
        raise_band: usize,
        lower_band: usize,
        exact: bool,
        tol: &Tolerances,
    ) -> Result<Self> {
        if matrix.dim() != basis.dim() {
            return Err(Error::LengthMismatch { expected: basis.dim(), found: matrix.dim() });
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = symmetry_defect(&matrix, symmetry);
        if defect > tol.symmetry_flag * matrix.max_abs().max(1.0) {
            return Err(Error::SymmetryMismatch { defect });
        }
        let n = matrix.dim();
        for i in 0..n {
            for (j, z) in matrix.row(i).iter().enumerate() {
                let outside = (i > j && i - j > raise_band) || (j > i && j - i > lower_band);
                if outside && *z != ZERO {
                    return Err(Error::BandViolation { row: i, col: j });
                }
            }
        }
        Ok(Self { basis, matrix, symmetry, raise_band, lower_band, exact })
    }

    /// Take a matrix as the operator itself: symmetry and bands are
    /// inferred, and the operator is flagged exact on the truncated space.
    pub fn from_matrix(basis: BasisSpec, matrix: ComplexMatrix) -> Result<Self> {
        Self::from_matrix_with(basis, matrix, &Tolerances::DEFAULT)
    }

    pub fn from_matrix_with(basis: BasisSpec, matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let slack = tol.symmetry_flag * matrix.max_abs().max(1.0);
        let symmetry = if matrix.hermiticity_defect() <= slack {
            Symmetry::Hermitian
        } else if matrix.skew_hermiticity_defect() <= slack {
            Symmetry::SkewHermitian
        } else {
            Symmetry::General
        };
        let (raise, lower) = measured_bands(&matrix);
        Self::checked(basis, matrix, symmetry, raise, lower, true, tol)
    }

    /// Flag the operator as exact on the truncated space (or not).
    pub fn with_exact_truncation(mut self, exact: bool) -> Self {
        self.exact = exact;
        self
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn raise_band(&self) -> usize {
        self.raise_band
    }

    pub fn lower_band(&self) -> usize {
        self.lower_band
    }

    pub fn is_exact_truncation(&self) -> bool {
        self.exact
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            basis: self.basis,
            matrix: self.matrix.scale(s),
            symmetry: self.symmetry.scaled_by(s),
            raise_band: self.raise_band,
            lower_band: self.lower_band,
            exact: self.exact,
        }
    }

    /// `i·A`; turns a Hermitian generator into a skew-Hermitian one.
    pub fn times_i(&self) -> Self {
        self.scale(I)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis,
            matrix: self.matrix.adjoint(),
            symmetry: self.symmetry,
            raise_band: self.lower_band,
            lower_band: self.raise_band,
            exact: self.exact,
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if *psi.basis() != self.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(psi.with_coefficients(self.matrix.apply(psi.coefficients())))
    }

    pub(crate) fn require_hermitian(&self) -> Result<()> {
        match self.symmetry {
            Symmetry::Hermitian => Ok(()),
            _ => Err(Error::NotHermitian { defect: self.matrix.hermiticity_defect() }),
        }
    }

    pub(crate) fn require_skew(&self) -> Result<()> {
        match self.symmetry {
            Symmetry::SkewHermitian => Ok(()),
            _ => Err(Error::NotSkewHermitian { defect: self.matrix.skew_hermiticity_defect() }),
        }
    }

    /// Linear combination `Σ c_k A_k` of Hermitian operators with real
    /// coefficients; bands are the maxima of the summands.
    pub fn real_combination(terms: &[(f64, &OperatorMatrix)]) -> Result<Self> {
        let first = terms.first().ok_or(Error::EmptyHamiltonian)?.1;
        let mut matrix = ComplexMatrix::zeros(first.dim());
        let (mut raise, mut lower, mut exact) = (0, 0, true);
        for (c, op) in terms {
            if op.basis != first.basis {
                return Err(Error::BasisMismatch);
            }
            op.require_hermitian()?;
            if *c != 0.0 {
                matrix.add_scaled(&op.matrix, Complex64::new(*c, 0.0));
                raise = raise.max(op.raise_band);
                lower = lower.max(op.lower_band);
                exact &= op.exact;
            }
        }
        Ok(Self { basis: first.basis, matrix, symmetry: Symmetry::Hermitian, raise_band: raise, lower_band: lower, exact })
    }
}

fn require_kind(basis: &BasisSpec, kind: BasisKind) -> Result<()> {
    if basis.kind() == kind {
        Ok(())
    } else {
        Err(Error::UnsupportedBasis)
    }
}

fn banded(basis: BasisSpec, symmetry: Symmetry, band: usize, f: impl FnMut(usize, usize) -> Complex64) -> OperatorMatrix {
    let matrix = ComplexMatrix::from_fn(basis.dim(), f);
    OperatorMatrix { basis, matrix, symmetry, raise_band: band, lower_band: band, exact: false }
}

/// `x̂`: `x_{n,n+1} = x_{n+1,n} = √((n+1)/2)`.
pub fn build_position(basis: BasisSpec) -> Result<OperatorMatrix> {
    require_kind(&basis, BasisKind::Hermite1dOrthonormal)?;
    Ok(banded(basis, Symmetry::Hermitian, 1, |i, j| {
        if i.abs_diff(j) == 1 {
            Complex64::new(libm::sqrt(i.max(j) as f64 / 2.0), 0.0)
        } else {
            ZERO
        }
    }))
}

/// `p̂`: `p_{n,n+1} = -i√((n+1)/2)`, `p_{n+1,n} = +i√((n+1)/2)`.
pub fn build_momentum(basis: BasisSpec) -> Result<OperatorMatrix> {
    require_kind(&basis, BasisKind::Hermite1dOrthonormal)?;
    Ok(banded(basis, Symmetry::Hermitian, 1, |i, j| {
        let s = libm::sqrt(i.max(j) as f64 / 2.0);
        if j == i + 1 {
            Complex64::new(0.0, -s)
        } else if i == j + 1 {
            Complex64::new(0.0, s)
        } else {
            ZERO
        }
    }))
}

/// `d/dx` in the probabilists' basis: `(He_n e^{-x²/2})' = -He_{n+1} e^{-x²/2}`.
pub fn build_derivative_probabilist(basis: BasisSpec) -> Result<OperatorMatrix> {
    require_kind(&basis, BasisKind::Hermite1dProbabilist)?;
    let matrix = ComplexMatrix::from_fn(basis.dim(), |i, j| if i == j + 1 { -linalg::ONE } else { ZERO });
    Ok(OperatorMatrix { basis, matrix, symmetry: Symmetry::General, raise_band: 1, lower_band: 0, exact: false })
}

/// `(x̂², p̂², x̂p̂ + p̂x̂)` from the closed forms
/// `x̂² = (a² + a†² + 2a†a + 1)/2`, `p̂² = (-a² - a†² + 2a†a + 1)/2`,
/// `x̂p̂ + p̂x̂ = -i(a² - a†²)`; every entry is exact.
pub fn build_quadratics(basis: BasisSpec) -> Result<(OperatorMatrix, OperatorMatrix, OperatorMatrix)> {
    require_kind(&basis, BasisKind::Hermite1dOrthonormal)?;
    // a²: entry (n, n+2) = √((n+1)(n+2)).
    let two_step = |i: usize, j: usize| libm::sqrt(((i.min(j) + 1) * (i.min(j) + 2)) as f64);
    let x2 = banded(basis, Symmetry::Hermitian, 2, |i, j| {
        if i == j {
            Complex64::new(i as f64 + 0.5, 0.0)
        } else if i.abs_diff(j) == 2 {
            Complex64::new(0.5 * two_step(i, j), 0.0)
        } else {
            ZERO
        }
    });
    let p2 = banded(basis, Symmetry::Hermitian, 2, |i, j| {
        if i == j {
            Complex64::new(i as f64 + 0.5, 0.0)
        } else if i.abs_diff(j) == 2 {
            Complex64::new(-0.5 * two_step(i, j), 0.0)
        } else {
            ZERO
        }
    });
    let xp_px = banded(basis, Symmetry::Hermitian, 2, |i, j| {
        if j == i + 2 {
            Complex64::new(0.0, -two_step(i, j))
        } else if i == j + 2 {
            Complex64::new(0.0, two_step(i, j))
        } else {
            ZERO
        }
    });
    Ok((x2, p2, xp_px))
}

pub fn build_identity(basis: BasisSpec) -> OperatorMatrix {
    OperatorMatrix {
        basis,
        matrix: ComplexMatrix::identity(basis.dim()),
        symmetry: Symmetry::Hermitian,
        raise_band: 0,
        lower_band: 0,
        exact: true,
    }
}

/// `(L_x, L_y, L_z)` with `L_z = xp_y - yp_x = -i(a_x†a_y - a_y†a_x)` and
/// cyclic. Each component preserves total degree, so the truncation to
/// degree `≤ d` is exact.
pub fn build_angular_momentum(basis: BasisSpec) -> Result<(OperatorMatrix, OperatorMatrix, OperatorMatrix)> {
    require_kind(&basis, BasisKind::Hermite3dDegree)?;
    let states = hilbert::hermite3d_indices(basis.size());
    let index_of = |occ: [usize; 3]| states.iter().position(|s| *s == occ);
    // -i(a_u† a_v - a_v† a_u) for axes (u, v).
    let component = |u: usize, v: usize| {
        let mut m = ComplexMatrix::zeros(states.len());
        for (col, occ) in states.iter().enumerate() {
            for (raise, lower, sign) in [(u, v, -1.0), (v, u, 1.0)] {
                if occ[lower] == 0 {
                    continue;
                }
                let mut target = *occ;
                target[lower] -= 1;
                target[raise] += 1;
                let amp = libm::sqrt((occ[lower] * target[raise]) as f64);
                let row = index_of(target).expect("degree is preserved");
                m[(row, col)] += Complex64::new(0.0, sign * amp);
            }
        }
        let (raise, lower) = measured_bands(&m);
        OperatorMatrix { basis, matrix: m, symmetry: Symmetry::Hermitian, raise_band: raise, lower_band: lower, exact: true }
    };
    Ok((component(1, 2), component(2, 0), component(0, 1)))
}

/// Diagonal `p̂²` on the interval: `(π(k+1)/l)²` on sine modes, `(πk/l)²`
/// on cosine modes.
pub fn build_fourier_p_squared(basis: BasisSpec) -> Result<OperatorMatrix> {
    require_kind(&basis, BasisKind::FourierInterval)?;
    let l = basis.half_length().ok_or(Error::InvalidBasis("fourier_interval needs a positive half-length"))?;
    let diag: Vec<f64> = (0..basis.dim())
        .map(|k| {
            let w = hilbert::fourier_wavenumber(k, l);
            w * w
        })
        .collect();
    Ok(OperatorMatrix {
        basis,
        matrix: ComplexMatrix::from_diagonal(&diag),
        symmetry: Symmetry::Hermitian,
        raise_band: 0,
        lower_band: 0,
        exact: true,
    })
}

/// Algebraic commutator `AB - BA`. Bands add; the symmetry follows from
/// the factors (two Hermitian or two skew factors give a skew result).
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    if a.basis != b.basis {
        return Err(Error::BasisMismatch);
    }
    let symmetry = match (a.symmetry, b.symmetry) {
        (Symmetry::General, _) | (_, Symmetry::General) => Symmetry::General,
        (x, y) if x == y => Symmetry::SkewHermitian,
        _ => Symmetry::Hermitian,
    };
    let cap = a.dim() - 1;
    Ok(OperatorMatrix {
        basis: a.basis,
        matrix: a.matrix.commutator(&b.matrix),
        symmetry,
        raise_band: (a.raise_band + b.raise_band).min(cap),
        lower_band: (a.lower_band + b.lower_band).min(cap),
        exact: a.exact && b.exact,
    })
}

/// Prefix `0..=max_index` of a basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainMask {
    pub basis: BasisSpec,
    pub max_index: usize,
}

impl DomainMask {
    pub fn contains(&self, psi: &StateVector) -> bool {
        *psi.basis() == self.basis && psi.support_max().is_none_or(|m| m <= self.max_index)
    }
}

/// Largest prefix on which `k` applications of `A` are free of truncation
/// error: `N - 1 - k·r⁺`, or the whole space for exact operators.
pub fn safe_subspace(a: &OperatorMatrix, applications: usize) -> Result<DomainMask> {
    let top = a.dim() - 1;
    let reach = if a.exact { 0 } else { applications.saturating_mul(a.raise_band) };
    if reach > top {
        return Err(Error::DomainExhausted { applications });
    }
    Ok(DomainMask { basis: a.basis, max_index: top - reach })
}

fn require_safe(a: &OperatorMatrix, psi: &StateVector, applications: usize) -> Result<()> {
    let mask = match safe_subspace(a, applications) {
        Ok(m) => m,
        Err(_) => return Err(Error::UnsafeSubspace { max_index: -1 }),
    };
    if *psi.basis() != a.basis {
        return Err(Error::BasisMismatch);
    }
    if mask.contains(psi) {
        Ok(())
    } else {
        Err(Error::UnsafeSubspace { max_index: mask.max_index as isize })
    }
}

/// Second-order estimate of `[A, B]ψ` from the group-commutator path
/// `g(t) = e^{-tA} e^{-tB} e^{tA} e^{tB} ψ`:
/// `(g(h) - 2g(0) + g(-h)) / (2h²)`, with `O(h²)` error.
pub fn flow_commutator(a: &OperatorMatrix, b: &OperatorMatrix, psi: &StateVector, h: f64) -> Result<StateVector> {
    a.require_skew()?;
    b.require_skew()?;
    if a.basis != b.basis {
        return Err(Error::BasisMismatch);
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidStep("flow step must be positive"));
    }
    require_safe(a, psi, 2)?;
    require_safe(b, psi, 2)?;
    // e^{tA} = e^{-it(iA)} with iA Hermitian.
    let ea = hermitian_eigendecompose(&a.matrix.scale(I).hermitian_part())?;
    let eb = hermitian_eigendecompose(&b.matrix.scale(I).hermitian_part())?;
    let g = |t: f64| {
        let v = eb.apply_exp(t, psi.coefficients());
        let v = ea.apply_exp(t, &v);
        let v = eb.apply_exp(-t, &v);
        ea.apply_exp(-t, &v)
    };
    let (plus, minus) = (g(h), g(-h));
    let scale = 1.0 / (2.0 * h * h);
    let coeffs = plus
        .iter()
        .zip(&minus)
        .zip(psi.coefficients())
        .map(|((p, m), c)| (p + m - 2.0 * c) * scale)
        .collect();
    Ok(psi.with_coefficients(coeffs))
}

/// Numerical evidence for `‖Aⁿψ‖ ≤ Cⁿ n!`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCertificate {
    pub operator: OperatorMatrix,
    pub vector: StateVector,
    pub n_max: usize,
    /// `‖Aⁿψ‖` for `n = 0..=n_max`.
    pub norms: Vec<f64>,
    /// `max_{1≤n≤n_max} (‖Aⁿψ‖/n!)^{1/n}`.
    pub fitted_c: f64,
    pub claimed_c: Option<f64>,
    pub holds: bool,
}

pub fn analytic_certificate(
    a: &OperatorMatrix,
    psi: &StateVector,
    n_max: usize,
    claimed_c: Option<f64>,
) -> Result<AnalyticCertificate> {
    require_safe(a, psi, n_max)?;
    let mut norms = Vec::with_capacity(n_max + 1);
    let mut v = psi.clone();
    norms.push(v.norm());
    for _ in 0..n_max {
        v = a.apply(&v)?;
        norms.push(v.norm());
    }
    let fitted_c = norms
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, &r)| if r == 0.0 { 0.0 } else { libm::exp((libm::log(r) - libm::lgamma(n as f64 + 1.0)) / n as f64) })
        .fold(0.0, f64::max);
    let holds = claimed_c.is_none_or(|c| c >= fitted_c);
    Ok(AnalyticCertificate { operator: a.clone(), vector: psi.clone(), n_max, norms, fitted_c, claimed_c, holds })
}

/// `xᵐ e^{-x²/2} = π^{1/4} x̂ᵐ φ₀`, expanded exactly (support `0..=m`).
pub fn monomial_gaussian(basis: BasisSpec, m: usize) -> Result<StateVector> {
    if m >= basis.dim() {
        return Err(Error::UnsafeSubspace { max_index: basis.dim() as isize - 1 });
    }
    let x = build_position(basis)?;
    let mut v = StateVector::basis_vector(basis, 0)?.scale(Complex64::new(libm::pow(PI, 0.25), 0.0));
    for _ in 0..m {
        v = x.apply(&v)?;
    }
    Ok(v)
}

/// Max-abs residual of the least-squares projection of `target` onto the
/// real span of `span`, both restricted to the leading `block × block`
/// corner.
pub fn lie_span_residual(target: &OperatorMatrix, span: &[OperatorMatrix], block: usize) -> Result<f64> {
    let flatten = |op: &OperatorMatrix| -> Result<Vec<f64>> {
        if op.basis != target.basis {
            return Err(Error::BasisMismatch);
        }
        let b = op.matrix.leading_block(block.clamp(1, op.dim()));
        Ok(b.as_slice().iter().flat_map(|z| [z.re, z.im]).collect())
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for op in span {
        let mut v = flatten(op)?;
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = libm::sqrt(dot(&v, &v));
        if n > 1e-12 * op.max_abs().max(1.0) {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    let mut r = flatten(target)?;
    for _ in 0..2 {
        for q in &basis {
            let c = dot(q, &r);
            r.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
    let max = r.chunks(2).map(|c| libm::hypot(c[0], c[1])).fold(0.0, f64::max);
    Ok(max)
}

/// The six generators `(p̂², x̂², x̂p̂+p̂x̂, p̂, x̂, Id)` in this order.
pub fn metaplectic_generators(basis: BasisSpec) -> Result<[OperatorMatrix; 6]> {
    let (x2, p2, xp_px) = build_quadratics(basis)?;
    Ok([p2, x2, xp_px, build_momentum(basis)?, build_position(basis)?, build_identity(basis)])
}
