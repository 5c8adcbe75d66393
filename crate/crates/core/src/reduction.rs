//! U(1) reduction of the Schrödinger dynamics.
//!
//! The phase action `ψ ↦ e^{iθ}ψ` has momentum map `J(ψ) = -½⟨ψ|ψ⟩`. For
//! `μ < 0` the level set `J⁻¹(μ)` is the sphere of radius `√(-2μ)`, its
//! quotient is projective space, and the reduced form is
//! `ω_μ([v], [w]) = Im⟨h(v)|h(w)⟩` with `h` the projection orthogonal to
//! the vertical direction `iψ`.
//!
//! The reduced flow is integrated independently of the upstairs one, as
//! the von Neumann equation `P' = -i[H(t), P]` for the rank-one projector
//! `P = |ψ⟩⟨ψ|`, so the commuting-diagram residual compares two genuinely
//! different discretisations.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dynamics::{self, IntegratorSpec, TDepHamiltonian};
use crate::hilbert::{self, BasisSpec, StateVector, TangentVector};
use crate::linalg::{self, hermitian_eigendecompose, ComplexMatrix, SparseRows, I};
use crate::operators::OperatorMatrix;
use crate::{Error, Result, Tolerances};

/// `J(ψ) = -½⟨ψ|ψ⟩`.
pub fn momentum_map(psi: &StateVector) -> f64 {
    -0.5 * psi.norm_sqr()
}

/// `T_ψJ(φ) = -Re⟨ψ|φ⟩`.
pub fn momentum_tangent_map(psi: &StateVector, phi: &TangentVector) -> Result<f64> {
    Ok(-hilbert::inner(psi, phi.direction())?.re)
}

/// `e^{iθ}ψ`.
pub fn u1_act(theta: f64, psi: &StateVector) -> StateVector {
    psi.scale(linalg::eigen::phase(theta))
}

/// Unit representative of a projective point whose first coefficient of
/// modulus above the phase tolerance is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    representative: StateVector,
}

impl Ray {
    pub fn representative(&self) -> &StateVector {
        &self.representative
    }

    pub fn basis(&self) -> &BasisSpec {
        self.representative.basis()
    }
}

pub fn ray_of(psi: &StateVector) -> Result<Ray> {
    ray_of_with(psi, &Tolerances::DEFAULT)
}

pub fn ray_of_with(psi: &StateVector, tol: &Tolerances) -> Result<Ray> {
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let unit = psi.scale(Complex64::new(1.0 / norm, 0.0));
    let lead = unit.coefficients().iter().position(|z| z.norm() > tol.phase).ok_or(Error::ZeroVector)?;
    let c = unit.coefficients()[lead];
    let modulus = c.norm();
    let rotated = unit.scale(c.conj() / modulus);
    let mut coeffs = rotated.into_coefficients();
    coeffs[lead] = Complex64::new(modulus, 0.0);
    Ok(Ray { representative: psi.with_coefficients(coeffs) })
}

/// Fubini–Study distance `arccos |⟨a|b⟩|`, evaluated as
/// `atan2(‖b - ⟨a|b⟩a‖, |⟨a|b⟩|)` to stay accurate for nearby rays.
pub fn fubini_study_distance(a: &Ray, b: &Ray) -> Result<f64> {
    let (ra, rb) = (&a.representative, &b.representative);
    ra.check_basis(rb)?;
    if ra == rb {
        return Ok(0.0);
    }
    let overlap = hilbert::inner(ra, rb)?;
    let perp = rb.axpy(-overlap, ra)?.norm();
    Ok(libm::atan2(perp, overlap.norm()))
}

/// A point of `J⁻¹(μ)`, i.e. `‖ψ‖² = -2μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetPoint {
    point: StateVector,
    mu: f64,
}

impl LevelSetPoint {
    pub fn new(point: StateVector, mu: f64) -> Result<Self> {
        if mu.is_nan() || mu >= 0.0 {
            return Err(Error::NonNegativeMu(mu));
        }
        let off = (momentum_map(&point) - mu).abs();
        if off > 1e-12 * mu.abs().max(1.0) {
            return Err(Error::NotTangent { value: off });
        }
        Ok(Self { point, mu })
    }

    pub fn point(&self) -> &StateVector {
        &self.point
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// `√(-2μ) ψ/‖ψ‖`.
pub fn level_set_project(psi: &StateVector, mu: f64) -> Result<LevelSetPoint> {
    if mu.is_nan() || mu >= 0.0 {
        return Err(Error::NonNegativeMu(mu));
    }
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let point = psi.scale(Complex64::new(libm::sqrt(-2.0 * mu) / norm, 0.0));
    Ok(LevelSetPoint { point, mu })
}

/// The level-set point over `r` with the canonical phase.
pub fn lift(r: &Ray, mu: f64) -> Result<LevelSetPoint> {
    level_set_project(&r.representative, mu)
}

/// Fundamental field of the phase action, `iψ`.
pub fn vertical_vector(psi: &LevelSetPoint) -> TangentVector {
    TangentVector::new(psi.point.clone(), psi.point.times_i()).expect("same basis")
}

/// `v - (Re⟨iψ|v⟩/‖ψ‖²)·iψ` for `v` tangent to the level set.
pub fn horizontal_project(psi: &LevelSetPoint, v: &TangentVector) -> Result<TangentVector> {
    horizontal_project_with(psi, v, &Tolerances::DEFAULT)
}

pub fn horizontal_project_with(psi: &LevelSetPoint, v: &TangentVector, tol: &Tolerances) -> Result<TangentVector> {
    let p = &psi.point;
    let value = momentum_tangent_map(p, v)?;
    if value.abs() > tol.tangency * p.norm() * v.direction().norm() {
        return Err(Error::NotTangent { value });
    }
    let ip = p.times_i();
    let c = hilbert::inner(&ip, v.direction())?.re / p.norm_sqr();
    TangentVector::new(p.clone(), v.direction().axpy(Complex64::new(-c, 0.0), &ip)?)
}

/// `ω_μ([v], [w]) = Im⟨h(v)|h(w)⟩`.
pub fn reduced_symplectic_form(psi: &LevelSetPoint, v: &TangentVector, w: &TangentVector) -> Result<f64> {
    let (hv, hw) = (horizontal_project(psi, v)?, horizontal_project(psi, w)?);
    hilbert::symplectic_form(&hv, &hw)
}

/// `f^μ_A([ψ]) = ½⟨ψ|Aψ⟩` on the representative of norm `√(-2μ)`.
pub fn reduced_hamiltonian(a: &OperatorMatrix, r: &Ray, mu: f64) -> Result<f64> {
    if mu.is_nan() || mu >= 0.0 {
        return Err(Error::NonNegativeMu(mu));
    }
    Ok(-mu * dynamics::average_value(a, &r.representative)?)
}

/// Density matrix of a ray.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorState {
    matrix: ComplexMatrix,
}

impl ProjectorState {
    pub fn from_ray(r: &Ray) -> Self {
        let c = r.representative.coefficients();
        Self { matrix: ComplexMatrix::outer(c, c) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace_defect(&self) -> f64 {
        (self.matrix.trace() - linalg::ONE).norm()
    }

    pub fn idempotency_defect(&self) -> f64 {
        self.matrix.matmul(&self.matrix).max_abs_diff(&self.matrix)
    }

    /// Dominant eigenvector by power iteration from the heaviest column;
    /// converges in a few sweeps because `P` is nearly rank one.
    fn dominant_vector(&self) -> Vec<Complex64> {
        let n = self.matrix.dim();
        let k = (0..n).max_by(|&a, &b| self.matrix[(a, a)].re.total_cmp(&self.matrix[(b, b)].re)).unwrap_or(0);
        let mut v: Vec<Complex64> = (0..n).map(|i| self.matrix[(i, k)]).collect();
        for _ in 0..3 {
            let norm = linalg::norm(&v);
            v.iter_mut().for_each(|z| *z /= norm);
            v = self.matrix.apply(&v);
        }
        v
    }

    pub fn ray(&self, basis: BasisSpec) -> Result<Ray> {
        ray_of(&StateVector::new(basis, self.dominant_vector())?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSample {
    pub t: f64,
    pub ray: Ray,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTrajectory {
    pub samples: Vec<ReducedSample>,
    /// Max `|tr P - 1|` over all steps.
    pub max_trace_drift: f64,
    /// Max `‖P - P†‖_max` before each symmetrisation.
    pub max_hermiticity_drift: f64,
    /// Max `‖P² - P‖_max` at samples and just before re-projections.
    pub max_idempotency_drift: f64,
    pub reprojections: usize,
}

/// `-i[H, P]` for sparse `H`.
fn von_neumann(h: &SparseRows, p: &ComplexMatrix) -> ComplexMatrix {
    h.mul_dense(p).sub(&h.dense_mul(p)).scale(-I)
}

/// Integrate the projector equation `P' = -i[H(t), P]` with classical RK4
/// from `|r₀⟩⟨r₀|`, symmetrising every step and re-projecting onto the
/// dominant eigenvector every `k_reproj` steps (`0` disables re-projection).
/// Rays are sampled at `t₀`, every `stride`-th step and `t₁`.
pub fn reduced_propagate(
    h: &TDepHamiltonian,
    r0: &Ray,
    dt: f64,
    t0: f64,
    t1: f64,
    stride: usize,
    k_reproj: usize,
) -> Result<ReducedTrajectory> {
    reduced_propagate_with(h, r0, dt, t0, t1, stride, k_reproj, &Tolerances::DEFAULT)
}

#[allow(clippy::too_many_arguments)]
pub fn reduced_propagate_with(
    h: &TDepHamiltonian,
    r0: &Ray,
    dt: f64,
    t0: f64,
    t1: f64,
    stride: usize,
    k_reproj: usize,
    tol: &Tolerances,
) -> Result<ReducedTrajectory> {
    if r0.basis() != h.basis() {
        return Err(Error::BasisMismatch);
    }
    if stride == 0 {
        return Err(Error::InvalidStep("stride must be positive"));
    }
    let basis = *h.basis();
    let grid = dynamics::time_grid(t0, t1, dt)?;
    let last = grid.len() - 1;
    let generator = |t: f64| SparseRows::from_dense(dynamics::assemble(h, t).matrix());

    let mut p = ProjectorState::from_ray(r0);
    let mut out = ReducedTrajectory {
        samples: alloc::vec![ReducedSample { t: grid[0], ray: r0.clone() }],
        max_trace_drift: p.trace_defect(),
        max_hermiticity_drift: p.matrix.hermiticity_defect(),
        max_idempotency_drift: p.idempotency_defect(),
        reprojections: 0,
    };
    for (k, w) in grid.windows(2).enumerate() {
        let (ta, tau) = (w[0], w[1] - w[0]);
        let (h0, hm, h1) = (generator(ta), generator(ta + 0.5 * tau), generator(w[1]));
        let k1 = von_neumann(&h0, &p.matrix);
        let mut stage = p.matrix.clone();
        stage.add_scaled(&k1, Complex64::new(0.5 * tau, 0.0));
        let k2 = von_neumann(&hm, &stage);
        let mut stage = p.matrix.clone();
        stage.add_scaled(&k2, Complex64::new(0.5 * tau, 0.0));
        let k3 = von_neumann(&hm, &stage);
        let mut stage = p.matrix.clone();
        stage.add_scaled(&k3, Complex64::new(tau, 0.0));
        let k4 = von_neumann(&h1, &stage);
        let mut next = p.matrix.clone();
        next.add_scaled(&k1, Complex64::new(tau / 6.0, 0.0));
        next.add_scaled(&k2, Complex64::new(tau / 3.0, 0.0));
        next.add_scaled(&k3, Complex64::new(tau / 3.0, 0.0));
        next.add_scaled(&k4, Complex64::new(tau / 6.0, 0.0));
        if !next.is_finite() {
            return Err(Error::NonFinite);
        }
        out.max_hermiticity_drift = out.max_hermiticity_drift.max(next.hermiticity_defect());
        p.matrix = next.hermitian_part();
        out.max_trace_drift = out.max_trace_drift.max(p.trace_defect());

        let step = k + 1;
        if k_reproj > 0 && step % k_reproj == 0 && step != last {
            out.max_idempotency_drift = out.max_idempotency_drift.max(p.idempotency_defect());
            let eig = hermitian_eigendecompose(&p.matrix)?;
            let (lambda, v) = eig.dominant();
            if lambda < tol.rank_one {
                return Err(Error::RankCollapse { eigenvalue: lambda, t: w[1] });
            }
            let v = StateVector::new(basis, v)?;
            p = ProjectorState::from_ray(&ray_of(&v)?);
            out.reprojections += 1;
        }
        if step % stride == 0 || step == last {
            out.max_idempotency_drift = out.max_idempotency_drift.max(p.idempotency_defect());
            out.samples.push(ReducedSample { t: w[1], ray: p.ray(basis)? });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramSample {
    pub t: f64,
    pub upstairs: Ray,
    pub downstairs: Ray,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramReport {
    pub samples: Vec<DiagramSample>,
    pub upstairs: Vec<dynamics::TrajectoryRecord>,
    pub reduced: ReducedTrajectory,
    pub max_residual: f64,
}

/// Compare `π_μ ∘ F_t` (unitary flow, then projection) with `K_t ∘ π_μ`
/// (projection, then the projector flow) at the upstairs record times.
/// `dt·stride` must be an integer multiple of `dt_reduced` so that both
/// flows sample the same instants.
#[allow(clippy::too_many_arguments)]
pub fn commuting_diagram(
    h: &TDepHamiltonian,
    psi0: &LevelSetPoint,
    spec: &IntegratorSpec,
    dt_reduced: f64,
    t0: f64,
    t1: f64,
    stride: usize,
    k_reproj: usize,
) -> Result<DiagramReport> {
    if !(dt_reduced.is_finite() && dt_reduced > 0.0) {
        return Err(Error::InvalidStep("dt_reduced must be positive and finite"));
    }
    if stride == 0 {
        return Err(Error::InvalidStep("stride must be positive"));
    }
    let ratio = spec.dt() * stride as f64 / dt_reduced;
    let reduced_stride = libm::round(ratio);
    if reduced_stride < 1.0 || (ratio - reduced_stride).abs() > 1e-9 * ratio {
        return Err(Error::InvalidStep("sample times of the two flows do not align"));
    }
    let upstairs = dynamics::propagate(h, &psi0.point, spec, t0, t1, stride)?;
    let r0 = ray_of(&psi0.point)?;
    let reduced = reduced_propagate(h, &r0, dt_reduced, t0, t1, reduced_stride as usize, k_reproj)?;
    if upstairs.len() != reduced.samples.len() {
        return Err(Error::InvalidStep("sample times of the two flows do not align"));
    }
    let mut samples = Vec::with_capacity(upstairs.len());
    let mut max_residual: f64 = 0.0;
    for (rec, down) in upstairs.iter().zip(&reduced.samples) {
        if (rec.t - down.t).abs() > 1e-9 * (1.0 + rec.t.abs()) {
            return Err(Error::InvalidStep("sample times of the two flows do not align"));
        }
        let coeffs = rec.coefficients.clone().expect("propagate keeps coefficients");
        let up = ray_of(&StateVector::new(*h.basis(), coeffs)?)?;
        let distance = fubini_study_distance(&up, &down.ray)?;
        max_residual = max_residual.max(distance);
        samples.push(DiagramSample { t: rec.t, upstairs: up, downstairs: down.ray.clone(), distance });
    }
    Ok(DiagramReport { samples, upstairs, reduced, max_residual })
}

/// Max Fubini–Study distance between the two paths around the diagram.
#[allow(clippy::too_many_arguments)]
pub fn commuting_diagram_residual(
    h: &TDepHamiltonian,
    psi0: &LevelSetPoint,
    spec: &IntegratorSpec,
    dt_reduced: f64,
    t0: f64,
    t1: f64,
    stride: usize,
) -> Result<f64> {
    Ok(commuting_diagram(h, psi0, spec, dt_reduced, t0, t1, stride, 100)?.max_residual)
}
