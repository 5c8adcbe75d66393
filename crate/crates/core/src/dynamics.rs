//! Time-dependent Hamiltonians `H(t) = Σ b_α(t) H_α`, the Schrödinger
//! vector field `X(t, ψ) = -iH(t)ψ`, and unitary propagation.
//!
//! Two Hamiltonian functions coexist: the average value `⟨ψ|Aψ⟩` (whose
//! differential is `2Re⟨φ|Aψ⟩`) and `f_A = ½⟨ψ|Aψ⟩`, the function whose
//! Hamiltonian vector field for `ω = Im⟨·|·⟩` is `-iAψ`.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::hilbert::{self, BasisSpec, StateVector, TangentVector};
use crate::linalg::{self, hermitian_eigendecompose, ComplexMatrix, EigenSystem, LuFactorization, I};
use crate::operators::OperatorMatrix;
use crate::{Error, Result};

/// Scalar coefficient `b(t)`; total on ℝ.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFn {
    Constant(f64),
    /// `a·sin(Ωt + φ₀)`.
    Sinusoid { amplitude: f64, frequency: f64, phase: f64 },
    /// `Σ c_k t^k`, lowest order first.
    Polynomial(Vec<f64>),
    /// Piecewise linear through strictly increasing knots, constant beyond
    /// the ends. Build with [`CoefficientFn::table`].
    Table(Vec<(f64, f64)>),
}

impl CoefficientFn {
    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCoefficient("table needs at least one point"));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidCoefficient("table entries must be finite"));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidCoefficient("table times must be strictly increasing"));
        }
        Ok(CoefficientFn::Table(points))
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match self {
            CoefficientFn::Constant(c) => c.is_finite(),
            CoefficientFn::Sinusoid { amplitude, frequency, phase } => {
                amplitude.is_finite() && frequency.is_finite() && phase.is_finite()
            }
            CoefficientFn::Polynomial(c) => c.iter().all(|x| x.is_finite()),
            CoefficientFn::Table(points) => return Self::table(points.clone()).map(|_| ()),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidCoefficient("parameters must be finite"))
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CoefficientFn::Constant(c) => *c,
            CoefficientFn::Sinusoid { amplitude, frequency, phase } => amplitude * libm::sin(frequency * t + phase),
            CoefficientFn::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ck| acc * t + ck),
            CoefficientFn::Table(points) => {
                let (first, last) = (points[0], points[points.len() - 1]);
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let k = points.partition_point(|(tk, _)| *tk <= t);
                let ((ta, va), (tb, vb)) = (points[k - 1], points[k]);
                va + (vb - va) * (t - ta) / (tb - ta)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            CoefficientFn::Constant(_) => true,
            CoefficientFn::Sinusoid { amplitude, frequency, .. } => *amplitude == 0.0 || *frequency == 0.0,
            CoefficientFn::Polynomial(c) => c.iter().skip(1).all(|x| *x == 0.0),
            CoefficientFn::Table(points) => points.windows(2).all(|w| w[0].1 == w[1].1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: CoefficientFn,
    pub operator: OperatorMatrix,
    pub label: String,
}

/// Non-empty list of Hermitian terms on one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TDepHamiltonian {
    terms: Vec<Term>,
}

impl TDepHamiltonian {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        let first = terms.first().ok_or(Error::EmptyHamiltonian)?;
        for term in &terms {
            if term.operator.basis() != first.operator.basis() {
                return Err(Error::BasisMismatch);
            }
            term.operator.require_hermitian()?;
            term.coefficient.validate()?;
        }
        Ok(Self { terms })
    }

    /// A single constant-coefficient term.
    pub fn autonomous(operator: OperatorMatrix, label: &str) -> Result<Self> {
        Self::new(alloc::vec![Term { coefficient: CoefficientFn::Constant(1.0), operator, label: label.into() }])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn basis(&self) -> &BasisSpec {
        self.terms[0].operator.basis()
    }

    pub fn dim(&self) -> usize {
        self.basis().dim()
    }

    pub fn is_autonomous(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.is_constant())
    }

    pub fn coefficients_at(&self, t: f64) -> Vec<f64> {
        self.terms.iter().map(|term| term.coefficient.eval(t)).collect()
    }
}

/// `H(t) = Σ b_α(t) H_α`.
pub fn assemble(h: &TDepHamiltonian, t: f64) -> OperatorMatrix {
    let terms: Vec<(f64, &OperatorMatrix)> = h.terms.iter().map(|term| (term.coefficient.eval(t), &term.operator)).collect();
    OperatorMatrix::real_combination(&terms).expect("terms validated at construction")
}

/// `X(t, ψ) = (ψ, -iH(t)ψ)`.
pub fn schrodinger_rhs(h: &TDepHamiltonian, t: f64, psi: &StateVector) -> Result<TangentVector> {
    let hpsi = assemble(h, t).apply(psi)?;
    TangentVector::new(psi.clone(), hpsi.times_i().scale(Complex64::new(-1.0, 0.0)))
}

/// `⟨ψ|Aψ⟩` for Hermitian `A` (real part; the imaginary part is roundoff).
pub fn average_value(a: &OperatorMatrix, psi: &StateVector) -> Result<f64> {
    a.require_hermitian()?;
    Ok(hilbert::inner(psi, &a.apply(psi)?)?.re)
}

/// `f_A(ψ) = ½⟨ψ|Aψ⟩`.
pub fn hamiltonian_function(a: &OperatorMatrix, psi: &StateVector) -> Result<f64> {
    Ok(0.5 * average_value(a, psi)?)
}

/// Directional derivative of the average value: `2Re⟨φ|Aψ⟩`.
pub fn differential_of_average(a: &OperatorMatrix, psi: &StateVector, phi: &TangentVector) -> Result<f64> {
    a.require_hermitian()?;
    Ok(2.0 * hilbert::inner(phi.direction(), &a.apply(psi)?)?.re)
}

/// Curve through `ψ` with velocity `φ` at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    /// `ψ + tφ`. The average value is quadratic along it, so the central
    /// difference is exact up to roundoff.
    Line,
    /// `cos t·ψ + sin t·φ`; the central difference carries an `O(t²)` error
    /// `-(2t²/3)·2Re⟨φ|Aψ⟩`.
    GreatCircle,
}

/// `(f(γ(t)) - f(γ(-t))) / 2t` for the average value `f = ⟨·|A·⟩`.
pub fn central_difference_of_average(
    a: &OperatorMatrix,
    psi: &StateVector,
    phi: &TangentVector,
    t: f64,
    curve: Curve,
) -> Result<f64> {
    let at = |s: f64| -> Result<f64> {
        let point = match curve {
            Curve::Line => psi.axpy(Complex64::new(s, 0.0), phi.direction())?,
            Curve::GreatCircle => psi
                .scale(Complex64::new(libm::cos(s), 0.0))
                .axpy(Complex64::new(libm::sin(s), 0.0), phi.direction())?,
        };
        average_value(a, &point)
    };
    Ok((at(t)? - at(-t)?) / (2.0 * t))
}

/// `|ω(-iAψ, φ) - ½·d⟨ψ|Aψ⟩(φ)|`; zero up to roundoff.
pub fn hamiltonian_field_residual(a: &OperatorMatrix, psi: &StateVector, phi: &TangentVector) -> Result<f64> {
    let field = TangentVector::new(psi.clone(), a.apply(psi)?.times_i().scale(Complex64::new(-1.0, 0.0)))?;
    let omega = hilbert::symplectic_form(&field, phi)?;
    Ok((omega - 0.5 * differential_of_average(a, psi, phi)?).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// One eigendecomposition of a constant `H`, evaluated at each time.
    ExactEig,
    /// `exp(-i dt H(t + dt/2))`.
    Magnus2,
    /// `(I + i dt/2 H)⁻¹ (I - i dt/2 H)` with the midpoint `H`.
    Cayley2,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ExactEig => "exact_eig",
            Method::Magnus2 => "magnus2",
            Method::Cayley2 => "cayley2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exact_eig" => Method::ExactEig,
            "magnus2" => Method::Magnus2,
            "cayley2" => Method::Cayley2,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSpec {
    method: Method,
    dt: f64,
}

impl IntegratorSpec {
    pub fn new(method: Method, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidStep("dt must be positive and finite"));
        }
        Ok(Self { method, dt })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub norm: f64,
    pub momentum_j: f64,
    /// `⟨ψ|H(t)ψ⟩ / ⟨ψ|ψ⟩`.
    pub energy: f64,
    pub coefficients: Option<Vec<Complex64>>,
}

/// Grid `t₀ < t₀+dt < … < t₁`; the last step is shortened to land on `t₁`
/// (a remainder within `1e-9·dt` is absorbed instead).
pub fn time_grid(t0: f64, t1: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(Error::InvalidTimeSpan { t0, t1 });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidStep("dt must be positive and finite"));
    }
    let ratio = (t1 - t0) / dt;
    let rounded = libm::round(ratio);
    let steps = if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) { rounded } else { libm::ceil(ratio) } as usize;
    let mut grid: Vec<f64> = (0..steps).map(|k| t0 + k as f64 * dt).collect();
    grid.push(t1);
    Ok(grid)
}

enum Stepper {
    Exact(EigenSystem),
    Magnus,
    Cayley,
}

/// Advance every vector in `states` along the grid, calling
/// `visit(step, t, states)` at `t₀` and after each step.
fn evolve(
    h: &TDepHamiltonian,
    states: &mut [Vec<Complex64>],
    spec: &IntegratorSpec,
    grid: &[f64],
    mut visit: impl FnMut(usize, f64, &[Vec<Complex64>]) -> Result<()>,
) -> Result<()> {
    let stepper = match spec.method {
        Method::ExactEig => {
            if !h.is_autonomous() {
                return Err(Error::IntegratorMismatch);
            }
            Stepper::Exact(hermitian_eigendecompose(assemble(h, grid[0]).matrix())?)
        }
        Method::Magnus2 => Stepper::Magnus,
        Method::Cayley2 => Stepper::Cayley,
    };
    let initial: Vec<Vec<Complex64>> = match &stepper {
        Stepper::Exact(eig) => states.iter().map(|s| eig.to_eigenbasis(s)).collect(),
        _ => Vec::new(),
    };
    visit(0, grid[0], states)?;
    for (k, w) in grid.windows(2).enumerate() {
        let (ta, tb) = (w[0], w[1]);
        let tau = tb - ta;
        match &stepper {
            Stepper::Exact(eig) => {
                let elapsed = tb - grid[0];
                for (s, c0) in states.iter_mut().zip(&initial) {
                    let c: Vec<Complex64> = c0
                        .iter()
                        .zip(&eig.eigenvalues)
                        .map(|(c, l)| c * linalg::eigen::phase(-elapsed * l))
                        .collect();
                    *s = eig.from_eigenbasis(&c);
                }
            }
            Stepper::Magnus => {
                let mid = assemble(h, ta + 0.5 * tau);
                let eig = hermitian_eigendecompose(mid.matrix())?;
                for s in states.iter_mut() {
                    *s = eig.apply_exp(tau, s);
                }
            }
            Stepper::Cayley => {
                let mid = assemble(h, ta + 0.5 * tau);
                let half = mid.matrix().scale(I * (0.5 * tau));
                let id = ComplexMatrix::identity(mid.dim());
                let lu = LuFactorization::new(&id.add(&half))?;
                let explicit = id.sub(&half);
                for s in states.iter_mut() {
                    *s = lu.solve(&explicit.apply(s));
                }
            }
        }
        if states.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        visit(k + 1, tb, states)?;
    }
    Ok(())
}

fn check_basis(h: &TDepHamiltonian, psi: &StateVector) -> Result<()> {
    if psi.basis() == h.basis() {
        Ok(())
    } else {
        Err(Error::BasisMismatch)
    }
}

/// Integrate `ψ' = -iH(t)ψ` from `t₀` to `t₁`, recording at `t₀`, every
/// `stride`-th step and `t₁`.
pub fn propagate(
    h: &TDepHamiltonian,
    psi0: &StateVector,
    spec: &IntegratorSpec,
    t0: f64,
    t1: f64,
    stride: usize,
) -> Result<Vec<TrajectoryRecord>> {
    check_basis(h, psi0)?;
    if stride == 0 {
        return Err(Error::InvalidStep("stride must be positive"));
    }
    let grid = time_grid(t0, t1, spec.dt)?;
    let last = grid.len() - 1;
    let mut states = [psi0.coefficients().to_vec()];
    let mut records = Vec::with_capacity(last / stride + 2);
    evolve(h, &mut states, spec, &grid, |k, t, s| {
        if k % stride == 0 || k == last {
            let psi = psi0.with_coefficients(s[0].clone());
            let norm_sqr = psi.norm_sqr();
            let energy = if norm_sqr > 0.0 {
                hilbert::inner(&psi, &assemble(h, t).apply(&psi)?)?.re / norm_sqr
            } else {
                0.0
            };
            records.push(TrajectoryRecord {
                t,
                norm: libm::sqrt(norm_sqr),
                momentum_j: -0.5 * norm_sqr,
                energy,
                coefficients: Some(psi.into_coefficients()),
            });
        }
        Ok(())
    })?;
    Ok(records)
}

/// Final state of [`propagate`].
pub fn propagate_final(
    h: &TDepHamiltonian,
    psi0: &StateVector,
    spec: &IntegratorSpec,
    t0: f64,
    t1: f64,
) -> Result<StateVector> {
    check_basis(h, psi0)?;
    let grid = time_grid(t0, t1, spec.dt)?;
    let mut states = [psi0.coefficients().to_vec()];
    evolve(h, &mut states, spec, &grid, |_, _, _| Ok(()))?;
    let [out] = states;
    Ok(psi0.with_coefficients(out))
}

/// `|ω(Uu, Uv) - ω(u, v)|` for the discrete propagator `U` from `t₀` to `t₁`.
pub fn symplectic_preservation_check(
    h: &TDepHamiltonian,
    u: &TangentVector,
    v: &TangentVector,
    spec: &IntegratorSpec,
    t0: f64,
    t1: f64,
) -> Result<f64> {
    check_basis(h, u.direction())?;
    check_basis(h, v.direction())?;
    let before = hilbert::symplectic_form(u, v)?;
    let grid = time_grid(t0, t1, spec.dt)?;
    let mut states = [u.direction().coefficients().to_vec(), v.direction().coefficients().to_vec()];
    evolve(h, &mut states, spec, &grid, |_, _, _| Ok(()))?;
    let [uu, vv] = states;
    let after = TangentVector::at_origin(u.direction().with_coefficients(uu));
    let after_v = TangentVector::at_origin(v.direction().with_coefficients(vv));
    Ok((hilbert::symplectic_form(&after, &after_v)? - before).abs())
}

/// The driven oscillator `½p̂² + ½(1 + ε sin t)² x̂²` written as constant
/// and sinusoidal terms:
/// `½(1 + ε sin t)² = ½(1 + ε²/2) + ε sin t - (ε²/4) sin(2t + π/2)`.
pub fn driven_oscillator(basis: BasisSpec, epsilon: f64) -> Result<TDepHamiltonian> {
    let (x2, p2, _) = crate::operators::build_quadratics(basis)?;
    let term = |coefficient, operator: &OperatorMatrix, label: &str| Term { coefficient, operator: operator.clone(), label: label.into() };
    TDepHamiltonian::new(alloc::vec![
        term(CoefficientFn::Constant(0.5), &p2, "p2"),
        term(CoefficientFn::Constant(0.5 * (1.0 + 0.5 * epsilon * epsilon)), &x2, "x2"),
        term(CoefficientFn::Sinusoid { amplitude: epsilon, frequency: 1.0, phase: 0.0 }, &x2, "x2"),
        term(
            CoefficientFn::Sinusoid { amplitude: -0.25 * epsilon * epsilon, frequency: 2.0, phase: core::f64::consts::FRAC_PI_2 },
            &x2,
            "x2",
        ),
    ])
}

/// `½(p̂² + x̂²)` as a single autonomous term.
pub fn harmonic_oscillator(basis: BasisSpec) -> Result<TDepHamiltonian> {
    let (x2, p2, _) = crate::operators::build_quadratics(basis)?;
    let osc = OperatorMatrix::real_combination(&[(0.5, &p2), (0.5, &x2)])?;
    TDepHamiltonian::autonomous(osc, "oscillator")
}
