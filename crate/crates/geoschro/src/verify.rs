//! `verify`: numerical self-checks grouped into suites.
//!
//! Every case reports a measured quantity and the bound it must not exceed.
//! Bounds can be overridden by case name, and the shared numerical
//! thresholds by their [`Tolerances`] keys.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use geoschro_core::dynamics::{
    central_difference_of_average, differential_of_average, driven_oscillator, hamiltonian_field_residual,
    harmonic_oscillator, propagate, propagate_final, schrodinger_rhs, symplectic_preservation_check, Curve,
    IntegratorSpec, Method, TDepHamiltonian,
};
use geoschro_core::hilbert::{
    coherent_state, from_real_chart, inner, random_state, symplectic_form, symplectic_form_in_chart,
    tautological_differential, to_real_chart, BasisSpec, StateVector, TangentVector,
};
use geoschro_core::linalg::{random_coefficients, ComplexMatrix};
use geoschro_core::operators::{
    analytic_certificate, build_angular_momentum, build_fourier_p_squared, build_identity, build_momentum,
    build_position, build_quadratics, commutator, flow_commutator, lie_span_residual, metaplectic_generators,
    monomial_gaussian, safe_subspace, OperatorMatrix,
};
use geoschro_core::reduction::{
    commuting_diagram, horizontal_project_with, level_set_project, momentum_map, momentum_tangent_map, ray_of_with,
    reduced_hamiltonian, reduced_symplectic_form, u1_act, vertical_vector, LevelSetPoint,
};
use geoschro_core::{Complex64, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SUITES: [&str; 5] = ["symplectic", "operators", "analytic", "dynamics", "reduction"];

/// Smallest truncation for which every suite has room for its test vectors.
pub const MIN_SIZE: usize = 16;

const PAIRS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub size: usize,
    pub seed: u64,
    pub cases: Vec<CaseResult>,
    pub pass: bool,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub size: usize,
    pub seed: u64,
    pub threads: usize,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<String> {
        self.suites
            .iter()
            .flat_map(|s| s.cases.iter().filter(|c| !c.pass).map(move |c| format!("{}/{}", s.suite, c.name)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub size: usize,
    pub seed: u64,
    /// `key=value` overrides: case names or [`Tolerances`] keys.
    pub overrides: Vec<(String, f64)>,
    /// Worker threads; `None` reads `GEOSCHRO_THREADS`, falling back to the
    /// available parallelism.
    pub threads: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { size: 64, seed: 0, overrides: Vec::new(), threads: None }
    }
}

pub fn parse_override(item: &str) -> Result<(String, f64), CliError> {
    let bad = || CliError::BadTolerance(item.to_string());
    let (key, value) = item.split_once('=').ok_or_else(bad)?;
    let value: f64 = value.trim().parse().map_err(|_| bad())?;
    if key.trim().is_empty() || !value.is_finite() || value < 0.0 {
        return Err(bad());
    }
    Ok((key.trim().to_string(), value))
}

/// Case names per suite, in report order.
pub fn case_names(suite: &str) -> &'static [&'static str] {
    match suite {
        "symplectic" => &[
            "antisymmetry",
            "chart_identity",
            "theta_differential",
            "nondegeneracy",
            "chart_isometry",
            "chart_round_trip",
            "u1_invariance",
        ],
        "operators" => &[
            "hermitian_builders",
            "canonical_commutator",
            "quadratic_commutator",
            "metaplectic_closure",
            "su2_relations",
            "fourier_spectrum",
            "flow_commutator_order",
            "flow_commutator_random_pair",
        ],
        "analytic" => &[
            "monomial0_p",
            "monomial0_x",
            "monomial0_id",
            "monomial1_p",
            "monomial1_x",
            "monomial1_id",
            "monomial2_p",
            "monomial2_x",
            "monomial2_id",
            "monomial3_p",
            "monomial3_x",
            "monomial3_id",
            "identity_constant",
            "ground_state_moments",
        ],
        "dynamics" => &[
            "hamiltonian_field",
            "gradient_line",
            "gradient_curve_order",
            "translation_fidelity",
            "ground_state_phase",
            "magnus2_order",
            "cayley2_order",
            "driven_norm_drift",
            "driven_momentum_drift",
            "autonomous_energy_drift",
            "symplectic_preservation",
        ],
        "reduction" => &[
            "kernel_identity",
            "vertical_shift_invariance",
            "representative_invariance",
            "reduced_hamiltonian_invariance",
            "level_set_tangency",
            "level_set_conservation",
            "commuting_diagram",
            "projector_trace_drift",
            "projector_hermiticity_drift",
            "projector_idempotency_drift",
        ],
        _ => &[],
    }
}

struct Ctx<'a> {
    n: usize,
    seed: u64,
    tol: Tolerances,
    bounds: &'a BTreeMap<String, f64>,
    cases: Vec<CaseResult>,
}

impl Ctx<'_> {
    fn case(&mut self, name: &str, measured: f64, default_bound: f64) {
        let bound = self.bounds.get(name).copied().unwrap_or(default_bound);
        let pass = measured.is_finite() && measured <= bound;
        self.cases.push(CaseResult { name: name.into(), measured, bound, pass });
    }

    fn basis(&self) -> BasisSpec {
        BasisSpec::hermite(self.n)
    }

    fn state(&self, k: u64) -> StateVector {
        random_state(self.n, self.seed.wrapping_mul(1_000_003).wrapping_add(k))
    }

    /// Random vector supported on the first `support` basis functions.
    fn low_state(&self, support: usize, k: u64) -> StateVector {
        let mut c = random_coefficients(support, self.seed.wrapping_add(k));
        c.resize(self.n, Complex64::new(0.0, 0.0));
        StateVector::new(self.basis(), c).expect("dimension matches")
    }
}

type Check = geoschro_core::Result<()>;

fn tv(s: StateVector) -> TangentVector {
    TangentVector::at_origin(s)
}

fn symplectic(c: &mut Ctx) -> Check {
    let (mut anti, mut chart, mut theta, mut nondeg, mut iso, mut round, mut inv) = (0f64, 0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
    for k in 0..PAIRS {
        let (u, v) = (c.state(2 * k), c.state(2 * k + 1));
        let (tu, tvv) = (tv(u.clone()), tv(v.clone()));
        let w = symplectic_form(&tu, &tvv)?;
        anti = anti.max((w + symplectic_form(&tvv, &tu)?).abs());
        chart = chart.max((w - symplectic_form_in_chart(&tu, &tvv)?).abs());
        theta = theta.max((w + tautological_differential(&tu, &tvv)?).abs());
        nondeg = nondeg.max(1.0 - symplectic_form(&tu, &tv(u.times_i()))?);
        let x = to_real_chart(&u);
        iso = iso.max((x.norm() - u.norm()).abs());
        round = round.max(from_real_chart(&x, *u.basis())?.sub(&u)?.norm());
        let theta_g = 0.37 * k as f64;
        let moved = symplectic_form(&tv(u1_act(theta_g, &u)), &tv(u1_act(theta_g, &v)))?;
        inv = inv.max((moved - w).abs());
    }
    c.case("antisymmetry", anti, 0.0);
    c.case("chart_identity", chart, 1e-13);
    c.case("theta_differential", theta, 1e-13);
    c.case("nondegeneracy", nondeg, 1e-12);
    c.case("chart_isometry", iso, 1e-13);
    c.case("chart_round_trip", round, 0.0);
    c.case("u1_invariance", inv, 1e-13);
    Ok(())
}

fn skew_generators(basis: BasisSpec) -> geoschro_core::Result<Vec<OperatorMatrix>> {
    Ok(metaplectic_generators(basis)?.iter().map(|h| h.times_i()).collect())
}

fn operators(c: &mut Ctx) -> Check {
    let n = c.n;
    let b = c.basis();
    let x = build_position(b)?;
    let p = build_momentum(b)?;
    let (x2, p2, xp) = build_quadratics(b)?;
    let defect = [&x, &p, &x2, &p2, &xp].iter().map(|o| o.matrix().hermiticity_defect()).fold(0.0, f64::max);
    c.case("hermitian_builders", defect, 0.0);

    // [x, p] = i away from the truncation edge.
    let xp_comm = commutator(&x, &p)?;
    let m = n - 1;
    let canon = xp_comm.matrix().leading_block(m).max_abs_diff(&ComplexMatrix::identity(m).scale(Complex64::new(0.0, 1.0)));
    c.case("canonical_commutator", canon, 1e-13);

    // [x², p²] = 2i(xp + px).
    let q = commutator(&x2, &p2)?;
    let m = n - 2;
    let quad = q.matrix().leading_block(m).max_abs_diff(&xp.matrix().leading_block(m).scale(Complex64::new(0.0, 2.0)));
    c.case("quadratic_commutator", quad, 1e-12);

    let gens = skew_generators(b)?;
    let mut closure: f64 = 0.0;
    for i in 0..6 {
        for j in (i + 1)..6 {
            let comm = commutator(&gens[i], &gens[j])?;
            let block = safe_subspace(&comm, 1)?.max_index + 1;
            closure = closure.max(lie_span_residual(&comm, &gens, block)?);
        }
    }
    c.case("metaplectic_closure", closure, 1e-10);

    let (lx, ly, lz) = build_angular_momentum(BasisSpec::hermite3d(6))?;
    let i = Complex64::new(0.0, 1.0);
    let mut su2: f64 = 0.0;
    for (a, bb, cc) in [(&lx, &ly, &lz), (&ly, &lz, &lx), (&lz, &lx, &ly)] {
        su2 = su2.max(commutator(a, bb)?.matrix().max_abs_diff(&cc.matrix().scale(i)));
    }
    c.case("su2_relations", su2, 1e-12);

    let half = 1.5;
    let fb = BasisSpec::fourier(n, half)?;
    let fp2 = build_fourier_p_squared(fb)?;
    let fourier = (0..n)
        .map(|k| {
            let kk = geoschro_core::hilbert::fourier_wavenumber(k, half);
            let want = kk * kk;
            (fp2.matrix()[(k, k)].re - want).abs() / want.max(1.0)
        })
        .fold(0.0, f64::max)
        .max(fp2.matrix().sub(&ComplexMatrix::from_diagonal(&(0..n).map(|k| fp2.matrix()[(k, k)].re).collect::<Vec<_>>())).max_abs());
    c.case("fourier_spectrum", fourier, 1e-13);

    // Flow-commutator error shrinks by 4 when h halves.
    let psi = c.low_state(6, 3);
    let mut order: f64 = 0.0;
    for i in 0..5 {
        for j in (i + 1)..5 {
            let exact = commutator(&gens[i], &gens[j])?.apply(&psi)?;
            if exact.norm() < 1e-12 {
                continue;
            }
            let e1 = flow_commutator(&gens[i], &gens[j], &psi, 2e-3)?.sub(&exact)?.norm();
            let e2 = flow_commutator(&gens[i], &gens[j], &psi, 1e-3)?.sub(&exact)?.norm();
            order = order.max((e1 / e2 - 4.0).abs());
        }
    }
    c.case("flow_commutator_order", order, 0.5);

    let m = 32.min(n);
    let bm = BasisSpec::hermite(m);
    let scale = Complex64::new(0.0, 1.0 / (m as f64).sqrt());
    let skew = |seed: u64| -> geoschro_core::Result<OperatorMatrix> {
        let h = ComplexMatrix::from_row_major(m, random_coefficients(m * m, seed))?.hermitian_part();
        OperatorMatrix::from_matrix(bm, h.scale(scale))
    };
    let (a, bb) = (skew(c.seed.wrapping_add(5))?, skew(c.seed.wrapping_add(6))?);
    let v = random_state(m, c.seed.wrapping_add(7));
    let exact = commutator(&a, &bb)?.apply(&v)?;
    let rel = flow_commutator(&a, &bb, &v, 1e-3)?.sub(&exact)?.norm() / exact.norm();
    c.case("flow_commutator_random_pair", rel, 1e-4);
    Ok(())
}

fn analytic(c: &mut Ctx) -> Check {
    let b = c.basis();
    let ops = [("p", build_momentum(b)?), ("x", build_position(b)?), ("id", build_identity(b))];
    for m in 0..=3usize {
        let psi = monomial_gaussian(b, m)?;
        let claimed = 2f64.powi(m as i32 + 1) * (1..=m).product::<usize>() as f64;
        for (name, op) in &ops {
            let cert = analytic_certificate(op, &psi, 8, Some(claimed))?;
            c.case(&format!("monomial{m}_{name}"), cert.fitted_c, claimed);
        }
    }
    let cert = analytic_certificate(&ops[2].1, &c.state(0), 8, None)?;
    c.case("identity_constant", (cert.fitted_c - 1.0).abs(), 1e-14);
    // ‖x̂ⁿφ₀‖² = (2n-1)!!/2ⁿ.
    let phi0 = StateVector::basis_vector(b, 0)?;
    let cert = analytic_certificate(&ops[1].1, &phi0, 6, None)?;
    let mut expected_sqr = 1.0;
    let mut worst: f64 = 0.0;
    for (k, norm) in cert.norms.iter().enumerate().skip(1) {
        expected_sqr *= (2 * k - 1) as f64 / 2.0;
        worst = worst.max((norm * norm / expected_sqr - 1.0).abs());
    }
    c.case("ground_state_moments", worst, 1e-13);
    Ok(())
}

fn spec(method: Method, dt: f64) -> geoschro_core::Result<IntegratorSpec> {
    IntegratorSpec::new(method, dt)
}

fn distance(a: &StateVector, b: &StateVector) -> geoschro_core::Result<f64> {
    Ok(a.sub(b)?.norm())
}

fn dynamics(c: &mut Ctx) -> Check {
    let n = c.n;
    let b = c.basis();
    let gens = metaplectic_generators(b)?;
    let mut field: f64 = 0.0;
    for (k, a) in gens.iter().enumerate() {
        for j in 0..PAIRS / 4 {
            let s = 1000 * k as u64 + j;
            let r = hamiltonian_field_residual(a, &c.state(2 * s), &tv(c.state(2 * s + 1)))?;
            field = field.max(r / a.max_abs());
        }
    }
    c.case("hamiltonian_field", field, 1e-12);

    let x = &gens[4];
    let (psi, phi) = (c.state(11), tv(c.state(12)));
    let exact = differential_of_average(x, &psi, &phi)?;
    let line = central_difference_of_average(x, &psi, &phi, 1e-4, Curve::Line)?;
    c.case("gradient_line", (line - exact).abs() / (1.0 + exact.abs()), 1e-6);
    let e3 = (central_difference_of_average(x, &psi, &phi, 1e-3, Curve::GreatCircle)? - exact).abs();
    let e4 = (central_difference_of_average(x, &psi, &phi, 1e-4, Curve::GreatCircle)? - exact).abs();
    c.case("gradient_curve_order", (e3 / e4 - 100.0).abs(), 20.0);

    // exp(-i t p̂) translates the ground state to a coherent state.
    let t = 0.5;
    let h = TDepHamiltonian::autonomous(build_momentum(b)?, "p")?;
    let phi0 = StateVector::basis_vector(b, 0)?;
    let out = propagate_final(&h, &phi0, &spec(Method::ExactEig, t)?, 0.0, t)?;
    let oracle = coherent_state(b, Complex64::new(t / std::f64::consts::SQRT_2, 0.0))?;
    let fid = inner(&oracle, &out)?.norm_sqr() / (oracle.norm_sqr() * out.norm_sqr());
    c.case("translation_fidelity", 1.0 - fid, 1e-8);

    let osc = harmonic_oscillator(b)?;
    let t = 1.3;
    let stepped = propagate_final(&osc, &phi0, &spec(Method::Magnus2, 0.01)?, 0.0, t)?;
    let phase = phi0.scale(Complex64::from_polar(1.0, -0.5 * t));
    c.case("ground_state_phase", distance(&stepped, &phase)?, 1e-12);

    let m = 32.min(n);
    let bm = BasisSpec::hermite(m);
    let driven = driven_oscillator(bm, 0.1)?;
    let psi0 = coherent_state(bm, Complex64::new(1.0, 0.0))?;
    let run = |dt: f64| propagate_final(&driven, &psi0, &spec(Method::Magnus2, dt)?, 0.0, 2.0);
    let (fine, finer) = (run(1.25e-3)?, run(6.25e-4)?);
    let reference = finer.scale(Complex64::new(4.0 / 3.0, 0.0)).axpy(Complex64::new(-1.0 / 3.0, 0.0), &fine)?;
    let ratio = distance(&run(0.02)?, &reference)? / distance(&run(0.01)?, &reference)?;
    c.case("magnus2_order", (ratio - 4.0).abs(), 0.5);

    let osc_m = harmonic_oscillator(bm)?;
    let start = coherent_state(bm, Complex64::new(0.5, 0.5))?;
    let exact = propagate_final(&osc_m, &start, &spec(Method::ExactEig, 1.0)?, 0.0, 1.0)?;
    let e1 = distance(&propagate_final(&osc_m, &start, &spec(Method::Cayley2, 0.02)?, 0.0, 1.0)?, &exact)?;
    let e2 = distance(&propagate_final(&osc_m, &start, &spec(Method::Cayley2, 0.01)?, 0.0, 1.0)?, &exact)?;
    c.case("cayley2_order", (e1 / e2 - 4.0).abs(), 0.5);

    let driven_n = driven_oscillator(b, 0.1)?;
    let start = coherent_state(b, Complex64::new(1.0, 0.0))?;
    let recs = propagate(&driven_n, &start, &spec(Method::Magnus2, 1e-3)?, 0.0, 10.0, 100)?;
    let drift = |f: fn(&geoschro_core::dynamics::TrajectoryRecord) -> f64| {
        recs.iter().map(|r| (f(r) - f(&recs[0])).abs()).fold(0.0, f64::max)
    };
    c.case("driven_norm_drift", drift(|r| r.norm), 1e-12);
    c.case("driven_momentum_drift", drift(|r| r.momentum_j), 1e-12);

    let start = coherent_state(b, Complex64::new(1.0, -0.5))?;
    let recs = propagate(&osc, &start, &spec(Method::ExactEig, 0.01)?, 0.0, 2.0, 10)?;
    let e0 = recs[0].energy;
    let energy = recs.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max) / (1.0 + e0.abs());
    c.case("autonomous_energy_drift", energy, 1e-10);

    let u = tv(random_state(m, c.seed.wrapping_add(1)));
    let v = tv(random_state(m, c.seed.wrapping_add(2)));
    let r = symplectic_preservation_check(&driven, &u, &v, &spec(Method::Magnus2, 1e-3)?, 0.0, 10.0)?;
    c.case("symplectic_preservation", r, 1e-11);
    Ok(())
}

/// A level-set tangent vector at `p`: a random direction minus its radial
/// part.
fn tangent_at(c: &Ctx, p: &LevelSetPoint, k: u64) -> geoschro_core::Result<TangentVector> {
    let w = c.state(k);
    let radial = inner(p.point(), &w)?.re / p.point().norm_sqr();
    Ok(tv(w.axpy(Complex64::new(-radial, 0.0), p.point())?))
}

fn reduction(c: &mut Ctx) -> Check {
    let mu = -0.5;
    let b = c.basis();
    let gens = metaplectic_generators(b)?;
    let (mut kernel, mut shift, mut rep, mut ham, mut tangency) = (0f64, 0f64, 0f64, 0f64, 0f64);
    for k in 0..PAIRS / 2 {
        let p = level_set_project(&c.state(3 * k), mu)?;
        let v = tangent_at(c, &p, 3 * k + 1)?;
        let w = tangent_at(c, &p, 3 * k + 2)?;
        let vert = vertical_vector(&p);
        kernel = kernel.max(symplectic_form(&vert, &w)?.abs());
        let base = reduced_symplectic_form(&p, &v, &w)?;
        let cshift = Complex64::new(0.1 * k as f64 - 2.0, 0.0);
        let shifted = tv(v.direction().axpy(cshift, vert.direction())?);
        shift = shift.max((reduced_symplectic_form(&p, &shifted, &w)? - base).abs());
        let theta = 0.61 * k as f64;
        let g = |s: &StateVector| u1_act(theta, s);
        let pg = LevelSetPoint::new(g(p.point()), mu)?;
        let moved = reduced_symplectic_form(&pg, &tv(g(v.direction())), &tv(g(w.direction())))?;
        rep = rep.max((moved - base).abs());
        let h1 = horizontal_project_with(&p, &v, &c.tol)?;
        shift = shift.max(horizontal_project_with(&p, &h1, &c.tol)?.direction().sub(h1.direction())?.norm());

        let a = &gens[(k % 6) as usize];
        let f = reduced_hamiltonian(a, &ray_of_with(p.point(), &c.tol)?, mu)?;
        let fg = reduced_hamiltonian(a, &ray_of_with(pg.point(), &c.tol)?, mu)?;
        ham = ham.max((f - fg).abs() / a.max_abs());
        let h = TDepHamiltonian::autonomous(a.clone(), "generator")?;
        let rhs = schrodinger_rhs(&h, 0.0, p.point())?;
        tangency = tangency.max(momentum_tangent_map(p.point(), &rhs)?.abs() / a.max_abs());
    }
    c.case("kernel_identity", kernel, 1e-12);
    c.case("vertical_shift_invariance", shift, 1e-12);
    c.case("representative_invariance", rep, 1e-12);
    c.case("reduced_hamiltonian_invariance", ham, 1e-12);
    c.case("level_set_tangency", tangency, 1e-12);

    let h = driven_oscillator(b, 0.1)?;
    let psi0 = level_set_project(&coherent_state(b, Complex64::new(1.0, 0.0))?, mu)?;
    let report = commuting_diagram(&h, &psi0, &spec(Method::Magnus2, 1e-3)?, 1e-3, 0.0, 5.0, 10, 100)?;
    let conservation = report.upstairs.iter().map(|r| (r.momentum_j - mu).abs()).fold(0.0, f64::max);
    c.case("level_set_conservation", conservation, 1e-12);
    c.case("commuting_diagram", report.max_residual, 1e-6);
    c.case("projector_trace_drift", report.reduced.max_trace_drift, 1e-10);
    c.case("projector_hermiticity_drift", report.reduced.max_hermiticity_drift, 1e-12);
    c.case("projector_idempotency_drift", report.reduced.max_idempotency_drift, 1e-10);
    debug_assert!((momentum_map(psi0.point()) - mu).abs() < 1e-14);
    Ok(())
}

fn run_suite(suite: &str, size: usize, seed: u64, tol: Tolerances, bounds: &BTreeMap<String, f64>) -> Result<SuiteReport, CliError> {
    let start = Instant::now();
    let mut ctx = Ctx { n: size, seed, tol, bounds, cases: Vec::new() };
    match suite {
        "symplectic" => symplectic(&mut ctx),
        "operators" => operators(&mut ctx),
        "analytic" => analytic(&mut ctx),
        "dynamics" => dynamics(&mut ctx),
        "reduction" => reduction(&mut ctx),
        other => return Err(CliError::UnknownSuite(other.to_string())),
    }?;
    let pass = ctx.cases.iter().all(|c| c.pass);
    Ok(SuiteReport { suite: suite.into(), size, seed, cases: ctx.cases, pass, elapsed_seconds: start.elapsed().as_secs_f64() })
}

pub fn thread_count(requested: Option<usize>) -> usize {
    let from_env = || std::env::var("GEOSCHRO_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    requested
        .or_else(from_env)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
        .max(1)
}

/// Run one suite, or every suite for `"all"`, on up to
/// [`thread_count`] worker threads. Reports are in [`SUITES`] order
/// regardless of scheduling.
pub fn run_verify(suite: &str, opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    let suites: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => return Err(CliError::UnknownSuite(other.to_string())),
    };
    if opts.size < MIN_SIZE {
        return Err(CliError::schema("--size", format!("size must be at least {MIN_SIZE}")));
    }
    let mut tol = Tolerances::DEFAULT;
    let mut bounds = BTreeMap::new();
    for (key, value) in &opts.overrides {
        if tol.set(key, *value) {
            continue;
        }
        if !suites.iter().any(|s| case_names(s).contains(&key.as_str())) {
            return Err(CliError::BadTolerance(format!("{key}={value}")));
        }
        bounds.insert(key.clone(), *value);
    }

    let threads = thread_count(opts.threads).min(suites.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<SuiteReport, CliError>>>> = Mutex::new(suites.iter().map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= suites.len() {
                    break;
                }
                let r = run_suite(suites[k], opts.size, opts.seed, tol, &bounds);
                results.lock().expect("no worker panics while holding the lock")[k] = Some(r);
            });
        }
    });
    let reports = results
        .into_inner()
        .expect("workers joined")
        .into_iter()
        .map(|r| r.expect("every suite ran"))
        .collect::<Result<Vec<_>, _>>()?;
    let pass = reports.iter().all(|r| r.pass);
    Ok(VerifyReport { size: opts.size, seed: opts.seed, threads, suites: reports, pass })
}
