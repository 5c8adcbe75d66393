use geoschro_core::hilbert::{random_state, BasisSpec, StateVector};
use geoschro_core::linalg::{random_coefficients, ComplexMatrix};
use geoschro_core::operators::{
    analytic_certificate, build_angular_momentum, build_identity, build_position, commutator, flow_commutator,
    lie_span_residual, metaplectic_generators, monomial_gaussian, safe_subspace, OperatorMatrix,
};
use geoschro_core::Complex64;

fn skew_generators(n: usize) -> Vec<OperatorMatrix> {
    metaplectic_generators(BasisSpec::hermite(n)).unwrap().iter().map(|h| h.times_i()).collect()
}

fn low_state(n: usize, support: usize, seed: u64) -> StateVector {
    let mut c = random_coefficients(support, seed);
    c.resize(n, Complex64::new(0.0, 0.0));
    StateVector::new(BasisSpec::hermite(n), c).unwrap()
}

#[test]
fn metaplectic_algebra_closes() {
    let gens = skew_generators(64);
    for i in 0..6 {
        for j in (i + 1)..6 {
            let c = commutator(&gens[i], &gens[j]).unwrap();
            let block = safe_subspace(&c, 1).unwrap().max_index + 1;
            let r = lie_span_residual(&c, &gens, block).unwrap();
            assert!(r <= 1e-10, "pair ({i},{j}) residual {r}");
        }
    }
}

#[test]
fn span_residual_detects_escape() {
    // [ix̂², ix̂] = 0 but x̂³ is not in the span.
    let b = BasisSpec::hermite(32);
    let x = build_position(b).unwrap();
    let x3 = OperatorMatrix::from_matrix(b, x.matrix().matmul(x.matrix()).matmul(x.matrix())).unwrap().times_i();
    let r = lie_span_residual(&x3, &skew_generators(32), 20).unwrap();
    assert!(r > 0.1);
}

#[test]
fn su2_relations_are_exact() {
    let b = BasisSpec::hermite3d(6);
    let (lx, ly, lz) = build_angular_momentum(b).unwrap();
    let i = Complex64::new(0.0, 1.0);
    for (a, bb, c) in [(&lx, &ly, &lz), (&ly, &lz, &lx), (&lz, &lx, &ly)] {
        let comm = commutator(a, bb).unwrap();
        assert!(comm.matrix().max_abs_diff(&c.matrix().scale(i)) <= 1e-12);
    }
    // L² commutes with each component and is l(l+1) on the degree-1 block.
    let l2 = lx.matrix().matmul(lx.matrix()).add(&ly.matrix().matmul(ly.matrix())).add(&lz.matrix().matmul(lz.matrix()));
    for l in [&lx, &ly, &lz] {
        assert!(l2.commutator(l.matrix()).max_abs() <= 1e-12);
    }
    for k in 1..4 {
        assert!((l2[(k, k)].re - 2.0).abs() < 1e-14);
    }
}

#[test]
fn flow_commutator_matches_algebra_with_second_order() {
    let n = 64;
    let gens = skew_generators(n);
    let psi = low_state(n, 6, 3);
    for i in 0..5 {
        for j in (i + 1)..5 {
            let exact = commutator(&gens[i], &gens[j]).unwrap().apply(&psi).unwrap();
            let err = |h: f64| flow_commutator(&gens[i], &gens[j], &psi, h).unwrap().sub(&exact).unwrap().norm();
            if exact.norm() < 1e-12 {
                // Commuting flows: only roundoff remains.
                assert!(err(1e-3) <= 1e-8);
                continue;
            }
            let ratio = err(2e-3) / err(1e-3);
            assert!((3.5..=4.5).contains(&ratio), "pair ({i},{j}) ratio {ratio}");
        }
    }
}

#[test]
fn flow_commutator_random_skew_pair() {
    let n = 32;
    let b = BasisSpec::hermite(n);
    let scale = Complex64::new(0.0, 1.0 / (n as f64).sqrt());
    let skew = |seed| {
        let h = ComplexMatrix::from_row_major(n, random_coefficients(n * n, seed)).unwrap().hermitian_part();
        OperatorMatrix::from_matrix(b, h.scale(scale)).unwrap()
    };
    let (a, bb) = (skew(5), skew(6));
    let psi = random_state(n, 7);
    let exact = commutator(&a, &bb).unwrap().apply(&psi).unwrap();
    let approx = flow_commutator(&a, &bb, &psi, 1e-3).unwrap();
    let rel = approx.sub(&exact).unwrap().norm() / exact.norm();
    assert!(rel <= 1e-4, "{rel}");
}

#[test]
fn monomial_gaussians_are_analytic_with_stated_constant() {
    let b = BasisSpec::hermite(64);
    let ops = metaplectic_generators(b).unwrap();
    for m in 0..=3usize {
        let psi = monomial_gaussian(b, m).unwrap();
        let claimed = 2f64.powi(m as i32 + 1) * (1..=m).product::<usize>() as f64;
        for op in &ops[3..] {
            let cert = analytic_certificate(op, &psi, 8, Some(claimed)).unwrap();
            assert!(cert.holds, "m={m} fitted {}", cert.fitted_c);
        }
        for op in &ops[..3] {
            let cert = analytic_certificate(op, &psi, 8, None).unwrap();
            assert!(cert.holds && cert.fitted_c.is_finite());
        }
    }
}

#[test]
fn position_powers_of_ground_state() {
    let b = BasisSpec::hermite(64);
    let x = build_position(b).unwrap();
    let phi0 = StateVector::basis_vector(b, 0).unwrap();
    let cert = analytic_certificate(&x, &phi0, 6, None).unwrap();
    // ‖x̂ⁿφ₀‖² = (2n-1)!!/2ⁿ: 1, 1/2, 3/4, 15/8, 105/16, ...
    let mut expected = vec![1.0f64];
    for k in 1..=6 {
        let prev = expected[k - 1] * expected[k - 1];
        expected.push((prev * (2 * k - 1) as f64 / 2.0).sqrt());
    }
    for (a, e) in cert.norms.iter().zip(&expected) {
        assert!((a - e).abs() < 1e-13 * e);
    }
    assert!(cert.norms[1..].windows(2).all(|w| w[1] > w[0]));
    assert!(cert.fitted_c.is_finite());
    let id = build_identity(b);
    let cert = analytic_certificate(&id, &random_state(64, 3), 6, None).unwrap();
    assert!((cert.fitted_c - 1.0).abs() < 1e-14);
}

#[test]
fn certificate_refuses_unsafe_vectors() {
    let b = BasisSpec::hermite(16);
    let x = build_position(b).unwrap();
    let edge = StateVector::basis_vector(b, 10).unwrap();
    assert!(analytic_certificate(&x, &edge, 8, None).is_err());
    assert!(analytic_certificate(&x, &edge, 5, None).is_ok());
}

