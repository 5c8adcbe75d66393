//! Matrix elements and spectra checked against independent computations:
//! Gauss–Hermite quadrature of the Hermite functions and nalgebra's
//! eigensolver.

use geoschro_core::hilbert::{probabilist_to_orthonormal, BasisSpec, StateVector};
use geoschro_core::linalg::{hermitian_eigendecompose, random_coefficients, ComplexMatrix, LuFactorization};
use geoschro_core::operators::{build_derivative_probabilist, build_momentum, build_position, build_quadratics};
use geoschro_core::Complex64;
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Gauss–Hermite nodes and weights (weight `e^{-x²}`): nodes from the
/// Jacobi matrix (nalgebra) polished by Newton on `h_k`, weights from the
/// Christoffel function `√π / Σ_{j<k} h_j(x)²` so tiny tail weights keep
/// full relative accuracy.
fn gauss_hermite(k: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(k, k, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64 / 2.0).sqrt() } else { 0.0 });
    let mut nodes = SymmetricEigen::new(jacobi).eigenvalues.as_slice().to_vec();
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let h = hermite_polys(k + 1, *x);
            *x -= h[k] / ((2.0 * k as f64).sqrt() * h[k - 1]);
        }
    }
    let weights = nodes
        .iter()
        .map(|x| PI.sqrt() / hermite_polys(k, *x).iter().map(|h| h * h).sum::<f64>())
        .collect();
    (nodes, weights)
}

/// `h_n(x)` with `φ_n = π^{-1/4} h_n(x) e^{-x²/2}`, by the three-term
/// recurrence.
fn hermite_polys(n: usize, x: f64) -> Vec<f64> {
    let mut h = vec![1.0; n.max(2)];
    h[1] = 2f64.sqrt() * x;
    for k in 1..n.saturating_sub(1) {
        h[k + 1] = (2.0 / (k + 1) as f64).sqrt() * x * h[k] - (k as f64 / (k + 1) as f64).sqrt() * h[k - 1];
    }
    h.truncate(n);
    h
}

/// `∫ φ_m (f φ_n) dx` where `f φ_n = π^{-1/4} g_n(x) e^{-x²/2}`.
fn quadrature_matrix(n: usize, g: impl Fn(&[f64], usize, f64) -> f64) -> Vec<Vec<f64>> {
    let (nodes, weights) = gauss_hermite(2 * n + 8);
    let mut out = vec![vec![0.0; n]; n];
    for (x, w) in nodes.iter().zip(&weights) {
        let h = hermite_polys(n + 1, *x);
        for m in 0..n {
            for k in 0..n {
                out[m][k] += w * h[m] * g(&h, k, *x) / PI.sqrt();
            }
        }
    }
    out
}

/// `d/dx φ_n`: polynomial part `√(2n) h_{n-1} - x h_n`.
fn derivative_part(h: &[f64], n: usize, x: f64) -> f64 {
    let lower = if n == 0 { 0.0 } else { (2.0 * n as f64).sqrt() * h[n - 1] };
    lower - x * h[n]
}

#[test]
fn position_matrix_matches_quadrature() {
    let n = 24;
    let x = build_position(BasisSpec::hermite(n)).unwrap();
    let q = quadrature_matrix(n, |h, k, x| x * h[k]);
    assert!((q[0][1] - 0.5f64.sqrt()).abs() < 1e-12);
    for m in 0..n {
        for k in 0..n {
            assert!((x.matrix()[(m, k)] - Complex64::new(q[m][k], 0.0)).norm() < 1e-12, "({m},{k})");
        }
    }
}

#[test]
fn momentum_matrix_matches_quadrature() {
    let n = 24;
    let p = build_momentum(BasisSpec::hermite(n)).unwrap();
    let d = quadrature_matrix(n, derivative_part);
    for m in 0..n {
        for k in 0..n {
            // p = -i d/dx
            assert!((p.matrix()[(m, k)] - Complex64::new(0.0, -d[m][k])).norm() < 1e-12, "({m},{k})");
        }
    }
}

#[test]
fn quadratics_match_quadrature_on_full_space() {
    let n = 20;
    let (x2, p2, xp_px) = build_quadratics(BasisSpec::hermite(n)).unwrap();
    let qx2 = quadrature_matrix(n, |h, k, x| x * x * h[k]);
    assert!((qx2[0][0] - 0.5).abs() < 1e-14);
    // -d²/dx² φ_n: apply the derivative twice through the polynomial part,
    // (g e^{-x²/2})' = (g' - x g) e^{-x²/2}, using the ladder relation for
    // g = h_n and the product rule for the rest.
    let qp2 = quadrature_matrix(n, |h, k, x| {
        let kf = k as f64;
        let hk1 = if k >= 1 { h[k - 1] } else { 0.0 };
        let hk2 = if k >= 2 { h[k - 2] } else { 0.0 };
        // g1 = √(2k) h_{k-1} - x h_k
        // g1' = √(2k)√(2(k-1)) h_{k-2} - h_k - x√(2k) h_{k-1}
        let g1 = (2.0 * kf).sqrt() * hk1 - x * h[k];
        let g1p = (2.0 * kf).sqrt() * (2.0 * (kf - 1.0)).max(0.0).sqrt() * hk2 - h[k] - x * (2.0 * kf).sqrt() * hk1;
        -(g1p - x * g1)
    });
    // x p + p x = -i(2x d/dx + 1)
    let qxp = quadrature_matrix(n, |h, k, x| 2.0 * x * derivative_part(h, k, x) + h[k]);
    for m in 0..n {
        for k in 0..n {
            assert!((x2.matrix()[(m, k)].re - qx2[m][k]).abs() < 1e-11, "x2 ({m},{k})");
            assert!((p2.matrix()[(m, k)].re - qp2[m][k]).abs() < 1e-11, "p2 ({m},{k})");
            assert!((xp_px.matrix()[(m, k)] - Complex64::new(0.0, -qxp[m][k])).norm() < 1e-11, "xp ({m},{k})");
        }
    }
}

#[test]
fn probabilist_change_of_basis_matches_quadrature() {
    // He_n e^{-x²/2} projected onto φ_m by quadrature; He by its own
    // recurrence He_{n+1} = x He_n - n He_{n-1}.
    let n = 16;
    let c = probabilist_to_orthonormal(n);
    let (nodes, weights) = gauss_hermite(2 * n + 8);
    let mut q = vec![vec![0.0; n]; n];
    for (x, w) in nodes.iter().zip(&weights) {
        let h = hermite_polys(n, *x);
        let mut he = vec![1.0, *x];
        for k in 1..n {
            let next = x * he[k] - k as f64 * he[k - 1];
            he.push(next);
        }
        for m in 0..n {
            for k in 0..n {
                q[m][k] += w * h[m] * he[k] / PI.powf(0.25);
            }
        }
    }
    for k in 0..n {
        let scale = (0..n).map(|m| q[m][k].abs()).fold(1.0, f64::max);
        for m in 0..n {
            assert!((c[(m, k)].re - q[m][k]).abs() < 1e-12 * scale, "({m},{k}) {} vs {}", c[(m, k)].re, q[m][k]);
        }
    }
}

#[test]
fn derivative_conjugates_to_ladder_form() {
    let n = 20;
    let d = build_derivative_probabilist(BasisSpec::probabilist(n)).unwrap();
    let c = probabilist_to_orthonormal(n);
    let lu = LuFactorization::new(&c).unwrap();
    let oracle = quadrature_matrix(n, derivative_part);
    // Column j of C D C⁻¹ is exact while C⁻¹e_j stays inside the safe prefix.
    for j in 0..n - 1 {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        let col = c.apply(&d.matrix().apply(&lu.solve(&e)));
        for i in 0..n {
            let ladder = if i == j + 1 {
                -((j + 1) as f64 / 2.0).sqrt()
            } else if j == i + 1 {
                (j as f64 / 2.0).sqrt()
            } else {
                0.0
            };
            assert!((col[i].re - ladder).abs() < 1e-9, "({i},{j})");
            assert!(col[i].im.abs() < 1e-12);
            assert!((oracle[i][j] - ladder).abs() < 1e-12);
        }
    }
}

#[test]
fn probabilist_inner_product_matches_orthonormal() {
    let n = 12;
    let b = BasisSpec::probabilist(n);
    let c = probabilist_to_orthonormal(n);
    let u = StateVector::random(b, 1);
    let v = StateVector::random(b, 2);
    let direct = geoschro_core::hilbert::inner(&u, &v).unwrap();
    let via = geoschro_core::linalg::dot(&c.apply(u.coefficients()), &c.apply(v.coefficients()));
    assert!((direct - via).norm() < 1e-12);
    assert!((u.norm() - 1.0).abs() < 1e-13);
}

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.dim(), m.dim(), |i, j| m[(i, j)])
}

#[test]
fn eigenvalues_agree_with_nalgebra() {
    for (n, seed) in [(5, 1), (17, 2), (40, 3), (96, 4)] {
        let raw = ComplexMatrix::from_row_major(n, random_coefficients(n * n, seed)).unwrap();
        let h = raw.hermitian_part().scale_real(n as f64);
        let ours = hermitian_eigendecompose(&h).unwrap();
        let mut theirs: Vec<f64> = SymmetricEigen::new(to_nalgebra(&h)).eigenvalues.as_slice().to_vec();
        theirs.sort_by(f64::total_cmp);
        let scale = h.max_abs();
        for (a, b) in ours.eigenvalues.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-11 * scale, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn oscillator_spectrum() {
    let (x2, p2, _) = build_quadratics(BasisSpec::hermite(64)).unwrap();
    let osc = x2.matrix().add(p2.matrix()).scale_real(0.5);
    let eig = hermitian_eigendecompose(&osc).unwrap();
    for n in 0..10 {
        assert!((eig.eigenvalues[n] - (n as f64 + 0.5)).abs() < 1e-10);
    }
    let mut theirs: Vec<f64> = SymmetricEigen::new(to_nalgebra(&osc)).eigenvalues.as_slice().to_vec();
    theirs.sort_by(f64::total_cmp);
    assert!(eig.eigenvalues.iter().zip(&theirs).all(|(a, b)| (a - b).abs() < 1e-10 * (1.0 + b.abs())));
}
