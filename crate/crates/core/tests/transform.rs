use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nalgebra::DVector;
use num_complex::Complex64;

use htype_xray::algebra::{GroupPoint, HTypeStructure};
use htype_xray::geodesics::GeodesicSpec;
use htype_xray::quadrature::Quadrature;
use htype_xray::testfn::{CentralTerm, Combination, GroupFunction, HorizontalTerm, LeftTranslated, Monomial, TestFunction};
use htype_xray::transform::*;

fn spec(s: &HTypeStructure, base: GroupPoint, nu: &[f64], lambda: &[f64]) -> GeodesicSpec {
    GeodesicSpec::new(s, base, DVector::from_column_slice(nu), DVector::from_column_slice(lambda)).unwrap()
}

fn bumpy(n: usize, m: usize) -> TestFunction {
    let mut x0 = vec![0.0; 2 * n];
    x0[0] = 0.3;
    x0[1] = -0.2;
    let mut freq = vec![0.0; m];
    freq[0] = 0.8;
    TestFunction {
        horizontal: vec![HorizontalTerm {
            coeff: Complex64::new(0.9, -0.2),
            center: x0,
            a: 1.4,
            poly: vec![Monomial { coeff: Complex64::new(1.0, 0.0), powers: { let mut p = vec![0; 2 * n]; p[0] = 1; p[1] = 1; p } }],
        }],
        central: vec![CentralTerm { coeff: Complex64::new(1.0, 0.0), center: vec![0.1; m], b: 1.2, freq }],
    }
}

#[test]
fn gaussian_line_transform_on_the_quaternionic_group() {
    let s = HTypeStructure::quaternionic();
    let f = TestFunction::gaussian(2, 3);
    let q = Quadrature::default();
    // from x = 0 the line stays at constant u
    let u = [0.3, -0.4, 0.5];
    let v = xray_line(&s, &f, &GroupPoint::from_slices(&[0.0; 4], &u), &[0.5, 0.5, 0.5, 0.5], &q).unwrap();
    assert_abs_diff_eq!(v.value.re, PI.sqrt() * (-0.5f64).exp(), epsilon = 1e-12);
    assert_abs_diff_eq!(v.value.im, 0.0, epsilon = 1e-14);
}

#[test]
fn xray_factors_through_periodisation() {
    let q = Quadrature::default();
    for (s, lambda, nu) in [
        (HTypeStructure::heisenberg(1).unwrap(), vec![1.3], vec![0.6, 0.8]),
        (HTypeStructure::quaternionic(), vec![0.4, -0.3, 0.9], vec![0.5, -0.5, 0.5, 0.5]),
    ] {
        let f = bumpy(s.n, s.m);
        let per = Periodized { structure: &s, f: &f, lambda: lambda.clone(), q: q.clone() };
        for base in [GroupPoint::identity(&s), GroupPoint::new(DVector::from_element(2 * s.n, 0.25), DVector::from_element(s.m, -0.4))] {
            let sp = spec(&s, base, &nu, &lambda);
            let direct = xray(&s, &f, &sp, &q).unwrap().value;
            let hol = holonomy(&s, &per, &sp, &q).unwrap();
            assert!((direct - hol).norm() <= 1e-10 * (1.0 + direct.norm()), "{direct} vs {hol}");
        }
    }
}

#[test]
fn xray_is_linear_and_left_invariant() {
    let s = HTypeStructure::heisenberg(2).unwrap();
    let q = Quadrature::default();
    let f = bumpy(2, 1);
    let g = TestFunction::gaussian(2, 1);
    let nu = [0.5, 0.5, 0.5, -0.5];
    let lambda = [0.7];
    let base = GroupPoint::from_slices(&[0.1, 0.2, -0.3, 0.0], &[0.4]);
    let (c1, c2) = (Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0));
    let comb = Combination { terms: vec![(c1, &f as &dyn GroupFunction), (c2, &g as &dyn GroupFunction)] };
    let sp = spec(&s, base.clone(), &nu, &lambda);
    let lhs = xray(&s, &comb, &sp, &q).unwrap().value;
    let rhs = c1 * xray(&s, &f, &sp, &q).unwrap().value + c2 * xray(&s, &g, &sp, &q).unwrap().value;
    assert!((lhs - rhs).norm() < 1e-12);

    // I(f∘L_p)(q) = I f(p·q)
    let p = GroupPoint::from_slices(&[-0.2, 0.1, 0.3, 0.2], &[0.5]);
    let moved = LeftTranslated { structure: &s, p: p.clone(), f: &f };
    let a = xray(&s, &moved, &sp, &q).unwrap().value;
    let b = xray(&s, &f, &spec(&s, s.mul(&p, &base).unwrap(), &nu, &lambda), &q).unwrap().value;
    assert!((a - b).norm() < 1e-11, "{a} vs {b}");
}

#[test]
fn xray_converges_under_refinement() {
    let s = HTypeStructure::heisenberg(1).unwrap();
    let f = bumpy(1, 1);
    let q = Quadrature::default();
    let sp = spec(&s, GroupPoint::from_slices(&[0.2, 0.1], &[0.3]), &[0.6, 0.8], &[0.9]);
    let a = xray(&s, &f, &sp, &q).unwrap();
    let b = xray(&s, &f, &sp, &q.refined()).unwrap();
    assert!((a.value - b.value).norm() < 1e-12);
    assert!(b.nodes > a.nodes);
    assert!(a.tail_bound < 1e-10);
}

#[test]
fn batch_matches_pointwise() {
    let s = HTypeStructure::quaternionic();
    let f = bumpy(2, 3);
    let q = Quadrature::default();
    let nu = [0.5, 0.5, -0.5, 0.5];
    let lambda = [0.2, 0.6, -0.5];
    let curve = Curve::new(&s, &nu, &lambda).unwrap();
    let xp = [0.3, -0.1, 0.2, 0.0];
    let us: Vec<Vec<f64>> = (0..5).map(|i| vec![0.1 * i as f64, -0.2, 0.05 * i as f64]).collect();
    let batch = xray_u_batch(&s, &f, &curve, &xp, &us, &q).unwrap();
    for (u, v) in us.iter().zip(&batch) {
        let p = xray_with_curve(&s, &f, &curve, &GroupPoint::from_slices(&xp, u), &q).unwrap().value;
        assert!((p - v).norm() < 1e-12);
    }
}

#[test]
fn homogeneity_on_the_quaternionic_group() {
    let s = HTypeStructure::quaternionic();
    let f = bumpy(2, 3);
    let q = Quadrature::default();
    let pts = [GroupPoint::from_slices(&[0.1, 0.0, -0.2, 0.3], &[0.2, 0.0, -0.1])];
    for eps in [0.5, 1.7] {
        let r = homogeneity_check(&s, &f, &[0.5, 0.5, 0.5, 0.5], &[0.3, 0.4, 0.0], eps, &pts, &q).unwrap();
        assert!(r < 1e-10, "ε = {eps}: {r}");
    }
}

#[test]
fn periodisation_budget_and_errors() {
    let s = HTypeStructure::heisenberg(1).unwrap();
    let f = TestFunction::gaussian(1, 1);
    let q = Quadrature::default();
    let p = GroupPoint::identity(&s);
    let k = periodize_terms(&f, &[2.0], &p, &q).unwrap();
    assert!(k >= 4);
    assert!(periodize(&s, &f, &[2.0], &p, k - 1, &q).is_err());
    let v = periodize(&s, &f, &[2.0], &p, k, &q).unwrap();
    // Σ_k e^{−(kπ/4)²}, the exact theta sum
    let exact: f64 = (-40..=40).map(|j| (-(j as f64 * PI / 4.0).powi(2)).exp()).sum();
    assert_abs_diff_eq!(v.re, exact, epsilon = 1e-13);
    assert!(central_period(&[0.0]).is_err());
    assert!(Curve::new(&s, &[1.0, 1.0], &[1.0]).is_err());
    assert!(Curve::new(&s, &[1.0, 0.0], &[1.0, 0.0]).is_err());
}
