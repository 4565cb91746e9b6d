use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use htype_xray::algebra::{dilate, vec_norm, GroupPoint, HTypeStructure};
use htype_xray::fock::{FockBasis, FockOperator};
use htype_xray::frequency::*;
use htype_xray::geodesics::{flow_origin, gamma_centered, helical_shift};
use htype_xray::io::{decode_operator, encode_operator};
use htype_xray::reconstruct::ChargeSet;

fn structure(which: u8) -> HTypeStructure {
    match which % 3 {
        0 => HTypeStructure::heisenberg(1).unwrap(),
        1 => HTypeStructure::heisenberg(2).unwrap(),
        _ => HTypeStructure::quaternionic(),
    }
}

fn take(v: &[f64], len: usize) -> Vec<f64> {
    v.iter().copied().cycle().take(len).collect()
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = vec_norm(v);
    (n > 1e-3).then(|| v.iter().map(|c| c / n).collect())
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_is_associative_with_inverses(which: u8, a in coords(), b in coords(), c in coords(), ua in coords(), ub in coords()) {
        let s = structure(which);
        let (d, m) = (2 * s.n, s.m);
        let p = GroupPoint::from_slices(&take(&a, d), &take(&ua, m));
        let q = GroupPoint::from_slices(&take(&b, d), &take(&ub, m));
        let r = GroupPoint::from_slices(&take(&c, d), &take(&ua[1..], m));
        let l = s.mul(&s.mul(&p, &q).unwrap(), &r).unwrap();
        let rr = s.mul(&p, &s.mul(&q, &r).unwrap()).unwrap();
        prop_assert!(l.distance_sq(&rr) < 1e-24);
        let e = s.mul(&p, &s.inv(&p)).unwrap();
        prop_assert!(e.distance_sq(&GroupPoint::identity(&s)) < 1e-26);
    }

    #[test]
    fn dilations_are_automorphisms(which: u8, a in coords(), b in coords(), ua in coords(), eps in 0.1..5.0f64) {
        let s = structure(which);
        let (d, m) = (2 * s.n, s.m);
        let p = GroupPoint::from_slices(&take(&a, d), &take(&ua, m));
        let q = GroupPoint::from_slices(&take(&b, d), &take(&ua[2..], m));
        let l = dilate(eps, &s.mul(&p, &q).unwrap()).unwrap();
        let r = s.mul(&dilate(eps, &p).unwrap(), &dilate(eps, &q).unwrap()).unwrap();
        prop_assert!(l.distance_sq(&r).sqrt() < 1e-11 * (1.0 + eps * eps) * 10.0);
    }

    #[test]
    fn alpha_is_a_homomorphism_for_generic_mu(which: u8, a in coords(), b in coords(), ua in coords(), mu in coords()) {
        let s = structure(which);
        let (d, m) = (2 * s.n, s.m);
        let mu = take(&mu, m);
        prop_assume!(vec_norm(&mu) > 1e-2);
        let p = GroupPoint::from_slices(&take(&a, d), &take(&ua, m));
        let q = GroupPoint::from_slices(&take(&b, d), &take(&ua[1..], m));
        let lhs = s.alpha(&mu, &s.mul(&p, &q).unwrap()).unwrap();
        let rhs = s.alpha(&mu, &p).unwrap().mul(&s.alpha(&mu, &q).unwrap());
        prop_assert!((lhs.z - rhs.z).norm() < 1e-12);
        prop_assert!((lhs.t - rhs.t).abs() < 1e-11);
    }

    #[test]
    fn frame_is_orthogonal_and_normalises_j(which: u8, mu in coords()) {
        let s = structure(which);
        let mu = take(&mu, s.m);
        prop_assume!(vec_norm(&mu) > 1e-2);
        let r = s.rotation_frame(&mu).unwrap();
        let d = 2 * s.n;
        prop_assert!((r.transpose() * &r - DMatrix::<f64>::identity(d, d)).amax() < 1e-12);
        let j = s.j_map(&mu).unwrap() / vec_norm(&mu);
        let std = htype_xray::algebra::standard_j(s.n);
        prop_assert!((r.transpose() * j * &r - std).amax() < 1e-12);
    }

    #[test]
    fn geodesics_are_unit_speed_and_helical(which: u8, nu in coords(), lam in coords(), t in -10.0..10.0f64, k in -3i64..=3) {
        let s = structure(which);
        let nu = unit(&take(&nu, 2 * s.n));
        prop_assume!(nu.is_some());
        let nu = nu.unwrap();
        let lam = take(&lam, s.m);
        prop_assume!(vec_norm(&lam) > 0.05);
        let h = 1e-5;
        let a = flow_origin(&s, &nu, &lam, t - h).unwrap();
        let b = flow_origin(&s, &nu, &lam, t + h).unwrap();
        prop_assert!((((&b.x - &a.x) / (2.0 * h)).norm() - 1.0).abs() < 1e-7);
        let g = gamma_centered(&s, &nu, &lam, t).unwrap();
        prop_assert!((g.x.norm() - 1.0 / vec_norm(&lam)).abs() < 1e-12 / vec_norm(&lam));
        let (l, r) = helical_shift(&s, &nu, &lam, t, k).unwrap();
        let scale = 1.0 + (t.abs() + 10.0) / vec_norm(&lam).powi(2);
        prop_assert!(l.distance_sq(&r).sqrt() < 1e-13 * scale);
    }

    #[test]
    fn averaged_eigenvalues_are_nonnegative_and_match_direct_sums(n in 1usize..=3, k in -3i64..=3, wr in prop::collection::vec(-2.0..2.0f64, 6)) {
        let w: Vec<Complex64> = (0..n).map(|j| Complex64::new(wr[2 * j], wr[2 * j + 1])).collect();
        let wn = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let closed = averaged_normal_eigenvalues(n, k, wn, 5);
        let direct = averaged_normal_direct(n, k, &w, 5).unwrap();
        for (a, b) in closed.iter().zip(&direct) {
            prop_assert!(*a >= 0.0);
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
        if n >= 2 {
            for (l, v) in closed.iter().enumerate() {
                prop_assert!(*v >= eigenvalue_lower_bound(n, l, k, wn).unwrap() * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn multiplier_moves_degree_by_k(k in -3i64..=3, wr in prop::collection::vec(-2.0..2.0f64, 4)) {
        let basis = FockBasis::new(2, 5).unwrap();
        let w = [Complex64::new(wr[0], wr[1]), Complex64::new(wr[2], wr[3])];
        let j = multiplier_from_w(&basis, k, &w).unwrap();
        prop_assert_eq!(j.off_block_mass(k.abs()), 0.0);
    }

    #[test]
    fn compatibility_round_trips(lam in coords(), k in -5i64..=5, perp in coords()) {
        let lam = take(&lam, 3);
        prop_assume!(vec_norm(&lam) > 0.1 && k != 0);
        let pair = CompatiblePair::along(&lam, k).unwrap();
        // add a component orthogonal to λ
        let ln = vec_norm(&lam);
        let p = take(&perp, 3);
        let c: f64 = p.iter().zip(&lam).map(|(a, b)| a * b).sum::<f64>() / (ln * ln);
        let mu: Vec<f64> = pair.mu.iter().zip(&p).zip(&lam).map(|((m, a), b)| m + a - c * b).collect();
        let general = CompatiblePair::new(&lam, &mu).unwrap();
        prop_assert_eq!(general.k, k);
        let back = relation_coords(&general).to_pair();
        for (a, b) in back.mu.iter().zip(&mu) {
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn charge_witnesses_are_compatible_members(mu in coords(), eps in 0.05..1.5f64, r in 0.3..3.0f64) {
        let mu3 = take(&mu, 3);
        let sets = [
            (ChargeSet::Cap { center: vec![0.0, r, 0.0], eps }, mu3.clone()),
            (ChargeSet::Sphere { radius: r }, mu3),
            (ChargeSet::Shell { radius: r, eps }, vec![mu[0] * 20.0]),
        ];
        for (z, m) in sets {
            if let Some((lam, k)) = z.witness(&m, false) {
                prop_assert!(z.contains(&lam));
                prop_assert_eq!(compatible(&lam, &m, COMPAT_TOL), Some(k));
            }
        }
    }

    #[test]
    fn operator_text_round_trips(n in 1usize..=2, l in 0usize..=3, vals in prop::collection::vec(-1e6..1e6f64, 200)) {
        let basis = FockBasis::new(n, l).unwrap();
        let m = DMatrix::from_fn(basis.len(), basis.len(), |r, c| {
            let i = (r * basis.len() + c) % 100;
            Complex64::new(vals[2 * i], vals[2 * i + 1] * 1e-9)
        });
        let op = FockOperator::from_matrix(&basis, m).unwrap();
        prop_assert_eq!(decode_operator(&encode_operator(&op)).unwrap(), op);
    }

    #[test]
    fn decoder_never_panics(text in "\\PC{0,200}") {
        let _ = decode_operator(&text);
        let _ = decode_operator(&format!("fock-operator\nn 1\nl_max 1\nenumeration graded-lex\nrows 2\ncols 2\n{text}"));
    }
}

#[test]
fn left_momentum_is_conserved_along_the_flow() {
    let s = HTypeStructure::quaternionic();
    let nu = DVector::from_column_slice(&[0.5, 0.5, 0.5, -0.5]);
    let lam = [0.3, -0.2, 0.6];
    for t in [0.0, 1.3, 7.0] {
        let p = flow_origin(&s, nu.as_slice(), &lam, t).unwrap();
        let r = htype_xray::geodesics::momentum_right(&s, nu.as_slice(), &lam, t).unwrap();
        let l = htype_xray::geodesics::momentum_left(&s, &p, &r).unwrap();
        assert!((l.nu - &nu).amax() < 1e-14);
    }
}
