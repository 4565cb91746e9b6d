//! End-to-end acceptance suite: one pass/fail line per criterion.
//!
//! Run with `cargo test -p htype-xray --test acceptance -- --nocapture`.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use htype_xray::algebra::{vec_norm, GroupPoint, HTypeStructure};
use htype_xray::fock::{entry_function, hermite_product, schrodinger_apply, FockBasis, GridFunction, MultiIndex};
use htype_xray::frequency::*;
use htype_xray::geodesics::{flow_origin, helical_shift, momentum_left, momentum_right, MomentumPair};
use htype_xray::quadrature::Quadrature;
use htype_xray::reconstruct::*;
use htype_xray::testfn::TestFunction;
use htype_xray::transform::{homogeneity_check, l1_norm, l1_norm_line_transform, l1_norm_quotient, Periodized, XrayData};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = vec_norm(&v);
        if n > 0.1 && n <= 1.0 {
            return v.iter().map(|c| c / n).collect();
        }
    }
}

fn structures() -> Vec<(&'static str, HTypeStructure)> {
    vec![
        ("H1", HTypeStructure::heisenberg(1).unwrap()),
        ("H2", HTypeStructure::heisenberg(2).unwrap()),
        ("quaternionic", HTypeStructure::quaternionic()),
    ]
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for (_, s) in structures() {
        for _ in 0..1000 {
            let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
            let mu: Vec<f64> = unit(&mut rng, s.m).iter().map(|c| c * scale).collect();
            let j = s.j_map(&mu).unwrap();
            let m2 = vec_norm(&mu).powi(2);
            let r = (&j * &j + DMatrix::identity(j.nrows(), j.nrows()) * m2).abs().max();
            worst = worst.max(r / m2);
        }
    }
    check(worst <= 1e-12, format!("max ‖J_μ² + |μ|²I‖/|μ|² = {worst:.3e} (tol 1e-12)"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut speed, mut horiz, mut helical, mut drift, mut cont) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (_, s) in structures() {
        let d = 2 * s.n;
        for _ in 0..20 {
            let nu = unit(&mut rng, d);
            let lambda: Vec<f64> = unit(&mut rng, s.m).iter().map(|c| c * rng.gen_range(0.2..2.0)).collect();
            let h = 1e-5;
            for i in 0..10 {
                let t = 0.37 + 1.3 * i as f64;
                let a = flow_origin(&s, &nu, &lambda, t - h).unwrap();
                let b = flow_origin(&s, &nu, &lambda, t + h).unwrap();
                let p = flow_origin(&s, &nu, &lambda, t).unwrap();
                let xd = (&b.x - &a.x) / (2.0 * h);
                let ud = (&b.u - &a.u) / (2.0 * h);
                speed = speed.max((xd.norm() - 1.0).abs());
                let w = s.omega(p.x.as_slice(), xd.as_slice());
                let hz = ud.iter().zip(&w).map(|(a, b)| (a - 0.5 * b).abs()).fold(0.0, f64::max);
                horiz = horiz.max(hz);
                for k in -2..=2 {
                    let (l, r) = helical_shift(&s, &nu, &lambda, t, k).unwrap();
                    helical = helical.max((&l.x - &r.x).amax().max((&l.u - &r.u).amax()));
                }
            }
            let start = MomentumPair { nu: DVector::from_column_slice(&nu), zeta: DVector::from_column_slice(&lambda) };
            for i in 0..=200 {
                let t = 20.0 * i as f64 / 200.0;
                let p = flow_origin(&s, &nu, &lambda, t).unwrap();
                let right = momentum_right(&s, &nu, &lambda, t).unwrap();
                let left = momentum_left(&s, &p, &right).unwrap();
                drift = drift.max((&left.nu - &start.nu).amax().max((&left.zeta - &start.zeta).amax()));
            }
            let tiny: Vec<f64> = unit(&mut rng, s.m).iter().map(|c| c * 1e-8).collect();
            let zero = vec![0.0; s.m];
            for i in 0..=50 {
                let t = 5.0 * i as f64 / 50.0;
                let a = flow_origin(&s, &nu, &tiny, t).unwrap();
                let b = flow_origin(&s, &nu, &zero, t).unwrap();
                cont = cont.max(a.distance_sq(&b).sqrt());
            }
        }
    }
    let pass = speed <= 1e-8 && horiz <= 1e-8 && helical <= 1e-12 && drift <= 1e-11 && cont <= 1e-6;
    check(
        pass,
        format!("speed {speed:.2e}, horizontality {horiz:.2e} (1e-8); helical {helical:.2e} (1e-12); momentum drift {drift:.2e} (1e-11); λ→0 {cont:.2e} (1e-6)"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let deg = 8;
    let phi: Vec<GridFunction> = (0..=deg)
        .map(|k| GridFunction::sample(1, 512, 16.0, |xi| Complex64::new(hermite_product(&MultiIndex(vec![k]), xi), 0.0)).unwrap())
        .collect();
    let mut worst = 0.0f64;
    for h in [0.5, 1.0, 2.0] {
        for _ in 0..12 {
            let r = 3.0 * rng.gen::<f64>().sqrt();
            let th = rng.gen_range(0.0..2.0 * PI);
            let (x, y, t) = (r * th.cos(), r * th.sin(), rng.gen_range(-2.0..2.0));
            for a in 0..=deg {
                let moved = schrodinger_apply(h, &[x], &[y], t, &phi[a]).unwrap();
                for b in 0..=deg {
                    let oracle = moved.inner(&phi[b]);
                    let closed = entry_function(h, &MultiIndex(vec![a]), &MultiIndex(vec![b]), &[x, y], t).unwrap();
                    worst = worst.max((oracle - closed).norm());
                }
            }
        }
    }
    check(worst <= 1e-8, format!("max |E_ab − Schrödinger quadrature| = {worst:.3e} (tol 1e-8)"))
}

fn criterion_4() -> Outcome {
    let q = Quadrature::default();
    let h1 = HTypeStructure::heisenberg(1).unwrap();
    let basis = FockBasis::new(1, 12).unwrap();
    let (mut res, mut off) = (0.0f64, 0.0f64);
    for k in [1, 2] {
        let pair = CompatiblePair::along(&[1.0], k).unwrap();
        let nu = [0.6, 0.8];
        let a = multiplier_j_quadrature(&h1, &nu, &pair, &basis, &q).unwrap();
        let b = multiplier_j_spectral(&h1, &nu, &pair, &basis).unwrap();
        res = res.max((a.interior(6) - b.interior(6)).camax());
        off = off.max(a.off_block_mass(k));
    }
    let hq = HTypeStructure::quaternionic();
    let bq = FockBasis::new(2, 8).unwrap();
    let lambda = [0.3, -0.5, 0.8];
    let pair = CompatiblePair::along(&lambda, 1).unwrap();
    let nu = [0.1, -0.7, 0.5, 0.5];
    let n = vec_norm(&nu);
    let nu: Vec<f64> = nu.iter().map(|c| c / n).collect();
    let a = multiplier_j_quadrature(&hq, &nu, &pair, &bq, &q).unwrap();
    let b = multiplier_j_spectral(&hq, &nu, &pair, &bq).unwrap();
    let qres = (a.interior(6) - b.interior(6)).camax();
    let qoff = a.off_block_mass(1);
    let pass = res <= 1e-8 && qres <= 1e-8 && off <= 1e-10 && qoff <= 1e-10;
    check(pass, format!("H1 residual {res:.2e}, quaternionic {qres:.2e} (1e-8); off-block mass {:.2e} (1e-10)", off.max(qoff)))
}

fn criterion_5() -> Outcome {
    let q = Quadrature::default();
    // Monte Carlo against the closed form
    let mut mc_ok = true;
    let mut mc_worst = 0.0f64;
    for (s, lambda) in [(HTypeStructure::heisenberg(2).unwrap(), vec![1.0]), (HTypeStructure::quaternionic(), vec![0.0, 0.6, 0.8])] {
        let pair = CompatiblePair::along(&lambda, 1).unwrap();
        let basis = FockBasis::new(s.n, 5).unwrap();
        let exact = averaged_normal_exact(&s, &pair, &basis).unwrap();
        let mc = averaged_normal_mc(&s, &pair, &basis, 10_000, 12345, &q).unwrap();
        for l in 0..=4 {
            let r = basis.block(l);
            let diff = (mc.operator.entries.view((r.start, r.start), (r.len(), r.len())) - exact.operator.entries.view((r.start, r.start), (r.len(), r.len()))).norm();
            let sigma = mc.block_sigma(l);
            mc_worst = mc_worst.max(diff / sigma.max(1e-300));
            mc_ok &= diff <= 3.0 * sigma + 1e-14;
        }
    }
    // nonnegativity over a parameter grid
    let mut min_eig = f64::INFINITY;
    for n in 1..=3 {
        for k in -3..=3 {
            for i in 0..=40 {
                let w = 0.15 * i as f64;
                for v in averaged_normal_eigenvalues(n, k, w, 20) {
                    min_eig = min_eig.min(v);
                }
            }
        }
    }
    // the vanishing configuration
    let zero = averaged_normal_eigenvalues(1, 0, 2f64.sqrt(), 4)[1].abs();
    // single-term lower bound, n = 2
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lb_ok = true;
    for _ in 0..50 {
        let k: i64 = rng.gen_range(-3..=3);
        let w = rng.gen_range(0.05..4.0);
        let eigs = averaged_normal_eigenvalues(2, k, w, 8);
        for (l, v) in eigs.iter().enumerate() {
            let b = eigenvalue_lower_bound(2, l, k, w).unwrap();
            lb_ok &= b > 0.0 && *v >= b * (1.0 - 1e-12);
        }
    }
    let pass = mc_ok && min_eig >= 0.0 && zero <= 1e-12 && lb_ok;
    check(
        pass,
        format!("MC max |error|/σ = {mc_worst:.2} (≤ 3); min exact eigenvalue {min_eig:.2e} (≥ 0); n=1,k=0,|w|²=2 degree-1 eigenvalue {zero:.2e} (1e-12); n=2 lower bound {}", if lb_ok { "holds" } else { "violated" }),
    )
}

fn criterion_6() -> Outcome {
    let h1 = HTypeStructure::heisenberg(1).unwrap();
    let f = TestFunction::gaussian(1, 1);
    let basis = FockBasis::new(1, 12).unwrap();
    let q = Quadrature::default();
    let nu = [0.6, 0.8];
    let (mut base, mut fine) = (0.0f64, 0.0f64);
    for k in [1, 2] {
        let pair = CompatiblePair::along(&[1.0], k).unwrap();
        base = base.max(slice_verify(&h1, &f, &nu, &pair, &basis, 8, &q).unwrap().residual);
        fine = fine.max(slice_verify(&h1, &f, &nu, &pair, &basis, 8, &q.refined()).unwrap().residual);
    }
    let scalar = scalar_slice_verify(&h1, &f, &nu, &[1.0], &[0.7, -0.3], &q).unwrap().residual;

    let hq = HTypeStructure::quaternionic();
    let fq = TestFunction::gaussian(2, 3);
    let qq = Quadrature { tail_tol: 1e-8, grid_step: 0.7, central_step: 1.0, central_nodes: 10, period_nodes: 32, ..Quadrature::default() };
    let bq = FockBasis::new(2, 4).unwrap();
    let pair = CompatiblePair::along(&[0.0, 0.0, 1.0], 1).unwrap();
    let t = Instant::now();
    let quat = slice_verify(&hq, &fq, &[0.5, 0.5, 0.5, 0.5], &pair, &bq, 2, &qq).unwrap().residual;
    let pass = base <= 1e-3 && fine <= 1e-4 && scalar <= 1e-6 && quat <= 1e-2;
    check(
        pass,
        format!(
            "H1 residual {base:.2e} (1e-3), doubled quadrature {fine:.2e} (1e-4); scalar {scalar:.2e} (1e-6); quaternionic {quat:.2e} (1e-2, {:.0}s)",
            t.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_7() -> Outcome {
    let h1 = HTypeStructure::heisenberg(1).unwrap();
    let cfg = InjectivityConfig {
        f: TestFunction::gaussian(1, 1),
        pairs: vec![CompatiblePair::along(&[1.0], 1).unwrap()],
        nu_count: 8,
        seed: 7,
        l_max: 8,
        compare_degree: 4,
        tol: 1e-10,
        quadrature: Quadrature::default(),
    };
    let rep = injectivity_experiment(&h1, &cfg).unwrap();

    // n = 1, k = 0, |w|² = 2: synthetic multipliers, since k = 0 has no compatible μ ≠ 0
    let basis = FockBasis::new(1, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = htype_xray::fock::FockOperator::from_matrix(&basis, DMatrix::from_fn(basis.len(), basis.len(), |_, _| Complex64::new(rng.gen(), rng.gen()))).unwrap();
    let js: Vec<_> = (0..8)
        .map(|j| multiplier_from_w(&basis, 0, &[Complex64::from_polar(2f64.sqrt(), 0.7 * j as f64)]).unwrap())
        .collect();
    let ys: Vec<_> = js.iter().map(|j| j.compose(&x)).collect();
    let rec = recover_from_multipliers(&js, &ys, 0, 1e-10).unwrap();
    let flagged = rec.unrecoverable();
    let witness_ok = flagged.contains(&1) && rec.witness.map(|w| w.0) == Some(1);
    let pass = rep.max_error <= 1e-2 && rep.max_null_norm <= 1e-8 && witness_ok;
    check(
        pass,
        format!("recovery error {:.2e} (1e-2); null {:.2e} (1e-8); k=0 unrecoverable degrees {flagged:?}, witness {:?}", rep.max_error, rep.max_null_norm, rec.witness),
    )
}

fn criterion_8() -> Outcome {
    let q = Quadrature::default();
    let h1 = HTypeStructure::heisenberg(1).unwrap();
    let f = TestFunction::gaussian(1, 1);
    let nu = [0.6, 0.8];
    let points = vec![GroupPoint::from_slices(&[0.3, -0.2], &[0.1]), GroupPoint::from_slices(&[-0.5, 0.4], &[-0.7]), GroupPoint::from_slices(&[0.0, 0.0], &[0.0])];
    let mut homog = 0.0f64;
    for eps in [1.0 / 3.0, 2.0] {
        homog = homog.max(homogeneity_check(&h1, &f, &nu, &[1.0], eps, &points, &q).unwrap());
    }
    let b1 = FockBasis::new(1, 6).unwrap();
    let dil_h1 = [0.5, 2.0].iter().map(|&e| dilation_lemma_check(&h1, &f, &[1.3], e, &b1, &q).unwrap()).fold(0.0, f64::max);
    let hq = HTypeStructure::quaternionic();
    let fq = TestFunction::gaussian(2, 3);
    let bq = FockBasis::new(2, 4).unwrap();
    let dil_q = dilation_lemma_check(&hq, &fq, &[0.3, -0.4, 1.1], 2f64.sqrt(), &bq, &q).unwrap();

    // Poisson: the quotient transform of the periodisation equals ℱ(f) at compatible μ
    let mut poisson = 0.0f64;
    for k in [1, -1, 2] {
        let pair = CompatiblePair::along(&[1.0], k).unwrap();
        let per = Periodized { structure: &h1, f: &f, lambda: vec![1.0], q: q.clone() };
        let lhs = gft_quotient(&h1, &per, &pair, &b1, &q).unwrap();
        let rhs = gft(&h1, &f, &pair.mu, &b1, &q).unwrap();
        poisson = poisson.max((lhs.entries - rhs.entries).camax());
    }

    // L¹ bounds; the Gaussian is positive, so both bounds are attained
    let l1 = l1_norm(&f, &q);
    let line = l1_norm_line_transform(&h1, &f, &nu, &q).unwrap();
    let ratio_line = line / l1;
    let mut ratios = vec![ratio_line];
    for lam in [1.0, 0.5] {
        let g = XrayData::new(&h1, &f, &nu, &[lam], &q).unwrap();
        ratios.push(l1_norm_quotient(&g, &[lam], &q).unwrap() / (2.0 * PI / lam * l1));
    }
    let slack = ratios.iter().map(|r| r - 1.0).fold(f64::NEG_INFINITY, f64::max);
    let pass = homog <= 1e-9 && dil_h1 <= 1e-7 && dil_q <= 1e-6 && poisson <= 1e-7 && slack <= 1e-6;
    check(
        pass,
        format!(
            "homogeneity {homog:.2e} (1e-9); dilation H1 {dil_h1:.2e} (1e-7), quaternionic {dil_q:.2e} (1e-6); Poisson {poisson:.2e} (1e-7); L¹ ratios {ratios:.9?}, excess {slack:.2e} (1e-6)"
        ),
    )
}

fn criterion_9() -> Outcome {
    let h1 = HTypeStructure::heisenberg(1).unwrap();
    let mut radii = Vec::new();
    let mut exact = true;
    for r in [1.0, 2.0] {
        let grid = mu_grid_line(0.25, 40.0 * r * r);
        let rep = support_experiment(&h1, &SupportSpec::Shell { radius: r, eps: 0.5 }, &grid).unwrap();
        exact &= rep.radius.is_some() && rep.radius == rep.predicted_radius;
        radii.push((rep.radius.unwrap_or(f64::NAN), rep.predicted_radius.unwrap_or(f64::NAN), rep.coarse_bound.unwrap_or(f64::NAN)));
    }
    let scaling = radii[1].0 == 4.0 * radii[0].0;
    let hq = HTypeStructure::quaternionic();
    let grid = mu_grid_shells(3, &[0.3, 1.0, 2.5, 7.0, 20.0], 200, 9);
    let cov = charge_frequency_map(&hq, &ChargeSet::Sphere { radius: 1.0 }, &grid, false).unwrap();
    let full = cov.reachable_fraction();
    let pass = exact && scaling && full == 1.0;
    check(
        pass,
        format!(
            "shell radius R=1: {} (lattice {}), R=2: {} (lattice {}); coarse bounds {}, {}; R² scaling {}; m=3 sphere reachable fraction {full}",
            radii[0].0, radii[0].1, radii[1].0, radii[1].1, radii[0].2, radii[1].2, if scaling { "exact" } else { "broken" }
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 Clifford identity", criterion_1),
        ("2 geodesic suite", criterion_2),
        ("3 entry-function oracle", criterion_3),
        ("4 multiplier cross-validation", criterion_4),
        ("5 averaged normal operator", criterion_5),
        ("6 slice identity", criterion_6),
        ("7 reconstruction", criterion_7),
        ("8 lemmas", criterion_8),
        ("9 support maps", criterion_9),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let t = Instant::now();
        let o = run();
        println!("{} criterion {name}: {} [{:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, t.elapsed().as_secs_f64());
        if !o.pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
