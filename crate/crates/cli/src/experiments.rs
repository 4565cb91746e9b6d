//! One function per subcommand: numbers in, results + assertions + side files out.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use htype_xray::algebra::{vec_norm, GroupPoint, HTypeStructure};
use htype_xray::fock::{FockBasis, FockOperator};
use htype_xray::frequency::*;
use htype_xray::geodesics::{flow_origin, helical_shift, momentum_left, momentum_right, GeodesicSpec};
use htype_xray::io::{encode_operator, fmt_f64, operator_csv};
use htype_xray::reconstruct::*;
use htype_xray::testfn::TestFunction;
use htype_xray::transform::xray;
use htype_xray::Error;

use crate::config::*;
use crate::report::Assertion;

/// What a subcommand hands back to the report writer.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub assertions: Vec<Assertion>,
    /// (file name, contents), written next to the report.
    pub files: Vec<(String, String)>,
}

/// Failure before or during a run.
#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

pub fn numeric_reason(e: &Error) -> &'static str {
    match e {
        Error::Dimension { .. } => "numeric.dimension",
        Error::Invalid(_) => "numeric.invalid",
        Error::NotHType(_) => "numeric.not_htype",
        Error::Incompatible(_) => "numeric.incompatible",
        Error::Budget(_) => "numeric.budget",
        Error::FrameInconsistent(_) => "numeric.frame",
        Error::NotInvertible { .. } => "numeric.not_invertible",
        Error::Parse { .. } => "numeric.parse",
    }
}

fn cfg_err(field: &str, e: Error) -> Failure {
    Failure::Config(ConfigError { field: field.into(), msg: e.to_string() })
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = vec_norm(v);
    v.iter().map(|c| c / n).collect()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialise")
}

fn pair_from(block: &str, lambda: &[f64], mu: &Option<Vec<f64>>, k: Option<i64>) -> Result<CompatiblePair, Failure> {
    match (mu, k) {
        (Some(mu), _) => CompatiblePair::new(lambda, mu).map_err(|e| cfg_err(&format!("{block}.mu"), e)),
        (None, Some(k)) => CompatiblePair::along(lambda, k).map_err(|e| cfg_err(&format!("{block}.k"), e)),
        (None, None) => unreachable!("validated"),
    }
}

fn pair_json(p: &CompatiblePair) -> Value {
    json!({ "lambda": p.lambda, "mu": p.mu, "k": p.k, "orientation": format!("{:?}", p.orientation()).to_lowercase(), "w_norm": p.w_norm() })
}

fn matrix_files(stem: &str, op: &FockOperator, files: &mut Vec<(String, String)>) {
    files.push((format!("{stem}.fock"), encode_operator(op)));
    files.push((format!("{stem}.csv"), operator_csv(op)));
}

/// Eigenvalues of each diagonal block (l, l) of a Hermitian operator, ascending.
pub fn block_eigenvalues(op: &FockOperator) -> Vec<Vec<f64>> {
    (0..=op.basis.l_max)
        .map(|l| {
            let b = op.block(l, l);
            let h = (&b + b.adjoint()) * Complex64::new(0.5, 0.0);
            let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
            e.sort_by(f64::total_cmp);
            e
        })
        .collect()
}

pub fn selftest(s: &HTypeStructure, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let c = cfg.selftest.clone().unwrap_or_default();
    let q = &cfg.quadrature;
    let seed = cfg.run.seed;
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2 * s.n;

    let mut clifford = 0.0f64;
    for _ in 0..200 {
        let mu: Vec<f64> = (0..s.m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let n2 = mu.iter().map(|x| x * x).sum::<f64>();
        let j = s.j_map(&mu)?;
        let r = (&j * &j + DMatrix::<f64>::identity(d, d) * n2).norm() / n2;
        clifford = clifford.max(r);
    }
    out.assertions.push(Assertion::le("clifford_identity", clifford, c.tol, "selftest.tol"));

    let nu = unit(&(0..d).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
    let lambda: Vec<f64> = (0..s.m).map(|_| rng.gen_range(0.3..1.0)).collect();
    let (mut speed, mut helical, mut drift) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..=20 {
        let t = i as f64 * 0.5;
        let h = 1e-5;
        let a = flow_origin(s, &nu, &lambda, t - h)?;
        let b = flow_origin(s, &nu, &lambda, t + h)?;
        speed = speed.max((((&b.x - &a.x) / (2.0 * h)).norm() - 1.0).abs());
        let (l, r) = helical_shift(s, &nu, &lambda, t, 1)?;
        helical = helical.max(l.distance_sq(&r).sqrt() / (1.0 + r.u.norm() + r.x.norm()));
        let p = flow_origin(s, &nu, &lambda, t)?;
        let m = momentum_left(s, &p, &momentum_right(s, &nu, &lambda, t)?)?;
        drift = drift.max((m.nu - DVector::from_column_slice(&nu)).amax());
    }
    out.assertions.push(Assertion::le("geodesic_unit_speed", speed, c.speed_tol, "selftest.speed_tol"));
    out.assertions.push(Assertion::le("geodesic_helical_identity", helical, c.tol, "selftest.tol"));
    out.assertions.push(Assertion::le("momentum_drift", drift, c.tol, "selftest.tol"));

    let l_max = cfg.basis.l_max;
    let w: Vec<Complex64> = (0..s.n).map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))).collect();
    let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut avg = 0.0f64;
    for k in [-2i64, 0, 1, 3] {
        let closed = averaged_normal_eigenvalues(s.n, k, wn, l_max);
        let direct = averaged_normal_direct(s.n, k, &w, l_max)?;
        for (a, b) in closed.iter().zip(&direct) {
            avg = avg.max((a - b).abs() / (1.0 + b.abs()));
        }
    }
    out.assertions.push(Assertion::le("averaged_eigenvalues_closed_vs_direct", avg, c.tol, "selftest.tol"));

    let basis = FockBasis::new(s.n, l_max)?;
    let pair = CompatiblePair::along(&lambda, 1)?;
    let spectral = multiplier_j_spectral(s, &nu, &pair, &basis)?;
    let quad = multiplier_j_quadrature(s, &nu, &pair, &basis, q)?;
    let jdiff = (&spectral.entries - &quad.entries).camax();
    out.assertions.push(Assertion::le("multiplier_spectral_vs_quadrature", jdiff, c.tol, "selftest.tol"));

    let mut recon_err = f64::NAN;
    let js: Vec<FockOperator> = (0..3 * s.n + 3)
        .map(|_| {
            let w: Vec<Complex64> = (0..s.n).map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))).collect();
            multiplier_from_w(&basis, 1, &w)
        })
        .collect::<htype_xray::Result<_>>()?;
    let x = FockOperator::from_matrix(&basis, DMatrix::from_fn(basis.len(), basis.len(), |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))?;
    let ys: Vec<FockOperator> = js.iter().map(|j| j.compose(&x)).collect();
    let interior = l_max.saturating_sub(2);
    if let Ok(rec) = recover_from_multipliers(&js, &ys, 1, 1e-12) {
        recon_err = interior_error(&rec.operator, &x, interior);
    }
    out.assertions.push(Assertion::le("synthetic_recovery", recon_err, c.slice_tol, "selftest.slice_tol"));

    let f = cfg.function(s);
    let slice_interior = l_max.saturating_sub(4);
    let rep = slice_verify(s, &f, &nu, &pair, &basis, slice_interior, q)?;
    out.assertions.push(Assertion::le("slice_residual", rep.residual, c.slice_tol, "selftest.slice_tol"));

    out.results = json!({
        "structure": { "n": s.n, "m": s.m },
        "nu": nu,
        "lambda": lambda,
        "pair": pair_json(&pair),
        "w_norm": wn,
        "clifford_max_relative": clifford,
        "speed_error": speed,
        "helical_error": helical,
        "momentum_drift": drift,
        "averaged_eigenvalue_error": avg,
        "multiplier_difference": jdiff,
        "recovery_error": recon_err,
        "slice_residual": rep.residual,
        "slice_interior": slice_interior,
    });
    if cfg.output.emit_matrices {
        matrix_files("slice_lhs", &rep.lhs, &mut out.files);
        matrix_files("slice_rhs", &rep.rhs, &mut out.files);
    }
    Ok(out)
}

pub fn geodesic(s: &HTypeStructure, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let c = cfg.geodesic.as_ref().expect("checked by caller");
    let nu = unit(&c.nu);
    let base = GroupPoint::from_slices(c.base_x.as_deref().unwrap_or(&vec![0.0; 2 * s.n]), c.base_u.as_deref().unwrap_or(&vec![0.0; s.m]));
    let spec = GeodesicSpec::new(s, base, DVector::from_column_slice(&nu), DVector::from_column_slice(&c.lambda))?;
    let step = (c.s_max - c.s_min) / (c.samples - 1) as f64;
    let ts: Vec<f64> = (0..c.samples).map(|i| c.s_min + i as f64 * step).collect();
    let lam_norm = vec_norm(&c.lambda);

    let rows: Vec<(GroupPoint, f64, f64, f64)> = ts
        .par_iter()
        .map(|&t| -> htype_xray::Result<_> {
            let p = spec.point(s, t)?;
            let h = 1e-5;
            let a = spec.point(s, t - h)?;
            let b = spec.point(s, t + h)?;
            let speed = (((&b.x - &a.x) / (2.0 * h)).norm() - 1.0).abs();
            let helical = if lam_norm > 0.0 {
                let (l, r) = helical_shift(s, &nu, &c.lambda, t, 1)?;
                l.distance_sq(&r).sqrt() / (1.0 + r.x.norm() + r.u.norm())
            } else {
                0.0
            };
            let o = flow_origin(s, &nu, &c.lambda, t)?;
            let m = momentum_left(s, &o, &momentum_right(s, &nu, &c.lambda, t)?)?;
            let drift = (m.nu - DVector::from_column_slice(&nu)).amax();
            Ok((p, speed, helical, drift))
        })
        .collect::<htype_xray::Result<_>>()?;

    let mut csv = String::from("s");
    for i in 0..2 * s.n {
        csv.push_str(&format!(",x{}", i + 1));
    }
    for i in 0..s.m {
        csv.push_str(&format!(",u{}", i + 1));
    }
    csv.push('\n');
    for (t, (p, ..)) in ts.iter().zip(&rows) {
        csv.push_str(&fmt_f64(*t));
        for v in p.x.iter().chain(p.u.iter()) {
            csv.push(',');
            csv.push_str(&fmt_f64(*v));
        }
        csv.push('\n');
    }
    let speed = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let helical = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let drift = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let mut out = Outcome::default();
    out.assertions.push(Assertion::le("unit_speed", speed, c.speed_tol, "geodesic.speed_tol"));
    if lam_norm > 0.0 {
        out.assertions.push(Assertion::le("helical_identity", helical, c.helical_tol, "geodesic.helical_tol"));
    }
    out.assertions.push(Assertion::le("momentum_drift", drift, c.drift_tol, "geodesic.drift_tol"));
    let last = &rows.last().expect("at least two samples").0;
    out.results = json!({
        "nu": nu,
        "lambda": c.lambda,
        "samples": c.samples,
        "central_period": if lam_norm > 0.0 { Some(std::f64::consts::PI / (lam_norm * lam_norm)) } else { None },
        "horizontal_period": if lam_norm > 0.0 { Some(2.0 * std::f64::consts::PI / lam_norm) } else { None },
        "speed_error": speed,
        "helical_error": helical,
        "momentum_drift": drift,
        "end_point": { "x": last.x.as_slice(), "u": last.u.as_slice() },
        "trajectory": "geodesic.csv",
    });
    out.files.push(("geodesic.csv".into(), csv));
    Ok(out)
}

pub fn xray_cmd(s: &HTypeStructure, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let c = cfg.xray.as_ref().expect("checked by caller");
    let f = cfg.function(s);
    let q = &cfg.quadrature;
    let fine = q.refined();
    let nu = unit(&c.nu);
    let vals: Vec<Value> = c
        .points
        .par_iter()
        .map(|p| -> Result<Value, Failure> {
            let spec = GeodesicSpec::new(s, GroupPoint::from_slices(&p.x, &p.u), DVector::from_column_slice(&nu), DVector::from_column_slice(&c.lambda))?;
            let a = xray(s, &f, &spec, q)?;
            let b = xray(s, &f, &spec, &fine)?;
            Ok(json!({
                "x": p.x, "u": p.u,
                "value": [a.value.re, a.value.im],
                "refined": [b.value.re, b.value.im],
                "refinement_change": (a.value - b.value).norm(),
                "tail_bound": a.tail_bound,
                "nodes": a.nodes,
            }))
        })
        .collect::<Result<_, _>>()?;
    let worst = vals.iter().map(|v| v["refinement_change"].as_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let mut out = Outcome::default();
    out.assertions.push(Assertion::le("refinement_change", worst, c.refine_tol, "xray.refine_tol"));
    if cfg.output.emit_matrices {
        let mut csv = String::from("point,re,im,tail_bound\n");
        for (i, v) in vals.iter().enumerate() {
            let re = v["value"][0].as_f64().unwrap_or(f64::NAN);
            let im = v["value"][1].as_f64().unwrap_or(f64::NAN);
            csv.push_str(&format!("{i},{},{},{}\n", fmt_f64(re), fmt_f64(im), fmt_f64(v["tail_bound"].as_f64().unwrap_or(f64::NAN))));
        }
        out.files.push(("xray.csv".into(), csv));
    }
    out.results = json!({ "nu": nu, "lambda": c.lambda, "points": vals, "max_refinement_change": worst });
    Ok(out)
}

pub fn spectrum(s: &HTypeStructure, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let c = cfg.spectrum.as_ref().expect("checked by caller");
    let basis = FockBasis::new(s.n, cfg.basis.l_max)?;
    let q = &cfg.quadrature;
    let mut out = Outcome::default();
    let mut results = serde_json::Map::new();
    let (eigs, op, mode): (Vec<Vec<f64>>, FockOperator, &str) = match &c.lambda {
        None => {
            let k = c.k.expect("validated");
            let w = c.w_norm.unwrap_or_else(|| c.w_norm_sq.map(f64::sqrt).unwrap_or(0.0));
            results.insert("k".into(), json!(k));
            results.insert("w_norm".into(), json!(w));
            let e = averaged_normal_eigenvalues(s.n, k, w, basis.l_max);
            let rep = report_from_eigenvalues(&basis, k, e.clone());
            (e.into_iter().map(|v| vec![v]).collect(), rep.operator, "formula")
        }
        Some(lambda) => {
            let pair = pair_from("spectrum", lambda, &c.mu, c.k)?;
            results.insert("pair".into(), pair_json(&pair));
            match &c.nu {
                Some(nu) => {
                    let nu = unit(nu);
                    let j = multiplier_j(s, &nu, &pair, &basis, q)?;
                    results.insert("nu".into(), json!(nu));
                    results.insert("multiplier_off_block_mass".into(), json!(j.off_block_mass(pair.k.abs())));
                    if cfg.output.emit_matrices {
                        matrix_files("multiplier", &j, &mut out.files);
                    }
                    let n = normal_op(&j);
                    (block_eigenvalues(&n), n, "single_direction")
                }
                None => {
                    let rep = averaged_normal_exact(s, &pair, &basis)?;
                    if c.mc_samples > 0 {
                        let mc = averaged_normal_mc(s, &pair, &basis, c.mc_samples, cfg.run.seed, q)?;
                        let mut worst = 0.0f64;
                        let mut per: Vec<f64> = Vec::new();
                        // 𝒥 maps degree l to l + |k|, so higher blocks are truncated
                        let top = basis.l_max.saturating_sub(pair.k.unsigned_abs() as usize);
                        for l in 0..=top {
                            let diff = (mc.operator.block(l, l) - rep.operator.block(l, l)).norm();
                            let sigma = mc.block_sigma(l);
                            let r = if sigma > 0.0 {
                                diff / sigma
                            } else if diff < 1e-12 {
                                0.0
                            } else {
                                f64::INFINITY
                            };
                            per.push(r);
                            worst = worst.max(r);
                        }
                        results.insert("mc_samples".into(), json!(c.mc_samples));
                        results.insert("mc_error_over_sigma".into(), json!(per));
                        out.assertions.push(Assertion::le("mc_error_over_sigma", worst, c.mc_sigma_tol, "spectrum.mc_sigma_tol"));
                    }
                    let e = rep.eigenvalues.clone();
                    (e.into_iter().map(|v| vec![v]).collect(), rep.operator, "averaged")
                }
            }
        }
    };
    let mins: Vec<f64> = eigs.iter().map(|b| b.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    let cert = invertibility_certificate(&mins, c.tol);
    results.insert("mode".into(), json!(mode));
    results.insert("l_max".into(), json!(basis.l_max));
    results.insert("eigenvalues".into(), json!(eigs.iter().enumerate().map(|(l, e)| json!({ "degree": l, "values": e })).collect::<Vec<_>>()));
    results.insert("min_eigenvalue".into(), json!(cert.min_eigenvalue));
    results.insert("invertible".into(), json!(cert.invertible));
    results.insert("witness".into(), json!({ "degree": cert.witness_degree, "eigenvalue": cert.min_eigenvalue }));
    if let Some(expect) = c.expect_invertible {
        out.assertions.push(Assertion::flag("invertibility_flag", cert.invertible, expect, "spectrum.expect_invertible"));
    }
    if cfg.output.emit_matrices {
        matrix_files("normal", &op, &mut out.files);
    }
    out.results = Value::Object(results);
    Ok(out)
}

pub fn verify_slice(s: &HTypeStructure, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let c = cfg.slice.as_ref().expect("checked by caller");
    let basis = FockBasis::new(s.n, cfg.basis.l_max)?;
    let q = &cfg.quadrature;
    let f = cfg.function(s);
    let pair = pair_from("slice", &c.lambda, &c.mu, c.k)?;
    let nus: Vec<Vec<f64>> = match &c.nus {
        Some(v) => v.iter().map(|x| unit(x)).collect(),
        None => sample_nus(s, &c.lambda, c.nu_count, cfg.run.seed)?,
    };
    let reps = nus
        .par_iter()
        .map(|nu| slice_verify(s, &f, nu, &pair, &basis, c.interior, q))
        .collect::<htype_xray::Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    let worst = reps.iter().map(|r| r.residual).fold(0.0, f64::max);
    out.assertions.push(Assertion::le("slice_residual", worst, c.tol, "slice.tol"));
    let mut results = json!({
        "pair": pair_json(&pair),
        "interior": c.interior,
        "residuals": nus.iter().zip(&reps).map(|(nu, r)| json!({ "nu": nu, "residual": r.residual, "rhs_norm": r.rhs.frobenius() })).collect::<Vec<_>>(),
        "max_residual": worst,
    });
    if let Some(eta) = &c.eta {
        let sc = scalar_slice_verify(s, &f, &nus[0], &c.lambda, eta, q)?;
        out.assertions.push(Assertion::le("scalar_slice_residual", sc.residual, c.tol, "slice.tol"));
        results["scalar"] = json!({ "eta": eta, "lhs": [sc.lhs.re, sc.lhs.im], "rhs": [sc.rhs.re, sc.rhs.im], "residual": sc.residual });
    }
    if cfg.output.emit_matrices {
        for (i, r) in reps.iter().enumerate() {
            matrix_files(&format!("slice_lhs_{i}"), &r.lhs, &mut out.files);
            matrix_files(&format!("slice_rhs_{i}"), &r.rhs, &mut out.files);
        }
    }
    out.results = results;
    Ok(out)
}

pub fn reconstruct(s: &HTypeStructure, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let c = cfg.reconstruct.as_ref().expect("checked by caller");
    let basis = FockBasis::new(s.n, cfg.basis.l_max)?;
    let q = &cfg.quadrature;
    let f = cfg.function(s);
    let pairs: Vec<CompatiblePair> = if c.pairs.is_empty() {
        lattice_pairs(&c.charges, c.radius.expect("validated"), c.odd_only.unwrap_or(false)).map_err(|e| cfg_err("reconstruct.charges", e))?
    } else {
        c.pairs
            .iter()
            .enumerate()
            .map(|(i, p)| CompatiblePair::new(&p.lambda, &p.mu).map_err(|e| cfg_err(&format!("reconstruct.pairs[{i}]"), e)))
            .collect::<Result<_, _>>()?
    };
    if pairs.is_empty() {
        return Err(Failure::Config(ConfigError { field: "reconstruct.radius".into(), msg: "no lattice pair lies within the radius".into() }));
    }
    let data = build_dataset(s, &f, &pairs, c.nu_count, cfg.run.seed, &basis, q)?;
    let zero = TestFunction::zero(s.n, s.m);
    let null = build_dataset(s, &zero, &pairs, c.nu_count, cfg.run.seed, &basis, q)?;
    let per: Vec<(Value, f64, f64, FockOperator)> = pairs
        .par_iter()
        .map(|pair| -> htype_xray::Result<_> {
            let rec = recover_block(s, &data, pair, c.clip_tol, c.method, q)?;
            let truth = gft(s, &f, &pair.mu, &basis, q)?;
            let rec0 = recover_block(s, &null, pair, c.clip_tol, c.method, q)?;
            let err = interior_error(&rec.operator, &truth, c.compare_degree);
            let null_norm = rec0.operator.interior(c.compare_degree).norm();
            let v = json!({
                "pair": pair_json(pair),
                "error": err,
                "null_norm": null_norm,
                "unrecoverable": rec.unrecoverable(),
                "witness": rec.witness.map(|(d, e)| json!({ "degree": d, "eigenvalue": e })),
                "blocks": to_value(&rec.blocks),
            });
            Ok((v, err, null_norm, rec.operator))
        })
        .collect::<htype_xray::Result<_>>()?;
    let max_error = per.iter().map(|p| p.1).fold(0.0, f64::max);
    let max_null = per.iter().map(|p| p.2).fold(0.0, f64::max);
    let mut out = Outcome::default();
    out.assertions.push(Assertion::le("recovery_error", max_error, c.error_tol, "reconstruct.error_tol"));
    out.assertions.push(Assertion::le("null_recovery", max_null, c.null_tol, "reconstruct.null_tol"));
    if cfg.output.emit_matrices {
        for (i, p) in per.iter().enumerate() {
            matrix_files(&format!("recovered_{i}"), &p.3, &mut out.files);
        }
    }
    out.results = json!({
        "method": to_value(&c.method),
        "nu_count": c.nu_count,
        "compare_degree": c.compare_degree,
        "per_mu": per.iter().map(|p| p.0.clone()).collect::<Vec<_>>(),
        "max_error": max_error,
        "max_null_norm": max_null,
    });
    Ok(out)
}

pub fn support_map(s: &HTypeStructure, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let c = cfg.support.as_ref().expect("checked by caller");
    let grid = match &c.grid {
        GridConfig::Line { step, max } => mu_grid_line(*step, *max),
        GridConfig::Shells { radii, directions } => mu_grid_shells(s.m, radii, *directions, cfg.run.seed),
    };
    let rep = support_experiment(s, &c.spec, &grid)?;
    let fraction = rep.map.reachable_fraction();
    let mut out = Outcome::default();
    let radius = rep.radius.unwrap_or(f64::NAN);
    if let (Some(pred), Some(coarse)) = (rep.predicted_radius, rep.coarse_bound) {
        out.assertions.push(Assertion::new("radius_matches_prediction", radius, crate::report::Comparison::Eq, pred, "support.spec"));
        out.assertions.push(Assertion::le("radius_within_coarse_bound", radius, coarse, "support.spec"));
    }
    if let Some(min) = c.min_fraction {
        out.assertions.push(Assertion::new("reachable_fraction", fraction, crate::report::Comparison::Ge, min, "support.min_fraction"));
    }
    if cfg.output.emit_matrices {
        let mut csv = String::new();
        for i in 0..s.m {
            csv.push_str(&format!("mu{},", i + 1));
        }
        csv.push_str("norm,reachable,k");
        for i in 0..s.m {
            csv.push_str(&format!(",lambda{}", i + 1));
        }
        csv.push('\n');
        for ((mu, r), w) in rep.map.grid.iter().zip(&rep.map.reachable).zip(&rep.map.witnesses) {
            for v in mu {
                csv.push_str(&fmt_f64(*v));
                csv.push(',');
            }
            csv.push_str(&format!("{},{}", fmt_f64(vec_norm(mu)), *r as u8));
            match w {
                Some((lam, k)) => {
                    csv.push_str(&format!(",{k}"));
                    for v in lam {
                        csv.push(',');
                        csv.push_str(&fmt_f64(*v));
                    }
                }
                None => {
                    csv.push(',');
                    csv.push_str(&",".repeat(s.m));
                }
            }
            csv.push('\n');
        }
        out.files.push(("coverage.csv".into(), csv));
    }
    out.results = json!({
        "spec": to_value(&c.spec),
        "grid_points": grid.len(),
        "reachable_points": rep.map.reachable.iter().filter(|r| **r).count(),
        "reachable_fraction": fraction,
        "radius": rep.radius,
        "predicted_radius": rep.predicted_radius,
        "coarse_bound": rep.coarse_bound,
        "constant": rep.constant,
    });
    Ok(out)
}
