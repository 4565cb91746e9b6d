//! Group Fourier transforms on G and G_λ, the compatibility relation μ·λ = 2k|λ|³, and the
//! multipliers of the slice identity: the Bessel symbol, 𝒥_{ν,λ}(μ), its normal operator and
//! the U(λ)-average of that normal operator.
//!
//! Operators follow the `FockOperator` convention entries[(β, α)] = ⟨A ω_α, ω_β⟩, so
//! ℱ(f)(μ) = ∫ f(g) π_μ(g)^* dg has entries ∫ f(g) conj(π_μ(g)[α, β]) dg.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::algebra::{dot, vec_norm, GroupPoint, HTypeStructure};
use crate::error::{check_dim, Error, Result};
use crate::fock::{complexify, degree_dim, entry_product, realify, FockBasis, FockOperator, RepFrame};
use crate::geodesics::Helix;
use crate::quadrature::{ball_grid, gauss_hermite_tensor, Quadrature};
use crate::special::{bessel_j0, binomial, laguerre_all, ln_factorial};
use crate::testfn::{GroupFunction, TestFunction};
use crate::transform::complement_basis;

/// Relative tolerance on the distance of μ·λ/(2|λ|³) to the nearest integer.
pub const COMPAT_TOL: f64 = 1e-9;

const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatiblePair {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub k: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Parallel,
    Antiparallel,
    General,
}

impl CompatiblePair {
    pub fn new(lambda: &[f64], mu: &[f64]) -> Result<Self> {
        check_dim("mu", lambda.len(), mu.len())?;
        if vec_norm(lambda) == 0.0 || vec_norm(mu) == 0.0 {
            return Err(Error::Invalid("compatible pairs need λ, μ ≠ 0".into()));
        }
        let k = compatible(lambda, mu, COMPAT_TOL)
            .ok_or_else(|| Error::Incompatible(format!("μ·λ/(2|λ|³) = {} is not an integer", dot(mu, lambda) / (2.0 * vec_norm(lambda).powi(3)))))?;
        Ok(Self { lambda: lambda.to_vec(), mu: mu.to_vec(), k })
    }

    /// μ = 2k|λ|λ, the pair on the line through λ.
    pub fn along(lambda: &[f64], k: i64) -> Result<Self> {
        let l = vec_norm(lambda);
        if k == 0 || l == 0.0 {
            return Err(Error::Invalid("μ = 2k|λ|λ needs k ≠ 0 and λ ≠ 0".into()));
        }
        let mu: Vec<f64> = lambda.iter().map(|c| 2.0 * k as f64 * l * c).collect();
        Ok(Self { lambda: lambda.to_vec(), mu, k })
    }

    pub fn lambda_norm(&self) -> f64 {
        vec_norm(&self.lambda)
    }

    pub fn mu_norm(&self) -> f64 {
        vec_norm(&self.mu)
    }

    pub fn orientation(&self) -> Orientation {
        let (l, m) = (self.lambda_norm(), self.mu_norm());
        let c = dot(&self.lambda, &self.mu) / (l * m);
        if (1.0 - c).abs() < 1e-12 {
            Orientation::Parallel
        } else if (1.0 + c).abs() < 1e-12 {
            Orientation::Antiparallel
        } else {
            Orientation::General
        }
    }

    /// |w| = √|μ|/|λ| for unit ν.
    pub fn w_norm(&self) -> f64 {
        self.mu_norm().sqrt() / self.lambda_norm()
    }
}

/// k with |μ·λ − 2k|λ|³| ≤ tol·|λ|³, if any.
pub fn compatible(lambda: &[f64], mu: &[f64], tol: f64) -> Option<i64> {
    let l = vec_norm(lambda);
    if l == 0.0 || vec_norm(mu) == 0.0 || lambda.len() != mu.len() {
        return None;
    }
    let q = dot(mu, lambda) / (2.0 * l.powi(3));
    let k = q.round();
    ((q - k).abs() * 2.0 <= tol).then_some(k as i64)
}

/// Compatible μ with |μ| ≤ radius: the planes μ·λ̂ = 2k|λ|², sampled on a transverse grid of
/// spacing `step` (m > 1). μ = 0 is excluded.
pub fn lattice_dual(lambda: &[f64], radius: f64, step: f64) -> Result<Vec<CompatiblePair>> {
    let l = vec_norm(lambda);
    if l == 0.0 {
        return Err(Error::Invalid("lattice_dual needs λ ≠ 0".into()));
    }
    if !(step > 0.0) {
        return Err(Error::Invalid("lattice_dual needs a positive transverse step".into()));
    }
    let lhat: Vec<f64> = lambda.iter().map(|c| c / l).collect();
    let perp = complement_basis(&lhat);
    let spacing = 2.0 * l * l;
    let kmax = (radius / spacing + 1e-12).floor() as i64;
    let mut out = Vec::new();
    for k in -kmax..=kmax {
        let h = k as f64 * spacing;
        let r2 = radius * radius - h * h;
        if r2 < 0.0 {
            continue;
        }
        for c in ball_grid(&vec![0.0; perp.len()], r2.max(0.0).sqrt(), step) {
            let mu: Vec<f64> = (0..lambda.len()).map(|i| h * lhat[i] + perp.iter().zip(&c).map(|(b, t)| t * b[i]).sum::<f64>()).collect();
            if vec_norm(&mu) < 1e-12 {
                continue;
            }
            let kk = compatible(lambda, &mu, COMPAT_TOL).expect("constructed on a compatible plane");
            out.push(CompatiblePair { lambda: lambda.to_vec(), mu, k: kk });
        }
    }
    Ok(out)
}

/// (λ̂, μ_⊥, 2k) with everything rescaled to |λ| = 1 by the dilation μ ↦ μ/|λ|².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCoords {
    pub lambda_hat: Vec<f64>,
    pub mu_perp: Vec<f64>,
    pub two_k: i64,
    /// |λ|, kept so the pair can be rebuilt.
    pub scale: f64,
}

pub fn relation_coords(pair: &CompatiblePair) -> RelationCoords {
    let l = pair.lambda_norm();
    let lhat: Vec<f64> = pair.lambda.iter().map(|c| c / l).collect();
    let along = dot(&pair.mu, &lhat);
    let mu_perp = pair.mu.iter().zip(&lhat).map(|(m, h)| (m - along * h) / (l * l)).collect();
    RelationCoords { lambda_hat: lhat, mu_perp, two_k: 2 * pair.k, scale: l }
}

impl RelationCoords {
    pub fn to_pair(&self) -> CompatiblePair {
        let s = self.scale;
        let lambda = self.lambda_hat.iter().map(|c| c * s).collect();
        let mu = self.mu_perp.iter().zip(&self.lambda_hat).map(|(p, h)| s * s * (p + self.two_k as f64 * h)).collect();
        CompatiblePair { lambda, mu, k: self.two_k / 2 }
    }
}

fn add_scaled_adjoint(acc: &mut DMatrix<Complex64>, m: &DMatrix<Complex64>, c: Complex64) {
    let n = m.nrows();
    for a in 0..n {
        for b in 0..n {
            acc[(b, a)] += c * m[(a, b)].conj();
        }
    }
}

fn sum_in_order(parts: Vec<DMatrix<Complex64>>, n: usize) -> DMatrix<Complex64> {
    parts.into_iter().fold(DMatrix::zeros(n, n), |acc, p| acc + p)
}

/// ℱ(f)(μ): the closed-form central factor times a Gauss–Hermite rule per horizontal term.
pub fn gft(s: &HTypeStructure, f: &TestFunction, mu: &[f64], basis: &FockBasis, q: &Quadrature) -> Result<FockOperator> {
    f.validate(s)?;
    check_dim("basis n", s.n, basis.n)?;
    let frame = RepFrame::new(s, mu)?;
    let chat = f.central_fourier(mu);
    let d = 2 * s.n;
    let order = q.gh_order_for(basis.l_max);
    let rule = gauss_hermite_tensor(d, order);
    if (rule.len() * f.horizontal.len()) as u64 > q.max_evals {
        return Err(Error::Budget(format!("{} Gauss–Hermite nodes exceed the budget {}", rule.len() * f.horizontal.len(), q.max_evals)));
    }
    let nb = basis.len();
    let mut total = DMatrix::zeros(nb, nb);
    for term in &f.horizontal {
        // e^{−a|x−x₀|²} e^{−|μ||x|²/4} = const · e^{−A|x−c|²}
        let big_a = term.a + frame.mu_norm / 4.0;
        let center: Vec<f64> = term.center.iter().map(|c| term.a * c / big_a).collect();
        let scale = big_a.powf(-(d as f64) / 2.0);
        let parts: Vec<DMatrix<Complex64>> = rule
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = DMatrix::zeros(nb, nb);
                let mut x = vec![0.0; d];
                for (t, w) in chunk {
                    for i in 0..d {
                        x[i] = center[i] + t[i] / big_a.sqrt();
                    }
                    let h = term.eval(&x);
                    if h == Complex64::default() {
                        continue;
                    }
                    let m = frame.matrix(basis, &GroupPoint::from_slices(&x, &vec![0.0; s.m]));
                    add_scaled_adjoint(&mut acc, &m, h * (w * scale));
                }
                acc
            })
            .collect();
        total += sum_in_order(parts, nb);
    }
    FockOperator::from_matrix(basis, total * chat)
}

/// Fourier transform of f₀ = ∫ f du at η: Ĥ(η)·Ĉ(0).
pub fn gft_scalar(f: &TestFunction, eta: &[f64]) -> Complex64 {
    let m = f.central.first().map_or(0, |t| t.center.len());
    f.horizontal_fourier(eta) * f.central_fourier(&vec![0.0; m])
}

/// Fibre rule over the centre of G_λ: one period π|λ|^{-2} along λ̂, a trapezoid ball across.
struct FiberRule {
    period: f64,
    lhat: Vec<f64>,
    perp: Vec<Vec<f64>>,
    c_perp: Vec<f64>,
}

impl FiberRule {
    fn new(lambda: &[f64], u_center: &[f64]) -> Result<Self> {
        let l = vec_norm(lambda);
        if l == 0.0 {
            return Err(Error::Invalid("the quotient G_λ needs λ ≠ 0".into()));
        }
        let lhat: Vec<f64> = lambda.iter().map(|c| c / l).collect();
        let perp = complement_basis(&lhat);
        let c_perp = perp.iter().map(|b| dot(b, u_center)).collect();
        Ok(Self { period: PI / (l * l), lhat, perp, c_perp })
    }

    fn points(&self, radius: f64, q: &Quadrature) -> (Vec<Vec<f64>>, f64) {
        let m = self.lhat.len();
        let n = q.central_nodes;
        let across = ball_grid(&self.c_perp, radius, q.central_step);
        let mut us = Vec::with_capacity(n * across.len());
        for j in 0..n {
            let t = self.period * j as f64 / n as f64;
            for v in &across {
                us.push((0..m).map(|i| t * self.lhat[i] + self.perp.iter().zip(v).map(|(b, c)| c * b[i]).sum::<f64>()).collect());
            }
        }
        (us, self.period / n as f64 * q.central_step.powi(self.perp.len() as i32))
    }
}

/// x ↦ ∫_{fibre} g(x, u) e^{−iμ·u} du over a ball grid in x, reduced through `reduce`.
fn quotient_sweep<G, R>(g: &G, lambda: &[f64], mu: &[f64], q: &Quadrature, nb: usize, reduce: R) -> Result<DMatrix<Complex64>>
where
    G: GroupFunction + ?Sized,
    R: Fn(&[f64], Complex64, &mut DMatrix<Complex64>) + Sync,
{
    let sup = g.support(q.tail_tol);
    let fiber = FiberRule::new(lambda, &sup.u_center)?;
    let xs = ball_grid(&sup.x_center, sup.x_radius, q.grid_step);
    let (probe, _) = fiber.points(g.central_radius_at(&sup.x_center, q.tail_tol), q);
    if (xs.len() as u64).saturating_mul(probe.len() as u64) > q.max_evals {
        return Err(Error::Budget(format!("{} × {} quotient nodes exceed the budget {}", xs.len(), probe.len(), q.max_evals)));
    }
    let wx = q.grid_step.powi(sup.x_center.len() as i32);
    let parts: Vec<DMatrix<Complex64>> = xs
        .par_chunks(CHUNK.min(8))
        .map(|chunk| {
            let mut acc = DMatrix::zeros(nb, nb);
            for x in chunk {
                let (us, wu) = fiber.points(g.central_radius_at(x, q.tail_tol), q);
                let vals = g.eval_u_batch(x, &us);
                let mut fib = Complex64::new(0.0, 0.0);
                for (u, v) in us.iter().zip(&vals) {
                    if *v != Complex64::default() {
                        fib += v * Complex64::from_polar(1.0, -dot(mu, u));
                    }
                }
                if fib != Complex64::default() {
                    reduce(x, fib * (wu * wx), &mut acc);
                }
            }
            acc
        })
        .collect();
    Ok(sum_in_order(parts, nb))
}

/// ℱ_λ(g)(π_μ) = ∫_{G_λ} g π_μ^* for Γ_λ-periodic g.
pub fn gft_quotient<G: GroupFunction + ?Sized>(s: &HTypeStructure, g: &G, pair: &CompatiblePair, basis: &FockBasis, q: &Quadrature) -> Result<FockOperator> {
    check_dim("basis n", s.n, basis.n)?;
    if compatible(&pair.lambda, &pair.mu, COMPAT_TOL) != Some(pair.k) {
        return Err(Error::Incompatible("μ is not in Γ_λ^* with the stated k".into()));
    }
    let frame = RepFrame::new(s, &pair.mu)?;
    let zeros = vec![0.0; s.m];
    let m = quotient_sweep(g, &pair.lambda, &pair.mu, q, basis.len(), |x, c, acc| {
        let rep = frame.matrix(basis, &GroupPoint::from_slices(x, &zeros));
        add_scaled_adjoint(acc, &rep, c);
    })?;
    FockOperator::from_matrix(basis, m)
}

/// ℱ_λ(g)(π_{(η,0)}) = ∫_{G_λ} g(x, u) e^{−i⟨η, x⟩}.
pub fn gft_quotient_scalar<G: GroupFunction + ?Sized>(g: &G, lambda: &[f64], eta: &[f64], q: &Quadrature) -> Result<Complex64> {
    let m = quotient_sweep(g, lambda, &vec![0.0; lambda.len()], q, 1, |x, c, acc| {
        acc[(0, 0)] += c * Complex64::from_polar(1.0, -dot(eta, x));
    })?;
    Ok(m[(0, 0)])
}

/// 2π|λ|^{-1} J₀(|Pr η|/|λ|) with Pr the projection onto span(ν, J_λ̂ν).
pub fn bessel_multiplier(s: &HTypeStructure, nu: &[f64], lambda: &[f64], eta: &[f64]) -> Result<f64> {
    check_dim("eta", 2 * s.n, eta.len())?;
    let h = Helix::new(s, nu, lambda)?;
    let (a, b) = (dot(eta, &h.nu), dot(eta, &h.jnu));
    Ok(2.0 * PI / h.lnorm * bessel_j0((a * a + b * b).sqrt() / h.lnorm))
}

fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn check_pair(s: &HTypeStructure, nu: &[f64], pair: &CompatiblePair) -> Result<()> {
    check_dim("nu", 2 * s.n, nu.len())?;
    check_dim("lambda", s.m, pair.lambda.len())?;
    if (vec_norm(nu) - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("|ν| = {} is not 1", vec_norm(nu))));
    }
    match compatible(&pair.lambda, &pair.mu, COMPAT_TOL) {
        Some(k) if k == pair.k => Ok(()),
        _ => Err(Error::Incompatible("(λ, μ) is not a compatible pair with the stated k".into())),
    }
}

/// 𝒥_{ν,λ}(μ) = (1/2π)∫₀^{2π} e^{ikσ} π_μ(γ_{ν,λ}(σ/|λ|)_x, 0) dσ, periodic trapezoid rule.
pub fn multiplier_j_quadrature(s: &HTypeStructure, nu: &[f64], pair: &CompatiblePair, basis: &FockBasis, q: &Quadrature) -> Result<FockOperator> {
    check_pair(s, nu, pair)?;
    check_dim("basis n", s.n, basis.n)?;
    let helix = Helix::new(s, nu, &pair.lambda)?;
    let frame = RepFrame::new(s, &pair.mu)?;
    let n = q.loop_nodes;
    let zeros = vec![0.0; s.m];
    let parts: Vec<DMatrix<Complex64>> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut x = vec![0.0; 2 * s.n];
            let mut acc = DMatrix::zeros(basis.len(), basis.len());
            for &j in chunk {
                let sigma = 2.0 * PI * j as f64 / n as f64;
                helix.x_at(sigma / helix.lnorm, &mut x);
                acc += frame.matrix(basis, &GroupPoint::from_slices(&x, &zeros)) * Complex64::from_polar(1.0 / n as f64, pair.k as f64 * sigma);
            }
            acc
        })
        .collect();
    FockOperator::from_matrix(basis, sum_in_order(parts, basis.len()))
}

/// entry (β, α) = i^k E_{αβ}(w) 𝟙[|β| = |α| + |k|].
pub fn multiplier_from_w(basis: &FockBasis, k: i64, w: &[Complex64]) -> Result<FockOperator> {
    check_dim("w", basis.n, w.len())?;
    let ik = i_pow(k);
    let kk = k.unsigned_abs() as usize;
    let idx = basis.indices();
    let mut m = DMatrix::zeros(basis.len(), basis.len());
    for (c, a) in idx.iter().enumerate() {
        let target = a.degree() + kk;
        if target > basis.l_max {
            continue;
        }
        for r in basis.block(target) {
            m[(r, c)] = ik * entry_product(a, &idx[r], w);
        }
    }
    FockOperator::from_matrix(basis, m)
}

/// Closed form of 𝒥 for μ ∥ ±λ. Parallel: w = √|μ| R_λᵗν/|λ| (R_μ = R_λ, so 𝒰_{μλ} = I);
/// antiparallel: the same with R_μ in place of R_λ and |k| in the grading.
pub fn multiplier_j_spectral(s: &HTypeStructure, nu: &[f64], pair: &CompatiblePair, basis: &FockBasis) -> Result<FockOperator> {
    check_pair(s, nu, pair)?;
    check_dim("basis n", s.n, basis.n)?;
    let frame = match pair.orientation() {
        Orientation::Parallel => s.rotation_frame(&pair.lambda)?,
        Orientation::Antiparallel => s.rotation_frame(&pair.mu)?,
        Orientation::General => {
            return Err(Error::Incompatible("closed-form 𝒥 needs μ parallel or antiparallel to λ; use the quadrature form".into()))
        }
    };
    let scale = pair.mu_norm().sqrt() / pair.lambda_norm();
    let y: Vec<f64> = (frame.transpose() * DVector::from_column_slice(nu)).iter().map(|c| c * scale).collect();
    multiplier_from_w(basis, pair.k, &complexify(&y))
}

/// 𝒥*𝒥.
pub fn normal_op(j: &FockOperator) -> FockOperator {
    j.adjoint().compose(j)
}

/// 𝒥 by the closed form when available, otherwise by quadrature.
pub fn multiplier_j(s: &HTypeStructure, nu: &[f64], pair: &CompatiblePair, basis: &FockBasis, q: &Quadrature) -> Result<FockOperator> {
    match pair.orientation() {
        Orientation::General => multiplier_j_quadrature(s, nu, pair, basis, q),
        _ => multiplier_j_spectral(s, nu, pair, basis),
    }
}

/// Eigenvalue of 𝒩_λ(μ) on ℰ_l, l = 0..=l_max, with x = |w|²/2:
/// d_l^{-1} Σ_p C(l−p+n−2, n−2) p!/(p+k)! x^k L_p^{(k)}(x)² e^{−x}.
pub fn averaged_normal_eigenvalues(n: usize, k: i64, w_norm: f64, l_max: usize) -> Vec<f64> {
    let kk = k.unsigned_abs() as usize;
    let x = w_norm * w_norm / 2.0;
    let lag = laguerre_all(l_max, kk as f64, x);
    let term: Vec<f64> = (0..=l_max)
        .map(|p| {
            let lnm = ln_factorial(p) - ln_factorial(p + kk) + if kk > 0 { kk as f64 * x.ln() } else { 0.0 } - x;
            if x == 0.0 && kk > 0 {
                0.0
            } else {
                lnm.exp() * lag[p] * lag[p]
            }
        })
        .collect();
    (0..=l_max)
        .map(|l| {
            let sum: f64 = (0..=l)
                .map(|p| {
                    let mult = if n == 1 { f64::from(u8::from(p == l)) } else { binomial(l - p + n - 2, n - 2) };
                    mult * term[p]
                })
                .sum();
            sum / degree_dim(n, l)
        })
        .collect()
}

/// The same eigenvalues by direct summation d_l^{-1} Σ |E_{γτ}(w)|² over |γ| = l, |τ| = l+|k|.
pub fn averaged_normal_direct(n: usize, k: i64, w: &[Complex64], l_max: usize) -> Result<Vec<f64>> {
    check_dim("w", n, w.len())?;
    let kk = k.unsigned_abs() as usize;
    let basis = FockBasis::new(n, l_max + kk)?;
    let idx = basis.indices();
    Ok((0..=l_max)
        .map(|l| {
            let mut s = 0.0;
            for g in basis.block(l) {
                for t in basis.block(l + kk) {
                    s += entry_product(&idx[g], &idx[t], w).norm_sqr();
                }
            }
            s / degree_dim(n, l)
        })
        .collect())
}

/// d_l^{-1} C(l+n−2, l)/k! · x^k e^{−x}: the p = 0 term of the eigenvalue sum.
pub fn eigenvalue_lower_bound(n: usize, l: usize, k: i64, w_norm: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Invalid("the single-term lower bound needs n > 1".into()));
    }
    let kk = k.unsigned_abs() as usize;
    let x = w_norm * w_norm / 2.0;
    let pow = if kk == 0 { 1.0 } else { x.powi(kk as i32) };
    Ok(binomial(l + n - 2, l) / degree_dim(n, l) * pow * (-x - ln_factorial(kk)).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub invertible: bool,
    pub min_eigenvalue: f64,
    pub witness_degree: usize,
}

pub fn invertibility_certificate(eigenvalues: &[f64], tol: f64) -> Certificate {
    let (deg, min) = eigenvalues.iter().copied().enumerate().fold((0, f64::INFINITY), |(d, m), (i, v)| if v < m { (i, v) } else { (d, m) });
    Certificate { invertible: min > tol, min_eigenvalue: min, witness_degree: deg }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierReport {
    pub operator: FockOperator,
    pub k: i64,
    /// Degree map verified: l → l for normal operators, l → l+k for 𝒥.
    pub block_map_ok: bool,
    pub eigenvalues: Vec<f64>,
    pub condition: Vec<f64>,
}

/// 𝒩_λ(μ) by its spectral decomposition: a multiple of the identity on every ℰ_l.
pub fn averaged_normal_exact(s: &HTypeStructure, pair: &CompatiblePair, basis: &FockBasis) -> Result<MultiplierReport> {
    check_dim("lambda", s.m, pair.lambda.len())?;
    check_dim("basis n", s.n, basis.n)?;
    if compatible(&pair.lambda, &pair.mu, COMPAT_TOL) != Some(pair.k) {
        return Err(Error::Incompatible("(λ, μ) is not a compatible pair with the stated k".into()));
    }
    if pair.orientation() == Orientation::General {
        return Err(Error::Incompatible("the closed-form average needs μ parallel or antiparallel to λ".into()));
    }
    Ok(report_from_eigenvalues(basis, pair.k, averaged_normal_eigenvalues(s.n, pair.k, pair.w_norm(), basis.l_max)))
}

pub fn report_from_eigenvalues(basis: &FockBasis, k: i64, eigenvalues: Vec<f64>) -> MultiplierReport {
    let mut m = DMatrix::zeros(basis.len(), basis.len());
    for i in 0..basis.len() {
        m[(i, i)] = Complex64::new(eigenvalues[basis.degree_of(i)], 0.0);
    }
    let operator = FockOperator { basis: basis.clone(), entries: m };
    let block_map_ok = operator.off_block_mass(0) <= 1e-10;
    MultiplierReport { operator, k, block_map_ok, condition: vec![1.0; eigenvalues.len()], eigenvalues }
}

/// Haar-distributed U(n): Ginibre matrix, QR, phases of diag(R) moved into Q.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct McAverage {
    pub operator: FockOperator,
    /// Per-entry sample variance E|X − X̄|² (unbiased).
    pub variance: DMatrix<f64>,
    pub samples: usize,
}

impl McAverage {
    /// √(Σ_entries Var / N) over the (l, l) block: the Frobenius standard error.
    pub fn block_sigma(&self, l: usize) -> f64 {
        let r = self.operator.basis.block(l);
        let mut s = 0.0;
        for i in r.clone() {
            for j in r.clone() {
                s += self.variance[(i, j)];
            }
        }
        (s / self.samples as f64).sqrt()
    }
}

/// ν = R_λ·(U e₁) with U Haar in U(n): a Haar sample of the U(λ)-orbit of R_λ e₁.
pub fn sample_orbit_nus(s: &HTypeStructure, lambda: &[f64], count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let r = s.rotation_frame(lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let u = haar_unitary(s.n, &mut rng);
            let col: Vec<Complex64> = u.column(0).iter().copied().collect();
            (&r * DVector::from_vec(realify(&col))).as_slice().to_vec()
        })
        .collect())
}

/// Monte-Carlo average of 𝒩 over Haar-random ν; deterministic for a given seed and
/// independent of the thread count (fixed chunking, ordered reduction).
pub fn averaged_normal_mc(s: &HTypeStructure, pair: &CompatiblePair, basis: &FockBasis, samples: usize, seed: u64, q: &Quadrature) -> Result<McAverage> {
    if samples == 0 {
        return Err(Error::Invalid("Monte-Carlo average needs at least one sample".into()));
    }
    let nus = sample_orbit_nus(s, &pair.lambda, samples, seed)?;
    let nb = basis.len();
    let parts: Vec<Result<(DMatrix<Complex64>, DMatrix<f64>)>> = nus
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut sum = DMatrix::zeros(nb, nb);
            let mut sq = DMatrix::zeros(nb, nb);
            for nu in chunk {
                let n = normal_op(&multiplier_j(s, nu, pair, basis, q)?).entries;
                sq += n.map(|z| z.norm_sqr());
                sum += n;
            }
            Ok((sum, sq))
        })
        .collect();
    let mut sum = DMatrix::zeros(nb, nb);
    let mut sq = DMatrix::zeros(nb, nb);
    for p in parts {
        let (a, b) = p?;
        sum += a;
        sq += b;
    }
    let nf = samples as f64;
    let mean = sum / Complex64::new(nf, 0.0);
    let variance = if samples > 1 {
        DMatrix::from_fn(nb, nb, |i, j| ((sq[(i, j)] / nf - mean[(i, j)].norm_sqr()) * nf / (nf - 1.0)).max(0.0))
    } else {
        DMatrix::zeros(nb, nb)
    };
    Ok(McAverage { operator: FockOperator::from_matrix(basis, mean)?, variance, samples })
}

/// max |gft(δ_ε^* f)(μ) − ε^{−Q} gft(f)(μ/ε²)|, Q the homogeneous dimension.
pub fn dilation_lemma_check(s: &HTypeStructure, f: &TestFunction, mu: &[f64], eps: f64, basis: &FockBasis, q: &Quadrature) -> Result<f64> {
    let lhs = gft(s, &f.dilate(eps)?, mu, basis, q)?;
    let mu_e: Vec<f64> = mu.iter().map(|c| c / (eps * eps)).collect();
    let rhs = gft(s, f, &mu_e, basis, q)?;
    let qd = s.homogeneous_dim() as i32;
    Ok((lhs.entries - rhs.entries * Complex64::new(eps.powi(-qd), 0.0)).camax())
}

/// max |κ̂_{ν,λ}(μ) − ε κ̂_{ν,ελ}(ε²μ)| with κ̂ = 2π|λ|^{-1}𝒥.
pub fn symbol_homogeneity_check(s: &HTypeStructure, nu: &[f64], pair: &CompatiblePair, eps: f64, basis: &FockBasis, q: &Quadrature) -> Result<f64> {
    let kappa = |p: &CompatiblePair| -> Result<DMatrix<Complex64>> {
        Ok(multiplier_j_quadrature(s, nu, p, basis, q)?.entries * Complex64::new(2.0 * PI / p.lambda_norm(), 0.0))
    };
    let scaled = CompatiblePair {
        lambda: pair.lambda.iter().map(|c| c * eps).collect(),
        mu: pair.mu.iter().map(|c| c * eps * eps).collect(),
        k: pair.k,
    };
    Ok((kappa(pair)? - kappa(&scaled)? * Complex64::new(eps, 0.0)).camax())
}

/// ‖f‖²_{L²(G)} = ‖H‖² ‖C‖² by trapezoid rules on the support balls.
pub fn l2_norm_sq(f: &TestFunction, q: &Quadrature) -> f64 {
    let sup = f.support(q.tail_tol);
    let h = q.grid_step / 2.0;
    let xs = ball_grid(&sup.x_center, sup.x_radius, h);
    let us = ball_grid(&sup.u_center, sup.u_radius, h);
    let hx: f64 = xs.iter().map(|x| f.horizontal_at(x).norm_sqr()).sum::<f64>() * h.powi(sup.x_center.len() as i32);
    let cu: f64 = us.iter().map(|u| f.central_at(u).norm_sqr()).sum::<f64>() * h.powi(sup.u_center.len() as i32);
    hx * cu
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlancherelFit {
    /// ‖f‖² / ∫‖ℱ(f)(μ)‖²_HS |μ|^n dμ.
    pub c0: f64,
    /// (2π)^{−(n+m)}.
    pub theory: f64,
    pub l2_sq: f64,
    pub spectral_integral: f64,
}

/// ∫ ‖ℱ(f)(μ)‖²_HS |μ|^n dμ over 0 < |μ| ≤ mu_max (m = 1), trapezoid in μ.
pub fn plancherel_integral(s: &HTypeStructure, f: &TestFunction, basis: &FockBasis, mu_max: f64, mu_step: f64, q: &Quadrature) -> Result<f64> {
    if s.m != 1 {
        return Err(Error::Invalid("Plancherel calibration is implemented for one-dimensional centres".into()));
    }
    let steps = (mu_max / mu_step).round() as i64;
    let mut total = 0.0;
    for j in -steps..=steps {
        if j == 0 {
            continue;
        }
        let mu = j as f64 * mu_step;
        let fr = gft(s, f, &[mu], basis, q)?.frobenius();
        total += fr * fr * mu.abs().powi(s.n as i32) * mu_step;
    }
    Ok(total)
}

pub fn plancherel_calibrate(s: &HTypeStructure, f: &TestFunction, basis: &FockBasis, mu_max: f64, mu_step: f64, q: &Quadrature) -> Result<PlancherelFit> {
    let spectral_integral = plancherel_integral(s, f, basis, mu_max, mu_step, q)?;
    let l2_sq = l2_norm_sq(f, q);
    Ok(PlancherelFit {
        c0: l2_sq / spectral_integral,
        theory: (2.0 * PI).powi(-((s.n + s.m) as i32)),
        l2_sq,
        spectral_integral,
    })
}
