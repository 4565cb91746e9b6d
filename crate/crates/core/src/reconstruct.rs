//! End-to-end slice verification, block recovery of ℱ(f)(μ) from X-ray data, and the
//! charge/frequency coverage experiments.
//!
//! The slice left-hand side never touches the multiplier code: it integrates the X-ray
//! output over G_λ against conjugated representation matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::algebra::{dot, vec_norm, HTypeStructure};
use crate::error::{check_dim, Error, Result};
use crate::fock::{realify, FockBasis, FockOperator};
use crate::frequency::{
    averaged_normal_eigenvalues, bessel_multiplier, compatible, gft, gft_quotient, gft_quotient_scalar, gft_scalar, multiplier_j, CompatiblePair,
    Orientation, COMPAT_TOL,
};
use crate::quadrature::Quadrature;
use crate::testfn::TestFunction;
use crate::transform::{complement_basis, XrayData};

#[derive(Debug, Clone, PartialEq)]
pub struct SliceReport {
    pub lhs: FockOperator,
    pub rhs: FockOperator,
    /// Degrees ≤ this enter the residual.
    pub interior: usize,
    /// ‖(LHS − RHS)_int‖_F / ‖RHS_int‖_F (absolute when RHS vanishes).
    pub residual: f64,
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// ℱ_λ(I_{ν,λ} f)(π_μ) by direct quadrature over G_λ.
pub fn slice_lhs(s: &HTypeStructure, f: &TestFunction, nu: &[f64], pair: &CompatiblePair, basis: &FockBasis, q: &Quadrature) -> Result<FockOperator> {
    f.validate(s)?;
    let g = XrayData::new(s, f, nu, &pair.lambda, q)?;
    gft_quotient(s, &g, pair, basis, q)
}

/// 2π|λ|^{-1} 𝒥_{ν,λ}(μ) ℱ(f)(μ).
pub fn slice_rhs(s: &HTypeStructure, f: &TestFunction, nu: &[f64], pair: &CompatiblePair, basis: &FockBasis, q: &Quadrature) -> Result<FockOperator> {
    let j = multiplier_j(s, nu, pair, basis, q)?;
    let ff = gft(s, f, &pair.mu, basis, q)?;
    let mut out = j.compose(&ff);
    out.entries *= Complex64::new(2.0 * PI / pair.lambda_norm(), 0.0);
    Ok(out)
}

pub fn slice_verify(s: &HTypeStructure, f: &TestFunction, nu: &[f64], pair: &CompatiblePair, basis: &FockBasis, interior: usize, q: &Quadrature) -> Result<SliceReport> {
    let lhs = slice_lhs(s, f, nu, pair, basis, q)?;
    let rhs = slice_rhs(s, f, nu, pair, basis, q)?;
    let (li, ri) = (lhs.interior(interior), rhs.interior(interior));
    let residual = relative((li - &ri).norm(), ri.norm());
    Ok(SliceReport { lhs, rhs, interior, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarSliceReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// ℱ_λ(I_{ν,λ} f)(π_{(η,0)}) against 2π|λ|^{-1}J₀(·)·ℱ(f)(π_{(η,0)}).
pub fn scalar_slice_verify(s: &HTypeStructure, f: &TestFunction, nu: &[f64], lambda: &[f64], eta: &[f64], q: &Quadrature) -> Result<ScalarSliceReport> {
    f.validate(s)?;
    let g = XrayData::new(s, f, nu, lambda, q)?;
    let lhs = gft_quotient_scalar(&g, lambda, eta, q)?;
    let rhs = gft_scalar(f, eta) * bessel_multiplier(s, nu, lambda, eta)?;
    Ok(ScalarSliceReport { lhs, rhs, residual: relative((lhs - rhs).norm(), rhs.norm()) })
}

/// Canonical representatives of unit ν modulo the e^{sJ_λ}-orbit: Gaussian samples in the
/// R_λ-frame with the first complex coordinate rotated to be real and positive.
pub fn sample_nus(s: &HTypeStructure, lambda: &[f64], count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let r = s.rotation_frame(lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = s.n;
    Ok((0..count)
        .map(|_| {
            let mut c: Vec<Complex64> = (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect();
            let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let phase = if c[0].norm() > 0.0 { c[0].conj() / c[0].norm() } else { Complex64::new(1.0, 0.0) };
            for z in &mut c {
                *z = *z * phase / norm;
            }
            let v = &r * DVector::from_vec(realify(&c));
            let nv = v.norm();
            v.as_slice().iter().map(|x| x / nv).collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceSample {
    pub pair: CompatiblePair,
    pub nu: Vec<f64>,
    /// ℱ_λ(I_{ν,λ} f)(π_μ).
    pub data: FockOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceDataset {
    pub f: TestFunction,
    pub basis: FockBasis,
    pub samples: Vec<SliceSample>,
}

impl SliceDataset {
    /// Samples of `pair` (matched on λ and μ).
    pub fn for_pair<'a>(&'a self, pair: &'a CompatiblePair) -> impl Iterator<Item = &'a SliceSample> + 'a {
        self.samples.iter().filter(move |x| same_vec(&x.pair.lambda, &pair.lambda) && same_vec(&x.pair.mu, &pair.mu))
    }
}

fn same_vec(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
}

/// Quotient Fourier data of I_{ν,λ} f for every pair and `nu_count` sampled ν per λ.
pub fn build_dataset(s: &HTypeStructure, f: &TestFunction, pairs: &[CompatiblePair], nu_count: usize, seed: u64, basis: &FockBasis, q: &Quadrature) -> Result<SliceDataset> {
    f.validate(s)?;
    for p in pairs {
        if compatible(&p.lambda, &p.mu, COMPAT_TOL) != Some(p.k) {
            return Err(Error::Incompatible(format!("pair λ={:?}, μ={:?} is not compatible", p.lambda, p.mu)));
        }
    }
    let mut jobs = Vec::new();
    for p in pairs {
        for nu in sample_nus(s, &p.lambda, nu_count, seed)? {
            jobs.push((p.clone(), nu));
        }
    }
    let samples: Vec<Result<SliceSample>> = jobs
        .into_par_iter()
        .map(|(pair, nu)| {
            let data = slice_lhs(s, f, &nu, &pair, basis, q)?;
            Ok(SliceSample { pair, nu, data })
        })
        .collect();
    Ok(SliceDataset { f: f.clone(), basis: basis.clone(), samples: samples.into_iter().collect::<Result<_>>()? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecoveryMethod {
    LeastSquares,
    AveragedNormal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub degree: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub condition: f64,
    pub rank: usize,
    pub dim: usize,
    /// False when some eigenvalue fell below the clipping threshold.
    pub recoverable: bool,
    /// The target degree l + |k| lies outside the truncated basis.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub operator: FockOperator,
    pub blocks: Vec<BlockReport>,
    /// (degree, eigenvalue) of the worst non-truncated block.
    pub witness: Option<(usize, f64)>,
}

impl Recovery {
    pub fn unrecoverable(&self) -> Vec<usize> {
        self.blocks.iter().filter(|b| !b.truncated && !b.recoverable).map(|b| b.degree).collect()
    }
}

/// Least squares for X in {J_i X = Y_i}, degree block by degree block, with the normal
/// matrices inverted on eigenvalues above tol·(largest eigenvalue).
pub fn recover_from_multipliers(js: &[FockOperator], ys: &[FockOperator], k: i64, tol: f64) -> Result<Recovery> {
    if js.is_empty() || js.len() != ys.len() {
        return Err(Error::Invalid("recovery needs matching, non-empty multiplier and data lists".into()));
    }
    let basis = js[0].basis.clone();
    let nb = basis.len();
    let mut normal = DMatrix::<Complex64>::zeros(nb, nb);
    let mut rhs = DMatrix::<Complex64>::zeros(nb, nb);
    for (j, y) in js.iter().zip(ys) {
        let ja = j.entries.adjoint();
        normal += &ja * &j.entries;
        rhs += &ja * &y.entries;
    }
    solve_blocks(&basis, &normal, &rhs, k, tol, None)
}

fn solve_blocks(basis: &FockBasis, normal: &DMatrix<Complex64>, rhs: &DMatrix<Complex64>, k: i64, tol: f64, diag: Option<&[f64]>) -> Result<Recovery> {
    let nb = basis.len();
    let kk = k.unsigned_abs() as usize;
    let mut eig = Vec::new();
    for l in 0..=basis.l_max {
        let r = basis.block(l);
        let vals = match diag {
            Some(d) => (DVector::from_element(r.len(), d[l]), DMatrix::<Complex64>::identity(r.len(), r.len())),
            None => {
                let blk = normal.view((r.start, r.start), (r.len(), r.len())).into_owned();
                let herm = (&blk + blk.adjoint()) * Complex64::new(0.5, 0.0);
                let e = herm.symmetric_eigen();
                (e.eigenvalues, e.eigenvectors)
            }
        };
        eig.push(vals);
    }
    let global = eig.iter().flat_map(|(v, _)| v.iter().copied()).fold(0.0, f64::max);
    let cut = tol * global;
    let mut x = DMatrix::<Complex64>::zeros(nb, nb);
    let mut blocks = Vec::new();
    for (l, (vals, vecs)) in eig.iter().enumerate() {
        let r = basis.block(l);
        let truncated = l + kk > basis.l_max;
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = vals.iter().copied().fold(0.0, f64::max);
        let rank = vals.iter().filter(|&&v| v > cut).count();
        if !truncated {
            let b = rhs.view((r.start, 0), (r.len(), nb)).into_owned();
            let inv = DMatrix::from_fn(r.len(), r.len(), |i, j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, &v) in vals.iter().enumerate() {
                    if v > cut {
                        acc += vecs[(i, t)] * vecs[(j, t)].conj() / v;
                    }
                }
                acc
            });
            x.view_mut((r.start, 0), (r.len(), nb)).copy_from(&(inv * b));
        }
        blocks.push(BlockReport {
            degree: l,
            min_eigenvalue: min,
            max_eigenvalue: max,
            condition: if min > 0.0 { max / min } else { f64::INFINITY },
            rank,
            dim: r.len(),
            recoverable: rank == r.len(),
            truncated,
        });
    }
    let witness = blocks
        .iter()
        .filter(|b| !b.truncated)
        .min_by(|a, b| a.min_eigenvalue.total_cmp(&b.min_eigenvalue))
        .map(|b| (b.degree, b.min_eigenvalue));
    if blocks.iter().filter(|b| !b.truncated).all(|b| b.rank == 0) {
        let (degree, eigenvalue) = witness.unwrap_or((0, 0.0));
        return Err(Error::NotInvertible { degree, eigenvalue });
    }
    Ok(Recovery { operator: FockOperator::from_matrix(basis, x)?, blocks, witness })
}

/// ℱ(f)(μ) from the dataset's samples of `pair`.
pub fn recover_block(s: &HTypeStructure, data: &SliceDataset, pair: &CompatiblePair, tol: f64, method: RecoveryMethod, q: &Quadrature) -> Result<Recovery> {
    let basis = &data.basis;
    let samples: Vec<&SliceSample> = data.for_pair(pair).collect();
    if samples.is_empty() {
        return Err(Error::Invalid("no slice samples for the requested pair".into()));
    }
    let scale = Complex64::new(pair.lambda_norm() / (2.0 * PI), 0.0);
    let js: Vec<FockOperator> = samples.par_iter().map(|x| multiplier_j(s, &x.nu, pair, basis, q)).collect::<Result<_>>()?;
    let ys: Vec<FockOperator> = samples
        .iter()
        .map(|x| FockOperator { basis: basis.clone(), entries: &x.data.entries * scale })
        .collect();
    match method {
        RecoveryMethod::LeastSquares => recover_from_multipliers(&js, &ys, pair.k, tol),
        RecoveryMethod::AveragedNormal => {
            if pair.orientation() == Orientation::General {
                return Err(Error::Incompatible("the averaged-normal path needs μ parallel or antiparallel to λ".into()));
            }
            let nb = basis.len();
            let mut rhs = DMatrix::<Complex64>::zeros(nb, nb);
            for (j, y) in js.iter().zip(&ys) {
                rhs += j.entries.adjoint() * &y.entries;
            }
            rhs /= Complex64::new(js.len() as f64, 0.0);
            let eig = averaged_normal_eigenvalues(s.n, pair.k, pair.w_norm(), basis.l_max);
            solve_blocks(basis, &DMatrix::zeros(nb, nb), &rhs, pair.k, tol, Some(&eig))
        }
    }
}

/// ‖A − B‖_F / ‖B‖_F over rows and columns of degree ≤ l.
pub fn interior_error(a: &FockOperator, b: &FockOperator, l: usize) -> f64 {
    let (ai, bi) = (a.interior(l), b.interior(l));
    relative((ai - &bi).norm(), bi.norm())
}

/// Charge sets Z ⊂ 𝔷* \ {0}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChargeSet {
    Points { charges: Vec<Vec<f64>> },
    /// {|λ| = radius}, m > 1.
    Sphere { radius: f64 },
    /// {|λ| ∈ [radius, radius(1+eps)]}, m = 1.
    Shell { radius: f64, eps: f64 },
    /// {|λ| = |λ₀|, |λ − λ₀| < eps|λ₀|}.
    Cap { center: Vec<f64>, eps: f64 },
}

const MEMBER_TOL: f64 = 1e-12;

impl ChargeSet {
    pub fn validate(&self, m: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::Invalid(msg.to_string()));
        match self {
            Self::Points { charges } => {
                if charges.is_empty() {
                    return bad("charge set is empty");
                }
                for c in charges {
                    check_dim("charge", m, c.len())?;
                    if vec_norm(c) == 0.0 {
                        return bad("charges must be nonzero");
                    }
                }
            }
            Self::Sphere { radius } => {
                if !(*radius > 0.0) || m < 2 {
                    return bad("sphere charge sets need radius > 0 and dim 𝔷 > 1");
                }
            }
            Self::Shell { radius, eps } => {
                if !(*radius > 0.0) || !(*eps > 0.0) || m != 1 {
                    return bad("shell charge sets need radius, eps > 0 and dim 𝔷 = 1");
                }
            }
            Self::Cap { center, eps } => {
                check_dim("cap centre", m, center.len())?;
                if vec_norm(center) == 0.0 || !(*eps > 0.0) || m < 2 {
                    return bad("cap charge sets need a nonzero centre, eps > 0 and dim 𝔷 > 1");
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, lambda: &[f64]) -> bool {
        let l = vec_norm(lambda);
        match self {
            Self::Points { charges } => charges.iter().any(|c| same_vec(c, lambda)),
            Self::Sphere { radius } => (l - radius).abs() <= MEMBER_TOL * radius,
            Self::Shell { radius, eps } => l >= radius * (1.0 - MEMBER_TOL) && l <= radius * (1.0 + eps) * (1.0 + MEMBER_TOL),
            Self::Cap { center, eps } => {
                let r = vec_norm(center);
                let d: f64 = lambda.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                (l - r).abs() <= MEMBER_TOL * r && d < eps * r
            }
        }
    }

    /// Some λ ∈ Z compatible with μ (odd k only when `odd_only`), with its k.
    pub fn witness(&self, mu: &[f64], odd_only: bool) -> Option<(Vec<f64>, i64)> {
        let mn = vec_norm(mu);
        if mn == 0.0 {
            return None;
        }
        let accept = |lam: Vec<f64>| -> Option<(Vec<f64>, i64)> {
            let k = compatible(&lam, mu, COMPAT_TOL)?;
            (self.contains(&lam) && (!odd_only || k % 2 != 0)).then_some((lam, k))
        };
        match self {
            Self::Points { charges } => charges.iter().find_map(|c| accept(c.clone())),
            Self::Sphere { radius } => {
                if odd_only {
                    return None;
                }
                let mhat: Vec<f64> = mu.iter().map(|c| c / mn).collect();
                let e = complement_basis(&mhat).into_iter().next()?;
                accept(e.iter().map(|c| c * radius).collect())
            }
            Self::Shell { radius, eps } => {
                // μ = 2kλ|λ| with k > 0 and λ of the sign of μ
                let lo = (mn / (2.0 * (radius * (1.0 + eps)).powi(2)) * (1.0 - 1e-12)).ceil().max(1.0) as i64;
                let hi = (mn / (2.0 * radius * radius) * (1.0 + 1e-12)).floor() as i64;
                (lo..=hi).filter(|k| !odd_only || k % 2 != 0).find_map(|k| {
                    let l = (mn / (2.0 * k as f64)).sqrt();
                    accept(vec![l * mu[0].signum()])
                })
            }
            Self::Cap { center, eps } => {
                let r = vec_norm(center);
                let c0: Vec<f64> = center.iter().map(|c| c / r).collect();
                let mhat: Vec<f64> = mu.iter().map(|c| c / mn).collect();
                let cphi = dot(&mhat, &c0).clamp(-1.0, 1.0);
                let phi = cphi.acos();
                let rho = 2.0 * (eps / 2.0).min(1.0).asin();
                // unit e ⊥ μ̂ in the plane of μ̂ and λ̂₀, oriented towards λ̂₀
                let mut e: Vec<f64> = c0.iter().zip(&mhat).map(|(a, b)| a - cphi * b).collect();
                let en = vec_norm(&e);
                if en > 1e-12 {
                    e.iter_mut().for_each(|v| *v /= en);
                } else {
                    e = complement_basis(&mhat).into_iter().next()?;
                }
                let (tlo, thi) = ((phi - rho).max(0.0), (phi + rho).min(PI));
                let (plo, phi_max) = (r * mn * thi.cos(), r * mn * tlo.cos());
                let unit = 2.0 * r.powi(3);
                let klo = (plo / unit).ceil() as i64;
                let khi = (phi_max / unit).floor() as i64;
                (klo..=khi).filter(|k| !odd_only || k % 2 != 0).find_map(|k| {
                    let theta = (k as f64 * unit / (r * mn)).clamp(-1.0, 1.0).acos();
                    let lam: Vec<f64> = mhat.iter().zip(&e).map(|(a, b)| r * (theta.cos() * a + theta.sin() * b)).collect();
                    accept(lam)
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageMap {
    pub grid: Vec<Vec<f64>>,
    pub reachable: Vec<bool>,
    /// Witness (λ, k) per reachable grid point.
    pub witnesses: Vec<Option<(Vec<f64>, i64)>>,
    /// Smallest grid radius r with every grid μ, |μ| ≥ r, reachable; None if the
    /// unreachable points run to the edge of the grid.
    pub unreachable_radius: Option<f64>,
}

impl CoverageMap {
    pub fn reachable_fraction(&self) -> f64 {
        let total = self.grid.iter().filter(|m| vec_norm(m) > 0.0).count();
        self.reachable.iter().filter(|&&r| r).count() as f64 / total.max(1) as f64
    }
}

/// Marks each grid μ reachable iff some λ ∈ Z is compatible with it.
pub fn charge_frequency_map(s: &HTypeStructure, z: &ChargeSet, grid: &[Vec<f64>], odd_only: bool) -> Result<CoverageMap> {
    z.validate(s.m)?;
    for mu in grid {
        check_dim("grid point", s.m, mu.len())?;
    }
    let witnesses: Vec<Option<(Vec<f64>, i64)>> = grid.par_iter().map(|mu| z.witness(mu, odd_only)).collect();
    let reachable: Vec<bool> = witnesses.iter().map(|w| w.is_some()).collect();
    let radii: Vec<f64> = grid.iter().map(|m| vec_norm(m)).collect();
    let worst = grid.iter().zip(&reachable).zip(&radii).filter(|((_, &r), &n)| !r && n > 0.0).map(|(_, &n)| n).fold(0.0, f64::max);
    let unreachable_radius = if worst == 0.0 {
        Some(0.0)
    } else {
        radii.iter().zip(&reachable).filter(|(&n, &r)| r && n > worst).map(|(&n, _)| n).reduce(f64::min)
    };
    Ok(CoverageMap { grid: grid.to_vec(), reachable, witnesses, unreachable_radius })
}

/// Lattice-aligned grid {j·step : 0 < |j|·step ≤ max} on the line.
pub fn mu_grid_line(step: f64, max: f64) -> Vec<Vec<f64>> {
    let n = (max / step + 1e-9).floor() as i64;
    (-n..=n).filter(|&j| j != 0).map(|j| vec![j as f64 * step]).collect()
}

/// Radial shells × sphere directions in ℝ^m (Fibonacci points for m = 3).
pub fn mu_grid_shells(m: usize, radii: &[f64], directions: usize, seed: u64) -> Vec<Vec<f64>> {
    let dirs: Vec<Vec<f64>> = match m {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..directions).map(|i| {
            let t = 2.0 * PI * i as f64 / directions as f64;
            vec![t.cos(), t.sin()]
        }).collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..directions)
                .map(|i| {
                    let y = 1.0 - 2.0 * (i as f64 + 0.5) / directions as f64;
                    let r = (1.0 - y * y).sqrt();
                    let t = golden * i as f64;
                    vec![r * t.cos(), y, r * t.sin()]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..directions)
                .map(|_| {
                    let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = vec_norm(&v);
                    v.iter().map(|c| c / n).collect()
                })
                .collect()
        }
    };
    radii.iter().flat_map(|&r| dirs.iter().map(move |d| d.iter().map(|c| c * r).collect())).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportSpec {
    Shell { radius: f64, eps: f64 },
    Cap { center: Vec<f64>, eps: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub map: CoverageMap,
    pub radius: Option<f64>,
    /// radius / R².
    pub constant: Option<f64>,
    /// Shell only: 2R²k₁ with k₁ the least admissible k whose interval chain has no gaps.
    pub predicted_radius: Option<f64>,
    /// Shell only: the looser 2R²k₀, k₀ the least admissible integer ≥ 2/ε (odd case).
    pub coarse_bound: Option<f64>,
}

/// Least admissible k (odd when `odd_only`) with (k + step)/k ≤ (1+ε)².
pub fn shell_chain_start(eps: f64, odd_only: bool) -> i64 {
    let step = if odd_only { 2.0 } else { 1.0 };
    let need = step / ((1.0 + eps).powi(2) - 1.0);
    let mut k = need.ceil().max(1.0) as i64;
    if odd_only && k % 2 == 0 {
        k += 1;
    }
    k
}

pub fn support_experiment(s: &HTypeStructure, spec: &SupportSpec, grid: &[Vec<f64>]) -> Result<SupportReport> {
    let odd_only = s.n == 1 && s.m == 1;
    let (z, r) = match spec {
        SupportSpec::Shell { radius, eps } => (ChargeSet::Shell { radius: *radius, eps: *eps }, *radius),
        SupportSpec::Cap { center, eps } => (ChargeSet::Cap { center: center.clone(), eps: *eps }, vec_norm(center)),
    };
    let map = charge_frequency_map(s, &z, grid, odd_only)?;
    let radius = map.unreachable_radius;
    let (predicted_radius, coarse_bound) = match spec {
        SupportSpec::Shell { radius, eps } => {
            let k1 = shell_chain_start(*eps, odd_only);
            let mut k0 = (2.0 / eps).ceil() as i64;
            if odd_only && k0 % 2 == 0 {
                k0 += 1;
            }
            (Some(2.0 * radius * radius * k1 as f64), Some(2.0 * radius * radius * k0 as f64))
        }
        SupportSpec::Cap { .. } => (None, None),
    };
    Ok(SupportReport { constant: radius.map(|x| x / (r * r)), map, radius, predicted_radius, coarse_bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityConfig {
    pub f: TestFunction,
    pub pairs: Vec<CompatiblePair>,
    pub nu_count: usize,
    pub seed: u64,
    pub l_max: usize,
    /// Degrees ≤ this enter the recovery error.
    pub compare_degree: usize,
    pub tol: f64,
    pub quadrature: Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuRecovery {
    pub pair: CompatiblePair,
    pub error: f64,
    pub null_norm: f64,
    pub unrecoverable: Vec<usize>,
    pub witness: Option<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub per_mu: Vec<MuRecovery>,
    pub max_error: f64,
    pub max_null_norm: f64,
}

/// X-ray data over sampled geodesic families for every pair, recovery of ℱ(f)(μ), and the
/// same pipeline run on f = 0.
pub fn injectivity_experiment(s: &HTypeStructure, cfg: &InjectivityConfig) -> Result<InjectivityReport> {
    let basis = FockBasis::new(s.n, cfg.l_max)?;
    let q = &cfg.quadrature;
    let data = build_dataset(s, &cfg.f, &cfg.pairs, cfg.nu_count, cfg.seed, &basis, q)?;
    let zero = TestFunction::zero(s.n, s.m);
    let null = build_dataset(s, &zero, &cfg.pairs, cfg.nu_count, cfg.seed, &basis, q)?;
    let mut per_mu = Vec::new();
    for pair in &cfg.pairs {
        let rec = recover_block(s, &data, pair, cfg.tol, RecoveryMethod::LeastSquares, q)?;
        let truth = gft(s, &cfg.f, &pair.mu, &basis, q)?;
        let rec0 = recover_block(s, &null, pair, cfg.tol, RecoveryMethod::LeastSquares, q)?;
        per_mu.push(MuRecovery {
            pair: pair.clone(),
            error: interior_error(&rec.operator, &truth, cfg.compare_degree),
            null_norm: rec0.operator.frobenius(),
            unrecoverable: rec.unrecoverable(),
            witness: rec.witness,
        });
    }
    let max_error = per_mu.iter().map(|r| r.error).fold(0.0, f64::max);
    let max_null_norm = per_mu.iter().map(|r| r.null_norm).fold(0.0, f64::max);
    Ok(InjectivityReport { per_mu, max_error, max_null_norm })
}

/// Pairs μ = 2kλ|λ| for λ ∈ charges, k ≠ 0 (odd only if asked), |μ| ≤ radius.
pub fn lattice_pairs(charges: &[Vec<f64>], radius: f64, odd_only: bool) -> Result<Vec<CompatiblePair>> {
    let mut out = Vec::new();
    for l in charges {
        let ln = vec_norm(l);
        if ln == 0.0 {
            return Err(Error::Invalid("charges must be nonzero".into()));
        }
        let kmax = (radius / (2.0 * ln * ln) + 1e-12).floor() as i64;
        for k in (-kmax..=kmax).filter(|&k| k != 0 && (!odd_only || k % 2 != 0)) {
            out.push(CompatiblePair::along(l, k)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_start() {
        assert_eq!(shell_chain_start(0.5, true), 3);
        assert_eq!(shell_chain_start(0.5, false), 1);
        assert_eq!(shell_chain_start(0.1, true), 11);
    }

    #[test]
    fn shell_witness_is_exact() {
        let z = ChargeSet::Shell { radius: 1.0, eps: 0.5 };
        let (l, k) = z.witness(&[6.0], true).unwrap();
        assert_eq!((l[0], k), (1.0, 3));
        assert!(z.witness(&[5.75], true).is_none());
        let (l, k) = z.witness(&[-2.0], true).unwrap();
        assert_eq!((l[0], k), (-1.0, 1));
    }

    #[test]
    fn cap_contains_witness() {
        let z = ChargeSet::Cap { center: vec![0.0, 0.0, 1.0], eps: 0.3 };
        for mu in [vec![0.0, 0.0, 50.0], vec![3.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]] {
            if let Some((l, k)) = z.witness(&mu, false) {
                assert!(z.contains(&l));
                assert_eq!(compatible(&l, &mu, COMPAT_TOL), Some(k));
            }
        }
        assert!(z.witness(&[1.0, 1.0, 0.0], false).is_some());
    }

    #[test]
    fn sampled_nus_are_unit() {
        let s = HTypeStructure::quaternionic();
        for nu in sample_nus(&s, &[0.0, 1.0, 0.0], 5, 9).unwrap() {
            assert!((vec_norm(&nu) - 1.0).abs() < 1e-14);
        }
    }
}
