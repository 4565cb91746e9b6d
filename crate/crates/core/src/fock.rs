//! Truncated Bargmann–Fock space: graded-lex basis, entry functions of the Schrödinger
//! representation, representation matrices π_μ(p), intertwiners and spherical functions.
//!
//! Matrix convention: `entries[(β, α)] = ⟨A ω_α, ω_β⟩`.
//! Complex identification of ℝ^{2n}: z_j = x_j + i x_{n+j}, so the standard J is
//! multiplication by i.
//!
//! One-dimensional entry function (h = 1, t = 0), verified against the Schrödinger
//! quadrature oracle:
//!   a ≥ b: E_ab(z) = √(b!/a!) (z/√2)^{a−b} L_b^{(a−b)}(|z|²/2) e^{−|z|²/4}
//!   a < b: E_ab(z) = (−1)^{b−a} conj(E_ba(z)).

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{alpha_with_frame, vec_norm, GroupPoint, HTypeStructure};
use crate::error::{check_dim, Error, Result};
use crate::special::{binomial, laguerre_all, ln_factorial};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }
    pub fn ln_factorial(&self) -> f64 {
        self.0.iter().map(|&a| ln_factorial(a)).sum()
    }
}

/// Monomials ζ^α/√α! with |α| ≤ L, ordered by degree, then lexicographically ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    pub n: usize,
    pub l_max: usize,
    indices: Vec<MultiIndex>,
    offsets: Vec<usize>,
    lookup: HashMap<MultiIndex, usize>,
}

pub const ENUMERATION: &str = "graded-lex";

fn compositions(n: usize, l: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![l]];
    }
    let mut out = Vec::new();
    for first in 0..=l {
        for mut rest in compositions(n - 1, l - first) {
            let mut v = vec![first];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

impl FockBasis {
    pub fn new(n: usize, l_max: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("Fock dimension n must be positive".into()));
        }
        let mut indices = Vec::new();
        let mut offsets = Vec::with_capacity(l_max + 2);
        for l in 0..=l_max {
            offsets.push(indices.len());
            indices.extend(compositions(n, l).into_iter().map(MultiIndex));
        }
        offsets.push(indices.len());
        let lookup = indices.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Ok(Self { n, l_max, indices, offsets, lookup })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn index_of(&self, a: &MultiIndex) -> Option<usize> {
        self.lookup.get(a).copied()
    }

    /// Index range of the degree-l block ℰ_l.
    pub fn block(&self, l: usize) -> std::ops::Range<usize> {
        if l > self.l_max {
            return self.len()..self.len();
        }
        self.offsets[l]..self.offsets[l + 1]
    }

    pub fn degree_of(&self, i: usize) -> usize {
        self.indices[i].degree()
    }

    /// d_l = dim ℰ_l = C(l+n−1, n−1).
    pub fn block_dim(&self, l: usize) -> usize {
        self.block(l).len()
    }
}

pub fn degree_dim(n: usize, l: usize) -> f64 {
    binomial(l + n - 1, n - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub basis: FockBasis,
    pub entries: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn zeros(basis: &FockBasis) -> Self {
        Self { basis: basis.clone(), entries: DMatrix::zeros(basis.len(), basis.len()) }
    }

    pub fn identity(basis: &FockBasis) -> Self {
        Self { basis: basis.clone(), entries: DMatrix::identity(basis.len(), basis.len()) }
    }

    pub fn from_matrix(basis: &FockBasis, entries: DMatrix<Complex64>) -> Result<Self> {
        check_dim("operator rows", basis.len(), entries.nrows())?;
        check_dim("operator cols", basis.len(), entries.ncols())?;
        Ok(Self { basis: basis.clone(), entries })
    }

    /// Submatrix rows |β| = l_row, cols |α| = l_col.
    pub fn block(&self, l_row: usize, l_col: usize) -> DMatrix<Complex64> {
        let r = self.basis.block(l_row);
        let c = self.basis.block(l_col);
        self.entries.view((r.start, c.start), (r.len(), c.len())).into_owned()
    }

    /// Upper-left corner with all degrees ≤ l.
    pub fn interior(&self, l: usize) -> DMatrix<Complex64> {
        let k = self.basis.block(l.min(self.basis.l_max)).end;
        self.entries.view((0, 0), (k, k)).into_owned()
    }

    pub fn adjoint(&self) -> Self {
        Self { basis: self.basis.clone(), entries: self.entries.adjoint() }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { basis: self.basis.clone(), entries: &self.entries * &other.entries }
    }

    /// Frobenius mass of entries whose degrees violate |β| = |α| + k.
    pub fn off_block_mass(&self, k: i64) -> f64 {
        let mut s = 0.0;
        for c in 0..self.basis.len() {
            let dc = self.basis.degree_of(c) as i64;
            for r in 0..self.basis.len() {
                if self.basis.degree_of(r) as i64 != dc + k {
                    s += self.entries[(r, c)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Table E[a][b] = E_ab(z) (h = 1, t = 0) for a, b ≤ lmax.
pub fn entry_table_1d(lmax: usize, z: Complex64) -> Vec<Vec<Complex64>> {
    let r2 = z.norm_sqr();
    let r = r2.sqrt();
    let x = r2 / 2.0;
    let phase = if r > 0.0 { z / r } else { Complex64::new(1.0, 0.0) };
    let lnr = if r > 0.0 { (r / 2f64.sqrt()).ln() } else { f64::NEG_INFINITY };
    let lf: Vec<f64> = (0..=lmax).map(ln_factorial).collect();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); lmax + 1]; lmax + 1];
    let mut ph = Complex64::new(1.0, 0.0);
    for d in 0..=lmax {
        let lag = laguerre_all(lmax - d, d as f64, x);
        for b in 0..=(lmax - d) {
            let a = b + d;
            let mag = if d == 0 {
                (-x / 2.0).exp()
            } else if r == 0.0 {
                0.0
            } else {
                (0.5 * (lf[b] - lf[a]) + d as f64 * lnr - x / 2.0).exp()
            };
            let v = ph * (mag * lag[b]);
            out[a][b] = v;
            if d > 0 {
                let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
                out[b][a] = v.conj() * sign;
            }
        }
        ph *= phase;
    }
    out
}

/// Complexified coordinates z_j = y_j + i·y_{n+j}.
pub fn complexify(y: &[f64]) -> Vec<Complex64> {
    let n = y.len() / 2;
    (0..n).map(|j| Complex64::new(y[j], y[n + j])).collect()
}

/// Real vector of a complex n-vector.
pub fn realify(z: &[Complex64]) -> Vec<f64> {
    let mut out: Vec<f64> = z.iter().map(|c| c.re).collect();
    out.extend(z.iter().map(|c| c.im));
    out
}

/// Product over coordinates of the one-dimensional entry functions at h = 1, t = 0.
pub fn entry_product(a: &MultiIndex, b: &MultiIndex, z: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for j in 0..z.len() {
        let (aj, bj) = (a.0[j], b.0[j]);
        let lm = aj.max(bj);
        let t = entry_table_1d(lm, z[j]);
        acc *= t[aj][bj];
    }
    acc
}

/// Φ_ab(z) = (2π)^{−n/2} E_ab(z).
pub fn special_hermite(a: &MultiIndex, b: &MultiIndex, z: &[Complex64]) -> Result<Complex64> {
    check_dim("a", z.len(), a.0.len())?;
    check_dim("b", z.len(), b.0.len())?;
    Ok(entry_product(a, b, z) * (2.0 * PI).powf(-(z.len() as f64) / 2.0))
}

/// E^h_ab(z, t) = (2π)^{n/2} Φ_ab(√h z) e^{iht}; z given as a real 2n-vector.
pub fn entry_function(h: f64, a: &MultiIndex, b: &MultiIndex, z: &[f64], t: f64) -> Result<Complex64> {
    if !(h > 0.0) {
        return Err(Error::Invalid(format!("entry function needs h > 0, got {h}")));
    }
    let zc: Vec<Complex64> = complexify(z).into_iter().map(|c| c * h.sqrt()).collect();
    check_dim("a", zc.len(), a.0.len())?;
    check_dim("b", zc.len(), b.0.len())?;
    Ok(entry_product(a, b, &zc) * Complex64::from_polar(1.0, h * t))
}

/// Matrix of π_1(z, 0) on the truncated basis, z complex n-vector.
pub fn heisenberg_matrix(basis: &FockBasis, z: &[Complex64]) -> DMatrix<Complex64> {
    let tables: Vec<_> = z.iter().map(|&c| entry_table_1d(basis.l_max, c)).collect();
    let idx = basis.indices();
    DMatrix::from_fn(basis.len(), basis.len(), |r, c| {
        let (b, a) = (&idx[r], &idx[c]);
        let mut acc = Complex64::new(1.0, 0.0);
        for j in 0..z.len() {
            acc *= tables[j][a.0[j]][b.0[j]];
        }
        acc
    })
}

/// Frame data for π_μ, reusable across many points.
#[derive(Debug, Clone)]
pub struct RepFrame {
    pub mu: Vec<f64>,
    pub mu_norm: f64,
    pub frame: DMatrix<f64>,
}

impl RepFrame {
    pub fn new(s: &HTypeStructure, mu: &[f64]) -> Result<Self> {
        check_dim("mu", s.m, mu.len())?;
        let mu_norm = vec_norm(mu);
        if mu_norm == 0.0 {
            return Err(Error::Invalid("π_μ needs μ ≠ 0".into()));
        }
        Ok(Self { mu: mu.to_vec(), mu_norm, frame: s.rotation_frame(mu)? })
    }

    /// Complex point √|μ| R_μᵗ x.
    pub fn z_of(&self, x: &[f64]) -> Vec<Complex64> {
        let d = x.len();
        let mut y = vec![0.0; d];
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in 0..d {
                s += self.frame[(k, i)] * x[k];
            }
            *yi = s * self.mu_norm.sqrt();
        }
        complexify(&y)
    }

    pub fn matrix(&self, basis: &FockBasis, p: &GroupPoint) -> DMatrix<Complex64> {
        let a = alpha_with_frame(&self.frame, &self.mu, p);
        let z: Vec<Complex64> = complexify(a.z.as_slice()).into_iter().map(|c| c * self.mu_norm.sqrt()).collect();
        heisenberg_matrix(basis, &z) * Complex64::from_polar(1.0, self.mu_norm * a.t)
    }
}

/// π_μ(p) = π_{|μ|} ∘ α_μ (p).
pub fn rep_matrix(s: &HTypeStructure, mu: &[f64], p: &GroupPoint, basis: &FockBasis) -> Result<FockOperator> {
    s.check_point(p)?;
    check_dim("basis n", s.n, basis.n)?;
    let f = RepFrame::new(s, mu)?;
    FockOperator::from_matrix(basis, f.matrix(basis, p))
}

/// π_{(η,0)}(x, u) = e^{i⟨η, x⟩}.
pub fn scalar_rep(s: &HTypeStructure, eta: &[f64], p: &GroupPoint) -> Result<Complex64> {
    s.check_point(p)?;
    check_dim("eta", 2 * s.n, eta.len())?;
    let ph: f64 = eta.iter().zip(p.x.iter()).map(|(a, b)| a * b).sum();
    Ok(Complex64::from_polar(1.0, ph))
}

type Poly = HashMap<Vec<usize>, Complex64>;

fn poly_mul_linear(p: &Poly, lin: &[Complex64]) -> Poly {
    let mut out = Poly::new();
    for (mono, c) in p {
        for (k, &lk) in lin.iter().enumerate() {
            if lk == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut m = mono.clone();
            m[k] += 1;
            *out.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c * lk;
        }
    }
    out
}

/// τ(U): F(ζ) ↦ F(U*ζ). Block-diagonal across degrees by construction.
pub fn intertwiner_tau(u: &DMatrix<Complex64>, basis: &FockBasis) -> Result<FockOperator> {
    let n = basis.n;
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::Dimension { what: "U", expected: n, got: u.nrows() });
    }
    let res = (u * u.adjoint() - DMatrix::<Complex64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if res > 1e-12 {
        return Err(Error::Invalid(format!("U is not unitary (residual {res:.3e})")));
    }
    let ustar = u.adjoint();
    let mut out = DMatrix::zeros(basis.len(), basis.len());
    for (col, a) in basis.indices().iter().enumerate() {
        let mut p = Poly::new();
        p.insert(vec![0; n], Complex64::new(1.0, 0.0));
        for j in 0..n {
            // (U*ζ)_j = Σ_k U*_{jk} ζ_k
            let lin: Vec<Complex64> = (0..n).map(|k| ustar[(j, k)]).collect();
            for _ in 0..a.0[j] {
                p = poly_mul_linear(&p, &lin);
            }
        }
        let norm_a = (-0.5 * a.ln_factorial()).exp();
        for (mono, c) in p {
            let b = MultiIndex(mono);
            let row = basis.index_of(&b).expect("degree preserved");
            out[(row, col)] = c * norm_a * (0.5 * b.ln_factorial()).exp();
        }
    }
    FockOperator::from_matrix(basis, out)
}

/// Complex n×n matrix of a real 2n×2n matrix that commutes with J; error otherwise.
pub fn complex_linear_part(o: &DMatrix<f64>, tol: f64) -> Result<DMatrix<Complex64>> {
    let d = o.nrows();
    let n = d / 2;
    let a = o.view((0, 0), (n, n));
    let b = o.view((n, 0), (n, n));
    let mut res: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            res = res.max((o[(i, j)] - o[(n + i, n + j)]).abs());
            res = res.max((o[(i, n + j)] + o[(n + i, j)]).abs());
        }
    }
    if res > tol {
        return Err(Error::FrameInconsistent(res));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| Complex64::new(a[(i, j)], b[(i, j)])))
}

/// 𝒰_{μλ} = τ(V) with V the complex form of R_μᵗR_λ, so that
/// π_h(R_μᵗR_λ z, t) = 𝒰 π_h(z, t) 𝒰*.
pub fn intertwiner_u(s: &HTypeStructure, mu: &[f64], lambda: &[f64], basis: &FockBasis) -> Result<FockOperator> {
    if vec_norm(mu) == 0.0 || vec_norm(lambda) == 0.0 {
        return Err(Error::Invalid("intertwiner needs μ, λ ≠ 0".into()));
    }
    let o = s.rotation_frame(mu)?.transpose() * s.rotation_frame(lambda)?;
    let v = complex_linear_part(&o, 1e-9)?;
    intertwiner_tau(&v, basis)
}

/// L_l^{(n−1)}(|z|²/2) e^{−|z|²/4} e^{it}; equals Σ_{|α|=l} E_αα(z, t).
pub fn spherical_function(l: usize, n: usize, z: &[Complex64], t: f64) -> Complex64 {
    let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let lag = laguerre_all(l, n as f64 - 1.0, r2 / 2.0)[l];
    Complex64::from_polar(lag * (-r2 / 4.0).exp(), t)
}

/// Sampled function on a uniform periodic grid over [−half, half)ⁿ, n ∈ {1, 2}.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub n: usize,
    pub points: usize,
    pub half: f64,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn step(&self) -> f64 {
        2.0 * self.half / self.points as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half + i as f64 * self.step()
    }

    pub fn sample(n: usize, points: usize, half: f64, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let g = Self { n, points, half, values: Vec::new() };
        let values = match n {
            1 => (0..points).map(|i| f(&[g.coord(i)])).collect(),
            2 => (0..points * points).map(|k| f(&[g.coord(k / points), g.coord(k % points)])).collect(),
            _ => return Err(Error::Invalid("grid oracle supports n ∈ {1, 2}".into())),
        };
        Ok(Self { values, ..g })
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        let w = self.step().powi(self.n as i32);
        self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<Complex64>() * w
    }
}

fn fft_shift_axis(vals: &mut [Complex64], len: usize, stride: usize, count: usize, outer: usize, shift: f64, step: f64) {
    use rustfft::FftPlanner;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let period = len as f64 * step;
    for o in 0..outer {
        for c in 0..count {
            let base = o * len * count + c;
            let mut line: Vec<Complex64> = (0..len).map(|i| vals[base + i * stride]).collect();
            fwd.process(&mut line);
            for (k, v) in line.iter_mut().enumerate() {
                let kk = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
                // Nyquist bin: keep it real-symmetric
                let f = if 2 * k == len { 0.0 } else { 2.0 * PI * kk / period };
                *v *= Complex64::from_polar(1.0 / len as f64, f * shift);
            }
            inv.process(&mut line);
            for i in 0..len {
                vals[base + i * stride] = line[i];
            }
        }
    }
}

/// [ρ_h(x, y, t)φ](ξ) = e^{ih(t+½x·y)} e^{i·sgn(h)√|h| y·ξ} φ(ξ + √|h| x), with the shift
/// applied by trigonometric interpolation on the periodic grid. Oracle use only.
pub fn schrodinger_apply(h: f64, x: &[f64], y: &[f64], t: f64, phi: &GridFunction) -> Result<GridFunction> {
    if h == 0.0 {
        return Err(Error::Invalid("Schrödinger representation needs h ≠ 0".into()));
    }
    check_dim("x", phi.n, x.len())?;
    check_dim("y", phi.n, y.len())?;
    let sh = h.abs().sqrt();
    let sg = h.signum();
    let mut vals = phi.values.clone();
    let p = phi.points;
    match phi.n {
        1 => fft_shift_axis(&mut vals, p, 1, 1, 1, sh * x[0], phi.step()),
        _ => {
            // axis 0 (slow index) then axis 1 (fast index)
            fft_shift_axis(&mut vals, p, p, p, 1, sh * x[0], phi.step());
            fft_shift_axis(&mut vals, p, 1, 1, p, sh * x[1], phi.step());
        }
    }
    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let global = Complex64::from_polar(1.0, h * (t + 0.5 * xy));
    let mut out = phi.clone();
    for (k, v) in vals.into_iter().enumerate() {
        let xi: Vec<f64> = if phi.n == 1 { vec![phi.coord(k)] } else { vec![phi.coord(k / p), phi.coord(k % p)] };
        let ph: f64 = xi.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() * sg * sh;
        out.values[k] = v * global * Complex64::from_polar(1.0, ph);
    }
    Ok(out)
}

/// n-dimensional Hermite function Π φ_{α_j}(ξ_j).
pub fn hermite_product(a: &MultiIndex, xi: &[f64]) -> f64 {
    a.0.iter().zip(xi).map(|(&k, &x)| crate::special::hermite(k, x)).product()
}

/// Trace of the degree-l block.
pub fn block_trace(op: &DMatrix<Complex64>, basis: &FockBasis, l: usize) -> Complex64 {
    basis.block(l).map(|i| op[(i, i)]).sum()
}

pub fn dvec_c(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn basis_order_and_size() {
        let b = FockBasis::new(2, 3).unwrap();
        assert_eq!(b.len(), 10);
        let v: Vec<Vec<usize>> = b.indices().iter().map(|m| m.0.clone()).collect();
        assert_eq!(v[..6], [vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(b.block(2), 3..6);
        let b3 = FockBasis::new(3, 5).unwrap();
        assert_eq!(b3.len() as f64, binomial(8, 3));
    }

    #[test]
    fn identity_and_origin() {
        let b = FockBasis::new(2, 4).unwrap();
        let m = heisenberg_matrix(&b, &[Complex64::new(0.0, 0.0); 2]);
        assert!((m - DMatrix::<Complex64>::identity(b.len(), b.len())).camax() < 1e-15);
        let z = [Complex64::new(0.0, 0.0)];
        assert_abs_diff_eq!(special_hermite(&MultiIndex(vec![2]), &MultiIndex(vec![2]), &z).unwrap().re, (2.0 * PI).powf(-0.5));
    }

    #[test]
    fn ground_state_value() {
        let v = special_hermite(&MultiIndex(vec![0]), &MultiIndex(vec![0]), &[Complex64::new(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(v.re, (2.0 * PI).powf(-0.5) * (-0.25f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.re, 0.31069, epsilon = 1e-5);
    }

    #[test]
    fn tau_rejects_nonunitary() {
        let b = FockBasis::new(1, 3).unwrap();
        let u = DMatrix::from_element(1, 1, Complex64::new(2.0, 0.0));
        assert!(intertwiner_tau(&u, &b).is_err());
    }

    #[test]
    fn spherical_at_origin() {
        let z = [Complex64::new(0.0, 0.0); 2];
        let v = spherical_function(3, 2, &z, 0.4);
        assert_abs_diff_eq!(v.norm(), binomial(4, 3), epsilon = 1e-14);
        assert_abs_diff_eq!(v.arg(), 0.4, epsilon = 1e-14);
    }
}
