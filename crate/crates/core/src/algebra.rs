//! H-type structures, the group law in exponential coordinates, dilations,
//! the normalising frame R_μ and the map α_μ onto the Heisenberg group.
//!
//! Sign convention used everywhere: ω_k(x, x') = ⟨J_k x, x'⟩, so that
//! (e₁,0)·(e₂,0) = (e₁+e₂, ½) on ℍ¹ with J = [[0,−1],[1,0]].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HTypeStructure {
    pub n: usize,
    pub m: usize,
    pub generators: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub x: DVector<f64>,
    pub u: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covector {
    pub nu: DVector<f64>,
    pub zeta: DVector<f64>,
}

/// A point (z, t) of ℍₙ = ℝ^{2n} × ℝ, product with ω = ⟨Jz, z'⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergPoint {
    pub z: DVector<f64>,
    pub t: f64,
}

impl GroupPoint {
    pub fn new(x: DVector<f64>, u: DVector<f64>) -> Self {
        Self { x, u }
    }
    pub fn from_slices(x: &[f64], u: &[f64]) -> Self {
        Self { x: DVector::from_column_slice(x), u: DVector::from_column_slice(u) }
    }
    pub fn identity(s: &HTypeStructure) -> Self {
        Self { x: DVector::zeros(2 * s.n), u: DVector::zeros(s.m) }
    }
    pub fn central(u: DVector<f64>, n: usize) -> Self {
        Self { x: DVector::zeros(2 * n), u }
    }
    pub fn distance_sq(&self, other: &Self) -> f64 {
        (&self.x - &other.x).norm_squared() + (&self.u - &other.u).norm_squared()
    }
}

impl Covector {
    pub fn new(nu: DVector<f64>, zeta: DVector<f64>) -> Self {
        Self { nu, zeta }
    }
    pub fn nu_norm(&self) -> f64 {
        self.nu.norm()
    }
    pub fn zeta_norm(&self) -> f64 {
        self.zeta.norm()
    }
}

/// The standard symplectic block [[0,−I],[I,0]] on ℝ^{2n}.
pub fn standard_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

// Quaternion product on (a, b, c, d) = a + bi + cj + dk.
fn qmul(p: [f64; 4], q: [f64; 4]) -> [f64; 4] {
    [
        p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
        p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
        p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
        p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
    ]
}

impl HTypeStructure {
    /// ℍₙ with J₁ = [[0,−Iₙ],[Iₙ,0]] on (X₁..Xₙ, Y₁..Yₙ).
    pub fn heisenberg(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("n must be positive".into()));
        }
        Ok(Self { n, m: 1, generators: vec![standard_j(n)] })
    }

    /// Quaternionic Heisenberg group: left multiplication by i, j, k on ℍ ≅ ℝ⁴.
    /// Coordinates are ordered (1, j, i, k) so that left-i is the standard block.
    pub fn quaternionic() -> Self {
        // coordinate slot → quaternion component
        let slot = [0usize, 2, 1, 3];
        let units = [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        let generators = units
            .iter()
            .map(|&e| {
                let mut mat = DMatrix::zeros(4, 4);
                for col in 0..4 {
                    let mut q = [0.0; 4];
                    q[slot[col]] = 1.0;
                    let img = qmul(e, q);
                    for row in 0..4 {
                        mat[(row, col)] = img[slot[row]];
                    }
                }
                mat
            })
            .collect();
        Self { n: 2, m: 3, generators }
    }

    /// Validates skew-symmetry, orthogonality and anticommutation at `tol`.
    pub fn custom(n: usize, generators: Vec<DMatrix<f64>>, tol: f64) -> Result<Self> {
        if n == 0 || generators.is_empty() {
            return Err(Error::Invalid("need n ≥ 1 and at least one generator".into()));
        }
        for (k, g) in generators.iter().enumerate() {
            if g.nrows() != 2 * n || g.ncols() != 2 * n {
                return Err(Error::NotHType(format!("generator {k} is {}x{}, expected {}x{}", g.nrows(), g.ncols(), 2 * n, 2 * n)));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NotHType(format!("generator {k} has non-finite entries")));
            }
        }
        let id = DMatrix::<f64>::identity(2 * n, 2 * n);
        for (k, g) in generators.iter().enumerate() {
            let skew = (g + g.transpose()).amax();
            if skew > tol {
                return Err(Error::NotHType(format!("generator {k} not skew-symmetric (residual {skew:.3e})")));
            }
            let orth = (g.transpose() * g - &id).amax();
            if orth > tol {
                return Err(Error::NotHType(format!("generator {k} not orthogonal (residual {orth:.3e})")));
            }
        }
        for i in 0..generators.len() {
            for j in (i + 1)..generators.len() {
                let r = (&generators[i] * &generators[j] + &generators[j] * &generators[i]).amax();
                if r > tol {
                    return Err(Error::NotHType(format!("generators {i},{j} do not anticommute (residual {r:.3e})")));
                }
            }
        }
        Ok(Self { n, m: generators.len(), generators })
    }

    pub fn dim_v(&self) -> usize {
        2 * self.n
    }

    /// Homogeneous dimension 2n + 2m.
    pub fn homogeneous_dim(&self) -> usize {
        2 * self.n + 2 * self.m
    }

    pub fn check_point(&self, p: &GroupPoint) -> Result<()> {
        check_dim("x", 2 * self.n, p.x.len())?;
        check_dim("u", self.m, p.u.len())
    }

    /// J_μ = Σ μ_k J_k.
    pub fn j_map(&self, mu: &[f64]) -> Result<DMatrix<f64>> {
        check_dim("mu", self.m, mu.len())?;
        let mut out = DMatrix::zeros(2 * self.n, 2 * self.n);
        for (g, &c) in self.generators.iter().zip(mu) {
            out += g * c;
        }
        Ok(out)
    }

    /// ω(x, x') ∈ ℝ^m with ω_k = ⟨J_k x, x'⟩.
    pub fn omega(&self, x: &[f64], xp: &[f64]) -> Vec<f64> {
        let d = 2 * self.n;
        self.generators
            .iter()
            .map(|g| {
                let mut s = 0.0;
                for c in 0..d {
                    if x[c] == 0.0 {
                        continue;
                    }
                    for r in 0..d {
                        s += g[(r, c)] * x[c] * xp[r];
                    }
                }
                s
            })
            .collect()
    }

    pub fn mul(&self, p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
        self.check_point(p)?;
        self.check_point(q)?;
        let w = self.omega(p.x.as_slice(), q.x.as_slice());
        let u = &p.u + &q.u + DVector::from_vec(w) * 0.5;
        Ok(GroupPoint { x: &p.x + &q.x, u })
    }

    pub fn inv(&self, p: &GroupPoint) -> GroupPoint {
        GroupPoint { x: -&p.x, u: -&p.u }
    }

    /// Deterministic orthogonal R_μ with J_μ = |μ| R_μ J Rᵗ_μ.
    ///
    /// Symplectic Gram–Schmidt: repeatedly take the standard basis vector with the largest
    /// residual against the frame built so far (lowest index on ties), P = normalised residual,
    /// Q = J_μ̂ P. Columns are (P₁..Pₙ, Q₁..Qₙ).
    pub fn rotation_frame(&self, mu: &[f64]) -> Result<DMatrix<f64>> {
        let norm = vec_norm(mu);
        if norm == 0.0 {
            return Err(Error::Invalid("rotation_frame needs μ ≠ 0".into()));
        }
        let jm = self.j_map(mu)? / norm;
        let d = 2 * self.n;
        let mut frame: Vec<DVector<f64>> = Vec::with_capacity(d);
        let mut ps = Vec::with_capacity(self.n);
        let mut qs = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let residuals: Vec<DVector<f64>> = (0..d)
                .map(|j| {
                    let mut r = DVector::zeros(d);
                    r[j] = 1.0;
                    for f in &frame {
                        let c = f[j];
                        r -= f * c;
                    }
                    r
                })
                .collect();
            let best = residuals.iter().map(|r| r.norm()).fold(0.0, f64::max);
            let pick = residuals.iter().position(|r| r.norm() >= best - 1e-12).unwrap();
            // one re-orthogonalisation pass for stability
            let mut p = residuals[pick].clone();
            for f in &frame {
                let c = f.dot(&p);
                p -= f * c;
            }
            let p = p.normalize();
            let q = &jm * &p;
            frame.push(p.clone());
            frame.push(q.clone());
            ps.push(p);
            qs.push(q);
        }
        let cols: Vec<DVector<f64>> = ps.into_iter().chain(qs).collect();
        Ok(DMatrix::from_columns(&cols))
    }

    /// α_μ(x, u) = (R_μᵗ x, μ·u/|μ|).
    pub fn alpha(&self, mu: &[f64], p: &GroupPoint) -> Result<HeisenbergPoint> {
        self.check_point(p)?;
        let r = self.rotation_frame(mu)?;
        Ok(alpha_with_frame(&r, mu, p))
    }
}

pub(crate) fn alpha_with_frame(r: &DMatrix<f64>, mu: &[f64], p: &GroupPoint) -> HeisenbergPoint {
    let norm = vec_norm(mu);
    let t = mu.iter().zip(p.u.iter()).map(|(a, b)| a * b).sum::<f64>() / norm;
    HeisenbergPoint { z: r.transpose() * &p.x, t }
}

pub fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// δ_ε(x, u) = (εx, ε²u).
pub fn dilate(eps: f64, p: &GroupPoint) -> Result<GroupPoint> {
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("dilation factor must be positive, got {eps}")));
    }
    Ok(GroupPoint { x: &p.x * eps, u: &p.u * (eps * eps) })
}

impl HeisenbergPoint {
    /// Product on ℍₙ with ω(z, z') = ⟨Jz, z'⟩.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.z.len() / 2;
        let mut w = 0.0;
        for i in 0..n {
            // Jz = (−y, x)
            w += -self.z[n + i] * other.z[i] + self.z[i] * other.z[n + i];
        }
        Self { z: &self.z + &other.z, t: self.t + other.t + 0.5 * w }
    }

    pub fn dilate(&self, eps: f64) -> Self {
        Self { z: &self.z * eps, t: self.t * eps * eps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn j_map_linear() {
        let s = HTypeStructure::heisenberg(1).unwrap();
        let j = s.j_map(&[2.0]).unwrap();
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]));
        assert_eq!(s.j_map(&[0.0]).unwrap(), DMatrix::zeros(2, 2));
        assert!(s.j_map(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn quaternionic_first_generator_is_standard() {
        let q = HTypeStructure::quaternionic();
        assert_eq!(q.generators[0], standard_j(2));
        assert!(HTypeStructure::custom(2, q.generators.clone(), 1e-12).is_ok());
    }

    #[test]
    fn product_convention() {
        let s = HTypeStructure::heisenberg(1).unwrap();
        let p = s.mul(&GroupPoint::from_slices(&[1.0, 0.0], &[0.0]), &GroupPoint::from_slices(&[0.0, 1.0], &[0.0])).unwrap();
        assert_eq!(p, GroupPoint::from_slices(&[1.0, 1.0], &[0.5]));
    }

    #[test]
    fn frame_conventions() {
        let h2 = HTypeStructure::heisenberg(2).unwrap();
        assert_eq!(h2.rotation_frame(&[3.0]).unwrap(), DMatrix::identity(4, 4));
        let h1 = HTypeStructure::heisenberg(1).unwrap();
        assert_eq!(h1.rotation_frame(&[-1.0]).unwrap(), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        assert!(h1.rotation_frame(&[0.0]).is_err());
        let p = GroupPoint::from_slices(&[0.3, -1.2], &[0.7]);
        let a = h1.alpha(&[1.0], &p).unwrap();
        assert_eq!(a.z, p.x);
        assert_abs_diff_eq!(a.t, 0.7);
    }

    #[test]
    fn custom_rejects_non_clifford() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        assert!(matches!(HTypeStructure::custom(1, vec![bad], 1e-12), Err(Error::NotHType(_))));
        let j = standard_j(1);
        assert!(HTypeStructure::custom(1, vec![j.clone(), j], 1e-12).is_err());
        assert!(dilate(0.0, &GroupPoint::from_slices(&[0.0, 0.0], &[0.0])).is_err());
    }
}
