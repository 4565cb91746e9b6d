//! Closed-form normal geodesics, the guiding-centre curves γ_{ν,λ}, momentum maps.
//!
//! With θ = |λ|s and J_λ² = −|λ|²:
//!   x(s) = s·sinc θ·ν + s²·(1−cos θ)/θ²·J_λ ν,
//!   u(s) = ½·s³·(θ − sin θ)/θ³·|ν|²·λ,
//! both smooth through λ = 0, where they reduce to (sν, 0).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algebra::{vec_norm, GroupPoint, HTypeStructure};
use crate::error::{check_dim, Error, Result};

const SERIES_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSpec {
    pub base: GroupPoint,
    pub nu: DVector<f64>,
    pub lambda: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumPair {
    pub nu: DVector<f64>,
    pub zeta: DVector<f64>,
}

impl GeodesicSpec {
    pub fn new(s: &HTypeStructure, base: GroupPoint, nu: DVector<f64>, lambda: DVector<f64>) -> Result<Self> {
        s.check_point(&base)?;
        check_dim("nu", 2 * s.n, nu.len())?;
        check_dim("lambda", s.m, lambda.len())?;
        if (nu.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("|ν| = {} is not 1", nu.norm())));
        }
        Ok(Self { base, nu, lambda })
    }

    /// base · γ_{ν,λ}(s); for λ = 0 the member of the family is the line (sν, 0).
    pub fn point(&self, s: &HTypeStructure, t: f64) -> Result<GroupPoint> {
        let c = if self.lambda.norm() == 0.0 {
            GroupPoint::new(&self.nu * t, DVector::zeros(s.m))
        } else {
            gamma_centered(s, self.nu.as_slice(), self.lambda.as_slice(), t)?
        };
        s.mul(&self.base, &c)
    }
}

fn sinc(t: f64) -> f64 {
    if t.abs() < SERIES_THRESHOLD {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

// (1 − cos θ)/θ²
fn versine_ratio(t: f64) -> f64 {
    if t.abs() < SERIES_THRESHOLD {
        0.5 - t * t / 24.0
    } else {
        (1.0 - t.cos()) / (t * t)
    }
}

// (θ − sin θ)/θ³
fn chord_ratio(t: f64) -> f64 {
    if t.abs() < SERIES_THRESHOLD {
        1.0 / 6.0 - t * t / 120.0
    } else {
        (t - t.sin()) / (t * t * t)
    }
}

/// Geodesic from the identity with initial covector (ν, λ).
pub fn flow_origin(s: &HTypeStructure, nu: &[f64], lambda: &[f64], t: f64) -> Result<GroupPoint> {
    check_dim("nu", 2 * s.n, nu.len())?;
    let jl = s.j_map(lambda)?;
    let nuv = DVector::from_column_slice(nu);
    let theta = vec_norm(lambda) * t;
    let x = &nuv * (t * sinc(theta)) + (&jl * &nuv) * (t * t * versine_ratio(theta));
    let scale = 0.5 * t * t * t * chord_ratio(theta) * nuv.norm_squared();
    let u = DVector::from_column_slice(lambda) * scale;
    Ok(GroupPoint::new(x, u))
}

/// γ_{ν,λ}(s) = (e^{sJ_λ} J_λ^{-1} ν, sλ|ν|²/(2|λ|²)).
pub fn gamma_centered(s: &HTypeStructure, nu: &[f64], lambda: &[f64], t: f64) -> Result<GroupPoint> {
    check_dim("nu", 2 * s.n, nu.len())?;
    let l = vec_norm(lambda);
    if l == 0.0 {
        return Err(Error::Invalid("γ_{ν,λ} needs λ ≠ 0".into()));
    }
    let h = Helix::new(s, nu, lambda)?;
    let mut x = vec![0.0; 2 * s.n];
    h.x_at(t, &mut x);
    let nn: f64 = nu.iter().map(|a| a * a).sum();
    let u = DVector::from_iterator(s.m, lambda.iter().map(|&c| t * c * nn / (2.0 * l * l)));
    Ok(GroupPoint::new(DVector::from_vec(x), u))
}

/// Precomputed data for fast evaluation of γ_{ν,λ}: x(s) = (sin θ·ν − cos θ·J_λ̂ν)/|λ|.
#[derive(Debug, Clone)]
pub struct Helix {
    pub nu: Vec<f64>,
    pub jnu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub lnorm: f64,
    pub nu_sq: f64,
}

impl Helix {
    pub fn new(s: &HTypeStructure, nu: &[f64], lambda: &[f64]) -> Result<Self> {
        let lnorm = vec_norm(lambda);
        if lnorm == 0.0 {
            return Err(Error::Invalid("helix needs λ ≠ 0".into()));
        }
        let jl = s.j_map(lambda)? / lnorm;
        let jnu = (&jl * DVector::from_column_slice(nu)).as_slice().to_vec();
        Ok(Self { nu: nu.to_vec(), jnu, lambda: lambda.to_vec(), lnorm, nu_sq: nu.iter().map(|a| a * a).sum() })
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lnorm
    }

    pub fn x_at(&self, t: f64, out: &mut [f64]) {
        let (sn, cs) = (self.lnorm * t).sin_cos();
        for i in 0..out.len() {
            out[i] = (sn * self.nu[i] - cs * self.jnu[i]) / self.lnorm;
        }
    }

    pub fn u_at(&self, t: f64, out: &mut [f64]) {
        let c = t * self.nu_sq / (2.0 * self.lnorm * self.lnorm);
        for (o, l) in out.iter_mut().zip(&self.lambda) {
            *o = c * l;
        }
    }
}

pub fn translate_curve(s: &HTypeStructure, base: &GroupPoint, point: &GroupPoint) -> Result<GroupPoint> {
    s.mul(base, point)
}

/// (γ(s + 2πk/|λ|), (0, kπ|λ|^{-2}λ̂)·γ(s)).
pub fn helical_shift(s: &HTypeStructure, nu: &[f64], lambda: &[f64], t: f64, k: i64) -> Result<(GroupPoint, GroupPoint)> {
    let l = vec_norm(lambda);
    if l == 0.0 {
        return Err(Error::Invalid("helical shift needs λ ≠ 0".into()));
    }
    let lhs = gamma_centered(s, nu, lambda, t + 2.0 * std::f64::consts::PI * k as f64 / l)?;
    let shift = GroupPoint::central(
        DVector::from_iterator(s.m, lambda.iter().map(|c| k as f64 * std::f64::consts::PI / (l * l) * c / l)),
        s.n,
    );
    let rhs = s.mul(&shift, &gamma_centered(s, nu, lambda, t)?)?;
    Ok((lhs, rhs))
}

/// Left momentum map 𝐉(x, u, ν, μ) = (ν − J_μ x, μ).
pub fn momentum_left(s: &HTypeStructure, p: &GroupPoint, pm: &MomentumPair) -> Result<MomentumPair> {
    s.check_point(p)?;
    let jm = s.j_map(pm.zeta.as_slice())?;
    Ok(MomentumPair { nu: &pm.nu - jm * &p.x, zeta: pm.zeta.clone() })
}

/// Right momentum along the flow: (e^{sJ_μ}ν, μ).
pub fn momentum_right(s: &HTypeStructure, nu: &[f64], mu: &[f64], t: f64) -> Result<MomentumPair> {
    check_dim("nu", 2 * s.n, nu.len())?;
    let l = vec_norm(mu);
    let nuv = DVector::from_column_slice(nu);
    let rotated = if l == 0.0 {
        nuv
    } else {
        let jh = s.j_map(mu)? / l;
        let (sn, cs) = (l * t).sin_cos();
        &nuv * cs + (jh * &nuv) * sn
    };
    Ok(MomentumPair { nu: rotated, zeta: DVector::from_column_slice(mu) })
}

/// C = x − J_μ^{-1}ν.
pub fn guiding_center(s: &HTypeStructure, p: &GroupPoint, nu: &[f64], mu: &[f64]) -> Result<DVector<f64>> {
    s.check_point(p)?;
    let l = vec_norm(mu);
    if l == 0.0 {
        return Err(Error::Invalid("guiding centre needs μ ≠ 0".into()));
    }
    // J_μ^{-1} = −J_μ/|μ|²
    let jm = s.j_map(mu)?;
    Ok(&p.x + jm * DVector::from_column_slice(nu) / (l * l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn flow_examples() {
        let s = HTypeStructure::heisenberg(1).unwrap();
        let p = flow_origin(&s, &[1.0, 0.0], &[0.7], 0.0).unwrap();
        assert_eq!(p, GroupPoint::identity(&s));
        let p = flow_origin(&s, &[1.0, 0.0], &[0.0], 3.0).unwrap();
        assert_eq!(p, GroupPoint::from_slices(&[3.0, 0.0], &[0.0]));
        let p = flow_origin(&s, &[0.6, 0.8], &[1.0], 2.0 * PI).unwrap();
        assert!(p.x.norm() < 1e-14);
        assert_abs_diff_eq!(p.u[0], PI, epsilon = 1e-14);
    }

    #[test]
    fn centered_start_and_momentum() {
        let s = HTypeStructure::heisenberg(1).unwrap();
        let g0 = gamma_centered(&s, &[0.6, 0.8], &[2.0], 0.0).unwrap();
        let jinv = -s.j_map(&[2.0]).unwrap() / 4.0;
        assert!((g0.x - jinv * DVector::from_column_slice(&[0.6, 0.8])).norm() < 1e-15);
        assert!(gamma_centered(&s, &[1.0, 0.0], &[0.0], 1.0).is_err());
        let c = guiding_center(&s, &GroupPoint::from_slices(&[0.4, 0.1], &[0.0]), &[0.0, 0.0], &[1.0]).unwrap();
        assert_eq!(c.as_slice(), &[0.4, 0.1]);
    }

    #[test]
    fn helical_k_zero() {
        let s = HTypeStructure::quaternionic();
        let (a, b) = helical_shift(&s, &[0.5, 0.5, 0.5, 0.5], &[0.3, -1.0, 0.2], 0.4, 0).unwrap();
        assert!(a.distance_sq(&b) < 1e-28);
    }
}
