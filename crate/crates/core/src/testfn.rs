//! Separable Gaussian–Hermite test functions f(x, u) = H(x)·C(u) and the
//! `GroupFunction` abstraction that the transforms integrate.
//!
//!   H(x) = Σ c·P(x − x₀)·e^{−a|x−x₀|²},   P a polynomial of degree ≤ 4
//!   C(u) = Σ d·e^{−b|u−u₀|²}·e^{iω₀·u}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::algebra::{GroupPoint, HTypeStructure};
use crate::error::{Error, Result};

pub const MAX_POLY_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: Complex64,
    pub powers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizontalTerm {
    pub coeff: Complex64,
    pub center: Vec<f64>,
    pub a: f64,
    /// Empty means P ≡ 1.
    #[serde(default)]
    pub poly: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralTerm {
    pub coeff: Complex64,
    pub center: Vec<f64>,
    pub b: f64,
    #[serde(default)]
    pub freq: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub horizontal: Vec<HorizontalTerm>,
    pub central: Vec<CentralTerm>,
}

/// Euclidean balls outside which a function is negligible.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub x_center: Vec<f64>,
    pub x_radius: f64,
    pub u_center: Vec<f64>,
    pub u_radius: f64,
}

pub trait GroupFunction: Sync {
    fn eval(&self, x: &[f64], u: &[f64]) -> Complex64;
    /// Balls carrying everything above `tol` × peak.
    fn support(&self, tol: f64) -> Support;
    /// Upper bound for sup |f|.
    fn sup_bound(&self) -> f64;

    fn eval_point(&self, p: &GroupPoint) -> Complex64 {
        self.eval(p.x.as_slice(), p.u.as_slice())
    }

    /// Values at (x, u) for every u in `us`; override when x-work can be shared.
    fn eval_u_batch(&self, x: &[f64], us: &[Vec<f64>]) -> Vec<Complex64> {
        us.iter().map(|u| self.eval(x, u)).collect()
    }

    /// Radius of the central ball, at horizontal position x, outside which f is negligible.
    fn central_radius_at(&self, _x: &[f64], tol: f64) -> f64 {
        self.support(tol).u_radius
    }
}

impl HorizontalTerm {
    pub fn degree(&self) -> usize {
        self.poly.iter().map(|m| m.powers.iter().sum::<usize>()).max().unwrap_or(0)
    }

    fn poly_at(&self, y: &[f64]) -> Complex64 {
        if self.poly.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        self.poly
            .iter()
            .map(|m| m.coeff * m.powers.iter().zip(y).map(|(&e, &v)| v.powi(e as i32)).product::<f64>())
            .sum()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut r2 = 0.0;
        let mut y = [0.0f64; 8];
        let y = &mut y[..x.len()];
        for i in 0..x.len() {
            y[i] = x[i] - self.center[i];
            r2 += y[i] * y[i];
        }
        self.coeff * self.poly_at(y) * (-self.a * r2).exp()
    }

    fn monomials(&self, dim: usize) -> Vec<Monomial> {
        if self.poly.is_empty() {
            vec![Monomial { coeff: Complex64::new(1.0, 0.0), powers: vec![0; dim] }]
        } else {
            self.poly.clone()
        }
    }
}

impl CentralTerm {
    pub fn eval(&self, u: &[f64]) -> Complex64 {
        let mut r2 = 0.0;
        let mut ph = 0.0;
        for i in 0..u.len() {
            let d = u[i] - self.center[i];
            r2 += d * d;
            if !self.freq.is_empty() {
                ph += self.freq[i] * u[i];
            }
        }
        let mag = (-self.b * r2).exp();
        if ph == 0.0 {
            self.coeff * mag
        } else {
            self.coeff * Complex64::from_polar(mag, ph)
        }
    }

    fn freq_or_zero(&self, i: usize) -> f64 {
        self.freq.get(i).copied().unwrap_or(0.0)
    }
}

// ∫ y^e e^{−a y² − iηy} dy for e = 0..=emax, by integration by parts.
fn gaussian_moments(emax: usize, a: f64, eta: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(emax + 1);
    out.push(Complex64::new((PI / a).sqrt() * (-eta * eta / (4.0 * a)).exp(), 0.0));
    let i = Complex64::new(0.0, 1.0);
    for e in 0..emax {
        let prev = if e == 0 { Complex64::new(0.0, 0.0) } else { out[e - 1] };
        let next = (prev * e as f64 - i * eta * out[e]) / (2.0 * a);
        out.push(next);
    }
    out
}

// ∫|y|^e e^{−a y²} dy = Γ((e+1)/2)/a^{(e+1)/2}
fn abs_moment(e: usize, a: f64) -> f64 {
    let half = (e as f64 + 1.0) / 2.0;
    gamma_half_integer(e + 1) / a.powf(half)
}

// Γ(k/2) for integer k ≥ 1
fn gamma_half_integer(k: usize) -> f64 {
    if k % 2 == 0 {
        (1..k / 2).map(|j| j as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x + 1e-9 < k as f64 / 2.0 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

impl TestFunction {
    pub fn gaussian(n: usize, m: usize) -> Self {
        Self {
            horizontal: vec![HorizontalTerm { coeff: Complex64::new(1.0, 0.0), center: vec![0.0; 2 * n], a: 1.0, poly: vec![] }],
            central: vec![CentralTerm { coeff: Complex64::new(1.0, 0.0), center: vec![0.0; m], b: 1.0, freq: vec![] }],
        }
    }

    pub fn zero(n: usize, m: usize) -> Self {
        let mut f = Self::gaussian(n, m);
        f.horizontal[0].coeff = Complex64::new(0.0, 0.0);
        f
    }

    pub fn validate(&self, s: &HTypeStructure) -> Result<()> {
        let d = 2 * s.n;
        if self.horizontal.is_empty() || self.central.is_empty() {
            return Err(Error::Invalid("test function needs at least one horizontal and one central term".into()));
        }
        if d > 8 {
            return Err(Error::Invalid("test functions support dim 𝔳 ≤ 8".into()));
        }
        for (i, t) in self.horizontal.iter().enumerate() {
            if t.center.len() != d {
                return Err(Error::Invalid(format!("horizontal term {i}: centre has length {}, expected {d}", t.center.len())));
            }
            if !(t.a > 0.0) || !t.a.is_finite() {
                return Err(Error::Invalid(format!("horizontal term {i}: a must be positive")));
            }
            for m in &t.poly {
                if m.powers.len() != d {
                    return Err(Error::Invalid(format!("horizontal term {i}: monomial exponent length {}", m.powers.len())));
                }
            }
            if t.degree() > MAX_POLY_DEGREE {
                return Err(Error::Invalid(format!("horizontal term {i}: polynomial degree {} exceeds {MAX_POLY_DEGREE}", t.degree())));
            }
        }
        for (i, t) in self.central.iter().enumerate() {
            if t.center.len() != s.m || !(t.freq.is_empty() || t.freq.len() == s.m) {
                return Err(Error::Invalid(format!("central term {i}: vectors must have length {}", s.m)));
            }
            if !(t.b > 0.0) || !t.b.is_finite() {
                return Err(Error::Invalid(format!("central term {i}: b must be positive")));
            }
        }
        Ok(())
    }

    pub fn horizontal_at(&self, x: &[f64]) -> Complex64 {
        self.horizontal.iter().map(|t| t.eval(x)).sum()
    }

    pub fn central_at(&self, u: &[f64]) -> Complex64 {
        self.central.iter().map(|t| t.eval(u)).sum()
    }

    /// Ĉ(μ) = ∫ C(u) e^{−iμ·u} du.
    pub fn central_fourier(&self, mu: &[f64]) -> Complex64 {
        let m = mu.len() as f64;
        self.central
            .iter()
            .map(|t| {
                let mut r2 = 0.0;
                let mut ph = 0.0;
                for i in 0..mu.len() {
                    let d = mu[i] - t.freq_or_zero(i);
                    r2 += d * d;
                    ph -= d * t.center[i];
                }
                t.coeff * Complex64::from_polar((PI / t.b).powf(m / 2.0) * (-r2 / (4.0 * t.b)).exp(), ph)
            })
            .sum()
    }

    /// Ĥ(η) = ∫ H(x) e^{−iη·x} dx.
    pub fn horizontal_fourier(&self, eta: &[f64]) -> Complex64 {
        let d = eta.len();
        self.horizontal
            .iter()
            .map(|t| {
                let moments: Vec<Vec<Complex64>> = (0..d).map(|j| gaussian_moments(MAX_POLY_DEGREE, t.a, eta[j])).collect();
                let poly: Complex64 = t
                    .monomials(d)
                    .iter()
                    .map(|m| m.coeff * (0..d).map(|j| moments[j][m.powers[j]]).product::<Complex64>())
                    .sum();
                let ph: f64 = -eta.iter().zip(&t.center).map(|(a, b)| a * b).sum::<f64>();
                t.coeff * poly * Complex64::from_polar(1.0, ph)
            })
            .sum()
    }

    /// Upper bound for ‖f‖_{L¹(G)} = ‖H‖₁·‖C‖₁.
    pub fn l1_bound(&self) -> f64 {
        let h: f64 = self
            .horizontal
            .iter()
            .map(|t| {
                let d = t.center.len();
                t.coeff.norm()
                    * t.monomials(d).iter().map(|m| m.coeff.norm() * m.powers.iter().map(|&e| abs_moment(e, t.a)).product::<f64>()).sum::<f64>()
            })
            .sum();
        let c: f64 = self.central.iter().map(|t| t.coeff.norm() * (PI / t.b).powf(t.center.len() as f64 / 2.0)).sum();
        h * c
    }

    /// δ_ε^* f (x, u) = f(εx, ε²u), again in the class.
    pub fn dilate(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Invalid(format!("dilation needs ε > 0, got {eps}")));
        }
        let horizontal = self
            .horizontal
            .iter()
            .map(|t| HorizontalTerm {
                coeff: t.coeff,
                center: t.center.iter().map(|c| c / eps).collect(),
                a: t.a * eps * eps,
                poly: t
                    .poly
                    .iter()
                    .map(|m| Monomial { coeff: m.coeff * eps.powi(m.powers.iter().sum::<usize>() as i32), powers: m.powers.clone() })
                    .collect(),
            })
            .collect();
        let central = self
            .central
            .iter()
            .map(|t| CentralTerm {
                coeff: t.coeff,
                center: t.center.iter().map(|c| c / (eps * eps)).collect(),
                b: t.b * eps.powi(4),
                freq: t.freq.iter().map(|w| w * eps * eps).collect(),
            })
            .collect();
        Ok(Self { horizontal, central })
    }

    /// c·f.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for t in &mut out.horizontal {
            t.coeff *= c;
        }
        out
    }
}

fn poly_growth(deg: usize, a: f64) -> f64 {
    // y^deg e^{−a y²} peaks at y = √(deg/2a); pad the radius by that much
    (deg as f64 / (2.0 * a)).sqrt()
}

fn bounding_ball(balls: &[(Vec<f64>, f64)]) -> (Vec<f64>, f64) {
    let dim = balls[0].0.len();
    let mut c = vec![0.0; dim];
    for (b, _) in balls {
        for i in 0..dim {
            c[i] += b[i] / balls.len() as f64;
        }
    }
    let r = balls
        .iter()
        .map(|(b, r)| b.iter().zip(&c).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt() + r)
        .fold(0.0, f64::max);
    (c, r)
}

impl GroupFunction for TestFunction {
    fn eval(&self, x: &[f64], u: &[f64]) -> Complex64 {
        let h = self.horizontal_at(x);
        if h == Complex64::new(0.0, 0.0) {
            return h;
        }
        h * self.central_at(u)
    }

    fn support(&self, tol: f64) -> Support {
        let lt = (1.0 / tol).ln().max(1.0);
        let hb: Vec<(Vec<f64>, f64)> =
            self.horizontal.iter().map(|t| (t.center.clone(), (lt / t.a).sqrt() + poly_growth(t.degree(), t.a))).collect();
        let cb: Vec<(Vec<f64>, f64)> = self.central.iter().map(|t| (t.center.clone(), (lt / t.b).sqrt())).collect();
        let (x_center, x_radius) = bounding_ball(&hb);
        let (u_center, u_radius) = bounding_ball(&cb);
        Support { x_center, x_radius, u_center, u_radius }
    }

    fn sup_bound(&self) -> f64 {
        let h: f64 = self
            .horizontal
            .iter()
            .map(|t| {
                let d = t.center.len();
                t.coeff.norm()
                    * t.monomials(d)
                        .iter()
                        .map(|m| {
                            m.coeff.norm()
                                * m.powers
                                    .iter()
                                    .map(|&e| if e == 0 { 1.0 } else { (e as f64 / (2.0 * t.a * std::f64::consts::E)).powf(e as f64 / 2.0) })
                                    .product::<f64>()
                        })
                        .sum::<f64>()
            })
            .sum();
        let c: f64 = self.central.iter().map(|t| t.coeff.norm()).sum();
        h * c
    }
}

/// q ↦ f(p·q).
pub struct LeftTranslated<'a, F: GroupFunction> {
    pub structure: &'a HTypeStructure,
    pub p: GroupPoint,
    pub f: &'a F,
}

impl<F: GroupFunction> GroupFunction for LeftTranslated<'_, F> {
    fn eval(&self, x: &[f64], u: &[f64]) -> Complex64 {
        let w = self.structure.omega(self.p.x.as_slice(), x);
        let mut xx = [0.0f64; 8];
        let mut uu = [0.0f64; 8];
        let xx = &mut xx[..x.len()];
        let uu = &mut uu[..u.len()];
        for i in 0..x.len() {
            xx[i] = self.p.x[i] + x[i];
        }
        for k in 0..u.len() {
            uu[k] = self.p.u[k] + u[k] + 0.5 * w[k];
        }
        self.f.eval(xx, uu)
    }

    fn support(&self, tol: f64) -> Support {
        let s = self.f.support(tol);
        let xp = self.p.x.as_slice();
        let x_center: Vec<f64> = s.x_center.iter().zip(xp).map(|(c, p)| c - p).collect();
        let w = self.structure.omega(xp, &s.x_center);
        let u_center: Vec<f64> = (0..s.u_center.len()).map(|k| s.u_center[k] - self.p.u[k] - 0.5 * w[k]).collect();
        let pn = self.p.x.norm();
        Support {
            x_center,
            x_radius: s.x_radius,
            u_center,
            u_radius: s.u_radius + 0.5 * (self.structure.m as f64).sqrt() * pn * s.x_radius,
        }
    }

    fn sup_bound(&self) -> f64 {
        self.f.sup_bound()
    }
}

/// Linear combination Σ c_i f_i of group functions.
pub struct Combination<'a> {
    pub terms: Vec<(Complex64, &'a dyn GroupFunction)>,
}

impl GroupFunction for Combination<'_> {
    fn eval(&self, x: &[f64], u: &[f64]) -> Complex64 {
        self.terms.iter().map(|(c, f)| c * f.eval(x, u)).sum()
    }

    fn support(&self, tol: f64) -> Support {
        let ss: Vec<Support> = self.terms.iter().map(|(_, f)| f.support(tol)).collect();
        let (x_center, x_radius) = bounding_ball(&ss.iter().map(|s| (s.x_center.clone(), s.x_radius)).collect::<Vec<_>>());
        let (u_center, u_radius) = bounding_ball(&ss.iter().map(|s| (s.u_center.clone(), s.u_radius)).collect::<Vec<_>>());
        Support { x_center, x_radius, u_center, u_radius }
    }

    fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|(c, f)| c.norm() * f.sup_bound()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample() -> TestFunction {
        TestFunction {
            horizontal: vec![HorizontalTerm {
                coeff: Complex64::new(0.8, 0.3),
                center: vec![0.3, -0.2],
                a: 1.3,
                poly: vec![
                    Monomial { coeff: Complex64::new(1.0, 0.0), powers: vec![0, 0] },
                    Monomial { coeff: Complex64::new(0.5, -0.2), powers: vec![2, 1] },
                ],
            }],
            central: vec![CentralTerm { coeff: Complex64::new(1.0, 0.0), center: vec![0.4], b: 0.9, freq: vec![0.7] }],
        }
    }

    #[test]
    fn central_fourier_against_quadrature() {
        let f = sample();
        let mu = [1.7];
        let h = 0.01;
        let q: Complex64 = (-1500..1500)
            .map(|i| {
                let u = i as f64 * h;
                f.central_at(&[u]) * Complex64::from_polar(h, -mu[0] * u)
            })
            .sum();
        let c = f.central_fourier(&mu);
        assert_abs_diff_eq!((q - c).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn horizontal_fourier_against_quadrature() {
        let f = sample();
        let eta = [0.9, -1.4];
        let h = 0.02;
        let mut q = Complex64::new(0.0, 0.0);
        for i in -400..400 {
            for j in -400..400 {
                let x = [i as f64 * h, j as f64 * h];
                q += f.horizontal_at(&x) * Complex64::from_polar(h * h, -(eta[0] * x[0] + eta[1] * x[1]));
            }
        }
        assert_abs_diff_eq!((q - f.horizontal_fourier(&eta)).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn dilation_is_pointwise() {
        let f = sample();
        let g = f.dilate(1.7).unwrap();
        let (x, u) = ([0.2, 0.5], [-0.3]);
        let lhs = g.eval(&x, &u);
        let rhs = f.eval(&[1.7 * 0.2, 1.7 * 0.5], &[1.7 * 1.7 * -0.3]);
        assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-14);
        assert!(f.dilate(0.0).is_err());
    }

    #[test]
    fn gamma_half() {
        assert_abs_diff_eq!(gamma_half_integer(1), PI.sqrt());
        assert_abs_diff_eq!(gamma_half_integer(4), 1.0);
        assert_abs_diff_eq!(gamma_half_integer(5), 0.75 * PI.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(gamma_half_integer(6), 2.0);
    }
}
