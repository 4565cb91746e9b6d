//! Quadrature settings and the elementary rules built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gauss_hermite;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Quadrature {
    /// Relative size of the dropped tails (τ).
    pub tail_tol: f64,
    /// Node spacing of the line rule for λ = 0.
    pub line_step: f64,
    /// Nodes per helix period in the X-ray line rule (λ ≠ 0).
    pub period_nodes: usize,
    /// Nodes of the periodic loop rule (holonomy, 𝒥).
    pub loop_nodes: usize,
    /// Gauss–Hermite order per dimension; 0 picks L + 4 automatically.
    pub gh_order: usize,
    /// Horizontal trapezoid spacing for volume integrals over x.
    pub grid_step: f64,
    /// Nodes over one central period π|λ|^{-2} along λ̂.
    pub central_nodes: usize,
    /// Trapezoid spacing across λ̂ in the centre.
    pub central_step: f64,
    /// Hard cap on the number of integrand evaluations of a single volume integral.
    pub max_evals: u64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            tail_tol: 1e-14,
            line_step: 0.05,
            period_nodes: 96,
            loop_nodes: 256,
            gh_order: 0,
            grid_step: 0.3,
            central_nodes: 24,
            central_step: 0.5,
            max_evals: 40_000_000_000,
        }
    }
}

impl Quadrature {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.tail_tol, self.line_step, self.grid_step, self.central_step];
        if pos.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Invalid("quadrature steps and tolerances must be positive".into()));
        }
        if self.period_nodes < 8 || self.loop_nodes < 8 || self.central_nodes < 8 {
            return Err(Error::Invalid("quadrature node counts must be at least 8".into()));
        }
        Ok(())
    }

    /// Every node count doubled, every step halved.
    pub fn refined(&self) -> Self {
        Self {
            tail_tol: self.tail_tol,
            line_step: self.line_step / 2.0,
            period_nodes: self.period_nodes * 2,
            loop_nodes: self.loop_nodes * 2,
            gh_order: if self.gh_order == 0 { 0 } else { self.gh_order * 2 },
            grid_step: self.grid_step / 2.0,
            central_nodes: self.central_nodes * 2,
            central_step: self.central_step / 2.0,
            max_evals: self.max_evals,
        }
    }

    pub fn gh_order_for(&self, l_max: usize) -> usize {
        if self.gh_order == 0 {
            l_max + 4
        } else {
            self.gh_order
        }
    }

    /// √(ln(1/τ)), the Gaussian radius multiplier.
    pub fn log_tail(&self) -> f64 {
        (1.0 / self.tail_tol).ln().sqrt()
    }
}

/// Tensor Gauss–Hermite nodes for weight e^{−|t|²} in `dim` dimensions, with the weights
/// multiplied by e^{|t|²} so the rule integrates plain functions decaying like the weight.
pub fn gauss_hermite_tensor(dim: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    let (x, w) = gauss_hermite(order);
    let ew: Vec<f64> = x.iter().zip(&w).map(|(xi, wi)| wi * (xi * xi).exp()).collect();
    let total = order.pow(dim as u32);
    (0..total)
        .map(|mut k| {
            let mut node = Vec::with_capacity(dim);
            let mut weight = 1.0;
            for _ in 0..dim {
                let i = k % order;
                k /= order;
                node.push(x[i]);
                weight *= ew[i];
            }
            (node, weight)
        })
        .collect()
}

/// Integer lattice points h·k inside the ball |h·k − 0| ≤ r, shifted by `center`.
pub fn ball_grid(center: &[f64], radius: f64, h: f64) -> Vec<Vec<f64>> {
    let dim = center.len();
    if dim == 0 {
        return vec![vec![]];
    }
    let kmax = (radius / h).floor() as i64;
    let side = (2 * kmax + 1) as usize;
    let mut out = Vec::new();
    let mut idx = vec![-kmax; dim];
    for _ in 0..side.pow(dim as u32) {
        let r2: f64 = idx.iter().map(|&k| (k as f64 * h).powi(2)).sum();
        if r2 <= radius * radius {
            out.push(idx.iter().zip(center).map(|(&k, c)| c + k as f64 * h).collect());
        }
        for j in 0..dim {
            idx[j] += 1;
            if idx[j] <= kmax {
                break;
            }
            idx[j] = -kmax;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tensor_rule_integrates_gaussian_polynomial() {
        let rule = gauss_hermite_tensor(2, 6);
        let v: f64 = rule.iter().map(|(t, w)| w * (t[0] * t[0] * t[1] * t[1] + 1.0) * (-(t[0] * t[0] + t[1] * t[1])).exp()).sum();
        let pi = std::f64::consts::PI;
        assert_abs_diff_eq!(v, pi / 4.0 + pi, epsilon = 1e-13);
    }

    #[test]
    fn ball_grid_counts() {
        assert_eq!(ball_grid(&[0.0], 1.0, 0.5).len(), 5);
        assert_eq!(ball_grid(&[], 1.0, 0.5).len(), 1);
        let g = ball_grid(&[1.0, 1.0], 1.0, 1.0);
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn refined_doubles() {
        let q = Quadrature::default();
        let r = q.refined();
        assert_eq!(r.loop_nodes, 2 * q.loop_nodes);
        assert_abs_diff_eq!(r.grid_step, q.grid_step / 2.0);
        assert!(q.validate().is_ok());
        assert!(Quadrature { loop_nodes: 4, ..q }.validate().is_err());
    }
}
