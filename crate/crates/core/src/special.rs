//! Hermite functions, Laguerre polynomials, J₀ and Gauss–Hermite rules.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// ln(k!) by direct summation; exact enough for the degrees used here (≤ a few hundred).
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc.round()
}

/// φ_k(x), the L²-normalised Hermite function.
pub fn hermite(k: usize, x: f64) -> f64 {
    hermite_all(k, x)[k]
}

/// φ_0(x) .. φ_kmax(x) by the normalised three-term recurrence.
pub fn hermite_all(kmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if kmax >= 1 {
        out.push(2f64.sqrt() * x * out[0]);
    }
    for j in 1..kmax {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * out[j] - (jf / (jf + 1.0)).sqrt() * out[j - 1];
        out.push(next);
    }
    out
}

/// Generalised Laguerre polynomial L_a^{(b)}(x); b may be negative provided a + b ≥ 0.
pub fn laguerre(a: i64, b: i64, x: f64) -> Result<f64> {
    if a < 0 || a + b < 0 {
        return Err(Error::Invalid(format!("laguerre indices a={a}, b={b}")));
    }
    Ok(laguerre_all(a as usize, b as f64, x)[a as usize])
}

/// L_0^{(b)}(x) .. L_amax^{(b)}(x).
pub fn laguerre_all(amax: usize, b: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(amax + 1);
    out.push(1.0);
    if amax >= 1 {
        out.push(1.0 + b - x);
    }
    for k in 1..amax {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + b - x) * out[k] - (kf + b) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Bessel J₀ via Miller's backward recurrence, normalised by 1 = J₀ + 2ΣJ_{2k}.
/// Switches to the Hankel asymptotic expansion for large arguments.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-300 {
        return 1.0;
    }
    if ax > 60.0 {
        return j0_asymptotic(ax);
    }
    let top = ax as usize + 40 + (10.0 * ax.sqrt()) as usize;
    let mut v = vec![0.0f64; top + 2];
    v[top] = 1e-30;
    for k in (1..=top).rev() {
        v[k - 1] = 2.0 * k as f64 / ax * v[k] - v[k + 1];
        if v[k - 1].abs() > 1e250 {
            for e in v.iter_mut() {
                *e *= 1e-250;
            }
        }
    }
    let norm: f64 = v[0] + 2.0 * v.iter().step_by(2).skip(1).sum::<f64>();
    v[0] / norm
}

fn j0_asymptotic(x: f64) -> f64 {
    // P, Q series in 1/(8x)²; terms shrink quickly for x > 60.
    let mu = 0.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let z8 = 8.0 * x;
    for k in 1..30 {
        let kk = (2 * k - 1) as f64;
        term *= (mu - kk * kk) / (k as f64 * z8);
        if k % 2 == 1 {
            q += term * if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        } else {
            p += term * if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - PI / 4.0;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Gauss–Hermite rule for weight e^{−x²}: nodes ascending, weights.
/// Golub–Welsch for the initial guess, then Newton polishing on the orthonormal recurrence.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut t = DMatrix::<f64>::zeros(order, order);
    for i in 1..order {
        let b = (i as f64 / 2.0).sqrt();
        t[(i, i - 1)] = b;
        t[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(t);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut weights = Vec::with_capacity(order);
    // enforce the exact symmetry of the rule
    for i in 0..order / 2 {
        let v = 0.5 * (nodes[order - 1 - i] - nodes[i]);
        nodes[i] = -v;
        nodes[order - 1 - i] = v;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, pm1) = orthonormal_hermite_pair(order, *x);
            let dp = (2.0 * order as f64).sqrt() * pm1;
            if dp != 0.0 {
                *x -= p / dp;
            }
        }
        let mut s = 0.0;
        let mut prev = 0.0;
        let mut cur = PI.powf(-0.25);
        for k in 0..order {
            s += cur * cur;
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * *x * cur - (kf / (kf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
        }
        weights.push(1.0 / s);
    }
    (nodes, weights)
}

/// (p̃_N(x), p̃_{N−1}(x)) for the polynomials orthonormal under e^{−x²}.
fn orthonormal_hermite_pair(order: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    for k in 0..order {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}
