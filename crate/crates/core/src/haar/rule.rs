//! One-dimensional rules: Gauss-Legendre, optionally through a sinh map
//! `x = c + w sinh(u)` that clusters nodes near `c` and reaches far into
//! long boxes with few points. Periodic axes use the trapezoid rule.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Clone, Debug)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisRule {
    /// Plain Gauss-Legendre on `[lo, hi]`.
    pub fn linear(n: usize, lo: f64, hi: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        AxisRule {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|v| v * half).collect(),
        }
    }

    /// Midpoint (trapezoid) rule for a periodic integrand over one period `[lo, hi]`.
    pub fn periodic(n: usize, lo: f64, hi: f64) -> Self {
        let h = (hi - lo) / n as f64;
        AxisRule {
            nodes: (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect(),
            weights: vec![h; n],
        }
    }

    /// Gauss-Legendre in `u` on `[lo, hi]` mapped by `x = center + scale sinh(u)`.
    pub fn sinh(n: usize, lo: f64, hi: f64, center: f64, scale: f64) -> Self {
        let u_lo = ((lo - center) / scale).asinh();
        let u_hi = ((hi - center) / scale).asinh();
        let base = Self::linear(n, u_lo, u_hi);
        AxisRule {
            nodes: base.nodes.iter().map(|u| center + scale * u.sinh()).collect(),
            weights: base
                .nodes
                .iter()
                .zip(&base.weights)
                .map(|(u, w)| w * scale * u.cosh())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
