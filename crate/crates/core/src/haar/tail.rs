//! Tail bounds for integrals truncated to a norm ball.
//!
//! An [`Envelope`] bounds the integrand by `A ||g||^m e^{-tau (||g|| - sqrt n)_+^p}`,
//! or with `logarithmic` set by `A ||g||^m e^{-tau (log ||g|| - log sqrt n)_+^p}`.
//! Outside the ball of radius `N` the mass is split into dyadic shells
//! `N 2^j < ||g|| <= N 2^{j+1}`, each bounded by the chart box volume at the
//! outer radius times the sup of the envelope on the shell.

use super::chart::Chart;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub amplitude: f64,
    pub degree: f64,
    pub rate: f64,
    pub exponent: f64,
    pub logarithmic: bool,
}

impl Envelope {
    /// Envelope of `e^{-t^2 rho_p}`, using `rho_p(g) >= (||g|| - sqrt n)_+^p`.
    pub fn kernel(t: f64, p: f64) -> Self {
        Envelope {
            amplitude: 1.0,
            degree: 0.0,
            rate: t * t,
            exponent: p,
            logarithmic: false,
        }
    }

    /// A bounded integrand with no decay; only usable on compact groups.
    pub fn bounded(sup: f64) -> Self {
        Envelope {
            amplitude: sup,
            degree: 0.0,
            rate: 0.0,
            exponent: 1.0,
            logarithmic: false,
        }
    }

    /// `amplitude e^{-rate (log ||g|| - log sqrt n)_+^exponent}`.
    pub fn log_decay(amplitude: f64, rate: f64, exponent: f64) -> Self {
        Envelope {
            amplitude,
            degree: 0.0,
            rate,
            exponent,
            logarithmic: true,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Envelope {
            amplitude: self.amplitude * factor,
            ..self
        }
    }

    /// Multiplies by a factor bounded by `c ||g||^k`.
    pub fn with_growth(self, c: f64, k: f64) -> Self {
        Envelope {
            amplitude: self.amplitude * c,
            degree: self.degree + k,
            ..self
        }
    }

    /// `ln` of the envelope's sup over the shell `lo < ||g|| <= hi`.
    fn log_shell_sup(&self, lo: f64, hi: f64, sqrt_n: f64) -> f64 {
        let excess = if self.logarithmic {
            (lo.ln() - sqrt_n.ln()).max(0.0)
        } else {
            (lo - sqrt_n).max(0.0)
        };
        self.amplitude.ln() + self.degree * hi.ln() - self.rate * excess.powf(self.exponent)
    }
}

/// Bound on the integral of `|f|` outside `||g|| <= radius`.
pub fn tail_bound(chart: &Chart, envelope: &Envelope, radius: f64) -> f64 {
    if chart.is_compact() {
        return 0.0;
    }
    if envelope.rate <= 0.0 {
        return f64::INFINITY;
    }
    let sqrt_n = (chart.group().n() as f64).sqrt();
    let mut total = 0.0;
    let mut lo = radius;
    for j in 0..200 {
        let hi = 2.0 * lo;
        let log_term = chart.box_volume(hi).ln() + envelope.log_shell_sup(lo, hi, sqrt_n);
        let term = log_term.exp();
        total += term;
        if j > 0 && (term <= 1e-17 * total || log_term < -745.0) {
            return total;
        }
        if !hi.is_finite() {
            break;
        }
        lo = hi;
    }
    f64::INFINITY
}

/// Smallest radius on a geometric grid whose tail bound is at most `tol`.
pub fn truncation_radius(chart: &Chart, envelope: &Envelope, tol: f64) -> Result<f64> {
    let sqrt_n = (chart.group().n() as f64).sqrt();
    if chart.is_compact() {
        return Ok(sqrt_n);
    }
    let mut radius = sqrt_n;
    while radius < 1e8 {
        radius *= 1.05;
        if tail_bound(chart, envelope, radius) <= tol {
            return Ok(radius);
        }
    }
    Err(Error::Truncation(format!(
        "no radius below 1e8 brings the tail bound under {tol:e} on {}",
        chart.group().name()
    )))
}
