//! The kernel `phi_t(g) = C_t e^{-t^2 rho_p(g)}` with
//! `rho_p(g) = |g - 1|^p + |g^-1 - 1|^p`, and what is checked about it.
//!
//! `C_t` is computed once by [`normalize`] and carried with its error; every
//! integral built on the kernel adds that error linearly.
//!
//! Neighborhoods of the identity are `U_r = {rho_2(g) <= 4 r^2}`. Since
//! `rho_2(exp X) = 2|X|^2 + O(|X|^3)`, on SO(2) this is the arc
//! `2|sin(theta/2)| <= r`, so `r` is close to an angle.

mod rep;

use serde::Serialize;

pub use rep::{
    average_representation, orbit_identity_check, AveragedVector, OrbitReport, Representation, StandardRep,
    SymSquareRep, TrivialRep,
};

use crate::error::{Error, Result};
use crate::group::{frobenius_gauge, Group, GroupElement, GroupExt, Matrix};
use crate::haar::{integrate, integrate_vec, Envelope, IntegralResult, IntegrationConfig};

/// Default `t` grid.
pub const DEFAULT_T_GRID: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

#[derive(Clone, Debug)]
pub struct Gauge {
    group: Group,
    p: u32,
}

impl Gauge {
    /// `p` must be even and positive.
    pub fn new(group: &Group, p: u32) -> Result<Self> {
        if p == 0 || p % 2 == 1 {
            return Err(Error::Config(format!(
                "gauge exponent must be even and positive, got {p}"
            )));
        }
        Ok(Gauge {
            group: group.clone(),
            p,
        })
    }

    /// Exponent `4n`.
    pub fn default_for(group: &Group) -> Self {
        Gauge {
            group: group.clone(),
            p: 4 * group.n() as u32,
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `p = 2` is only covered by the argument for reductive groups.
    pub fn reductive_only(&self) -> bool {
        self.p == 2
    }

    /// `rho_p(g)`; exactly symmetric in `g <-> g^-1`.
    pub fn eval(&self, g: &GroupElement) -> f64 {
        let a = distance_from_one(g.matrix());
        let b = distance_from_one(g.inverse_matrix());
        // sum in a fixed order so that swapping g and g^-1 gives the same bits
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        lo.powi(self.p as i32) + hi.powi(self.p as i32)
    }

    /// `rho_p` of a raw matrix; errors if singular.
    pub fn eval_matrix(&self, m: &Matrix) -> Result<f64> {
        let g = GroupElement::new_unchecked(self.group.clone(), m.clone())?;
        Ok(self.eval(&g))
    }

    /// Width of `e^{-t^2 rho_p}` in algebra units: `rho_p(exp X) ~ 2|X|^p`.
    pub fn bump_width(&self, t: f64) -> f64 {
        (2.0 * t * t).powf(-1.0 / self.p as f64)
    }

    pub fn envelope(&self, t: f64) -> Envelope {
        Envelope::kernel(t, self.p as f64)
    }
}

fn distance_from_one(m: &Matrix) -> f64 {
    let n = m.nrows();
    frobenius_gauge(&(m - Matrix::identity(n, n)))
}

/// `rho_2(g)`, used for the neighborhoods `U_r`.
pub fn rho2(g: &GroupElement) -> f64 {
    let a = distance_from_one(g.matrix());
    let b = distance_from_one(g.inverse_matrix());
    a * a + b * b
}

pub fn in_neighborhood(g: &GroupElement, r: f64) -> bool {
    rho2(g) <= 4.0 * r * r
}

/// Sets the sinh-map width to the kernel's bump width unless the caller chose one.
pub(crate) fn kernel_config(gauge: &Gauge, t: f64, cfg: &IntegrationConfig) -> IntegrationConfig {
    IntegrationConfig {
        scale: Some(cfg.scale.unwrap_or_else(|| gauge.bump_width(t))),
        ..cfg.clone()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiracKernel {
    #[serde(skip)]
    gauge: Gauge,
    pub p: u32,
    pub t: f64,
    pub c_t: f64,
    pub c_t_error: f64,
    /// `int e^{-t^2 rho}` and its error (estimate plus tail bound).
    pub mass: IntegralResult,
    pub cfg_used: IntegrationConfig,
}

/// Computes `C_t = 1 / int_G e^{-t^2 rho_p}`.
pub fn normalize(gauge: &Gauge, t: f64, cfg: &IntegrationConfig) -> Result<DiracKernel> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("t must be positive, got {t}")));
    }
    let cfg = kernel_config(gauge, t, cfg);
    let g2 = gauge.clone();
    let mass = integrate(
        gauge.group(),
        move |g| (-t * t * g2.eval(g)).exp(),
        &gauge.envelope(t),
        &cfg,
    )?;
    if !(mass.value > 0.0) {
        return Err(Error::Truncation(format!("non-positive kernel mass {}", mass.value)));
    }
    let z = mass.value;
    Ok(DiracKernel {
        gauge: gauge.clone(),
        p: gauge.p,
        t,
        c_t: 1.0 / z,
        c_t_error: mass.total_error() / (z * z),
        mass,
        cfg_used: cfg,
    })
}

impl DiracKernel {
    pub fn gauge(&self) -> &Gauge {
        &self.gauge
    }

    pub fn group(&self) -> &Group {
        self.gauge.group()
    }

    /// `phi_t(g)`; in `(0, C_t]`, maximal at the identity.
    pub fn eval(&self, g: &GroupElement) -> f64 {
        self.c_t * (-self.t * self.t * self.gauge.eval(g)).exp()
    }

    /// `ln phi_t(g)`; finite wherever `phi_t` itself underflows to 0.
    pub fn log_eval(&self, g: &GroupElement) -> f64 {
        self.c_t.ln() - self.t * self.t * self.gauge.eval(g)
    }

    /// Envelope of `phi_t` (with room for the normalization error).
    pub fn envelope(&self) -> Envelope {
        self.gauge.envelope(self.t).scaled(self.c_t + self.c_t_error)
    }

    /// Relative error contributed by `C_t`.
    pub fn relative_error(&self) -> f64 {
        self.c_t_error / self.c_t
    }
}

/// Adds the normalization error to an integral of `phi_t * h`.
fn with_normalization(kernel: &DiracKernel, r: IntegralResult) -> IntegralResult {
    IntegralResult {
        error_estimate: r.error_estimate + r.value.abs() * kernel.relative_error(),
        ..r
    }
}

/// `(phi_t * f)(g) = int phi_t(x) f(x^-1 g) dx` for `|f| <= f_bound`.
pub fn convolve<F>(
    kernel: &DiracKernel,
    f: F,
    f_bound: f64,
    g: &GroupElement,
    cfg: &IntegrationConfig,
) -> Result<IntegralResult>
where
    F: Fn(&GroupElement) -> f64 + Sync,
{
    let cfg = kernel_config(kernel.gauge(), kernel.t, cfg);
    let env = kernel.envelope().scaled(f_bound);
    let r = integrate(kernel.group(), |x| kernel.eval(x) * f(&x.inverse().mul(g)), &env, &cfg)?;
    Ok(with_normalization(kernel, r))
}

#[derive(Clone, Debug, Serialize)]
pub struct SplittingBound {
    /// Lower bound on `rho_p` outside `U_r`: `2 (2 r^2)^{p/2}` by the power mean.
    pub r_lower: f64,
    /// Smallest `rho_p` seen on sampled points outside `U_r`.
    pub r_observed: f64,
    /// `int_{G \ U_r} e^{-rho_p / 2}`.
    pub c2: IntegralResult,
    /// `C_t e^{-t^2 R / 2} (C2 + err)` per `t`.
    pub bound: Vec<f64>,
    /// Tail mass (plus its error) within the bound, per `t >= 1`.
    pub holds: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub group: String,
    pub p: u32,
    pub t_grid: Vec<f64>,
    pub neighborhoods: Vec<f64>,
    pub c_t: Vec<f64>,
    pub c_t_error: Vec<f64>,
    /// `int phi_t` recomputed on a finer rule; should be 1.
    pub mass: Vec<IntegralResult>,
    /// `tail_mass[i][j]`: mass of `phi_{t_i}` outside `U_{r_j}`.
    pub tail_mass: Vec<Vec<IntegralResult>>,
    pub monotone_in_t: Vec<bool>,
    pub splitting: Vec<SplittingBound>,
}

impl ConcentrationReport {
    /// `|int phi_t - 1|` per `t`.
    pub fn mass_defect(&self) -> Vec<f64> {
        self.mass.iter().map(|m| (m.value - 1.0).abs()).collect()
    }
}

/// Checks the Dirac-sequence axioms on a `t` grid.
///
/// (a) positivity holds by construction. (b) the mass is re-integrated with
/// one and a half times the points (or samples) and compared with 1. (c) tail
/// masses outside each `U_r` are integrated and compared across `t`, together
/// with the splitting bound `tail(t) <= C_t e^{-t^2 R/2} int_{G \ U_r} e^{-rho_p/2}`
/// valid for `t >= 1`.
pub fn dirac_check(
    gauge: &Gauge,
    t_grid: &[f64],
    radii: &[f64],
    cfg: &IntegrationConfig,
) -> Result<ConcentrationReport> {
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("t grid must be strictly increasing".into()));
    }
    let group = gauge.group();
    let refined = IntegrationConfig {
        points_per_axis: cfg.points_per_axis * 3 / 2,
        samples: cfg.samples * 3 / 2,
        seed: cfg.seed.wrapping_add(1),
        ..cfg.clone()
    };
    let mut kernels = Vec::with_capacity(t_grid.len());
    let mut mass = Vec::with_capacity(t_grid.len());
    let mut tail_mass = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let k = normalize(gauge, t, cfg)?;
        let kcfg = kernel_config(gauge, t, &refined);
        let rs = radii.to_vec();
        // component 0 is the full mass, then one tail per radius
        let parts = integrate_vec(
            group,
            rs.len() + 1,
            |g, out| {
                let phi = k.eval(g);
                let r2 = rho2(g);
                out[0] = phi;
                for (o, r) in out[1..].iter_mut().zip(&rs) {
                    *o = if r2 > 4.0 * r * r { phi } else { 0.0 };
                }
            },
            &k.envelope(),
            None,
            &kcfg,
        )?;
        mass.push(with_normalization(&k, parts.component(0)));
        tail_mass.push(
            (1..=rs.len())
                .map(|j| with_normalization(&k, parts.component(j)))
                .collect::<Vec<_>>(),
        );
        kernels.push(k);
    }
    let monotone_in_t = (0..radii.len())
        .map(|j| {
            tail_mass
                .windows(2)
                .all(|w| w[1][j].value < w[0][j].value || w[0][j].value == 0.0 && w[1][j].value == 0.0)
        })
        .collect();
    let mut splitting = Vec::with_capacity(radii.len());
    for &r in radii {
        splitting.push(splitting_bound(gauge, r, &kernels, &tail_mass, radii, cfg)?);
    }
    Ok(ConcentrationReport {
        group: group.name(),
        p: gauge.p,
        t_grid: t_grid.to_vec(),
        neighborhoods: radii.to_vec(),
        c_t: kernels.iter().map(|k| k.c_t).collect(),
        c_t_error: kernels.iter().map(|k| k.c_t_error).collect(),
        mass,
        tail_mass,
        monotone_in_t,
        splitting,
    })
}

fn splitting_bound(
    gauge: &Gauge,
    r: f64,
    kernels: &[DiracKernel],
    tail_mass: &[Vec<IntegralResult>],
    radii: &[f64],
    cfg: &IntegrationConfig,
) -> Result<SplittingBound> {
    use rand::SeedableRng;
    let group = gauge.group();
    let p = gauge.p as f64;
    let r_lower = 2.0 * (2.0 * r * r).powf(p / 2.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let cap = 4.0 * (group.n() as f64).sqrt();
    let mut r_observed = f64::INFINITY;
    for _ in 0..4000 {
        let g = group.sample(&mut rng, cap);
        if !in_neighborhood(&g, r) {
            r_observed = r_observed.min(gauge.eval(&g));
        }
    }
    let half = gauge.clone();
    let c2 = integrate(
        group,
        move |g| {
            if in_neighborhood(g, r) {
                0.0
            } else {
                (-0.5 * half.eval(g)).exp()
            }
        },
        &Envelope::kernel(std::f64::consts::FRAC_1_SQRT_2, p),
        &kernel_config(gauge, 1.0, cfg),
    )?;
    let j = radii.iter().position(|&x| x == r).expect("radius from the list");
    let mut bound = Vec::with_capacity(kernels.len());
    let mut holds = Vec::with_capacity(kernels.len());
    for (k, tails) in kernels.iter().zip(tail_mass) {
        let b = (k.c_t + k.c_t_error) * (-0.5 * k.t * k.t * r_lower).exp() * (c2.value + c2.total_error());
        let tail = &tails[j];
        holds.push(k.t < 1.0 || tail.value - tail.total_error() <= b);
        bound.push(b);
    }
    Ok(SplittingBound {
        r_lower,
        r_observed,
        c2,
        bound,
        holds,
    })
}

/// Positivity (`ln phi_t` finite and at most `ln C_t`) and exact symmetry on samples.
///
/// Positivity is checked on the logarithm: far from the identity `phi_t`
/// underflows in floating point although it is positive.
pub fn positivity_and_symmetry(kernel: &DiracKernel, samples: &[GroupElement]) -> (bool, bool) {
    let max = kernel.c_t.ln();
    let positive = samples.iter().all(|g| {
        let l = kernel.log_eval(g);
        l.is_finite() && l <= max
    });
    let symmetric = samples
        .iter()
        .all(|g| kernel.log_eval(g).to_bits() == kernel.log_eval(&g.inverse()).to_bits());
    (positive, symmetric)
}

/// `max |f(g)| e^{n d(g)}` over `samples`, with `d` a distance upper bound.
///
/// Using an upper bound for `d` makes this a lower bound for
/// `sup |f| e^{n d}` only up to the slack in `d`; it is a probe, not a
/// certificate.
pub fn seminorm_probe<F, D>(f: F, n: f64, samples: &[GroupElement], distance: D) -> Result<f64>
where
    F: Fn(&GroupElement) -> f64,
    D: Fn(&GroupElement) -> Result<f64>,
{
    let mut best = 0.0f64;
    for g in samples {
        let v = f(g).abs();
        if v == 0.0 {
            continue;
        }
        best = best.max((v.ln() + n * distance(g)?).exp());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupKind, GroupSpec};

    #[test]
    fn gauge_examples() {
        let so2 = GroupSpec::new(GroupKind::So, 2).unwrap();
        let gauge = Gauge::new(&so2, 2).unwrap();
        assert_eq!(gauge.eval(&so2.identity()), 0.0);
        for theta in [0.1f64, 1.0, 2.9, -2.0] {
            let m = Matrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
            let g = so2.element(m).unwrap();
            let want = 8.0 * (1.0 - theta.cos());
            assert!((gauge.eval(&g) - want).abs() < 1e-13 * want.max(1.0));
        }
        let gl1 = GroupSpec::new(GroupKind::Gl, 1).unwrap();
        let gauge = Gauge::new(&gl1, 4).unwrap();
        for x in [0.3, 2.0, -1.5] {
            let g = gl1.element(Matrix::from_element(1, 1, x)).unwrap();
            let want = (x - 1.0).powi(4) + (1.0 / x - 1.0).powi(4);
            assert!((gauge.eval(&g) - want).abs() < 1e-13 * want);
            assert_eq!(gauge.eval(&g).to_bits(), gauge.eval(&g.inverse()).to_bits());
        }
    }

    #[test]
    fn odd_exponent_rejected() {
        let so2 = GroupSpec::new(GroupKind::So, 2).unwrap();
        assert!(Gauge::new(&so2, 3).is_err());
        assert!(Gauge::new(&so2, 0).is_err());
        assert_eq!(Gauge::default_for(&so2).p(), 8);
    }
}
