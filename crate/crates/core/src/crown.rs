//! The kernel on the complexified domain
//! `Xi_n = GL_n(R) exp(i Omega / (n + 1)) K_C`, `K_C = O(n, C)`.
//!
//! `|z|^2` continues holomorphically as `q(z) = tr(z^t z)` (no conjugation),
//! which is right `K_C`-invariant. The estimates (p1), (p2), (u2) and (fs)
//! are evaluated over sampled pairs `(g, q)` and their constants fitted as
//! extrema; nothing here asserts a constant a priori.
//!
//! Powers `|g|^{2k}` and `||g||^{4n}` are divided out before exponentiation,
//! so the ratios stay in range for `||g||` up to `10^3` and `n <= 3`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{frobenius_gauge, ComplexMatrix, Group, GroupElement, GroupExt, Matrix};
use crate::kernel::DiracKernel;

/// `q(z) = sum z_ij^2`.
pub fn holo_square_gauge(z: &ComplexMatrix) -> Complex64 {
    z.iter().map(|w| w * w).sum()
}

fn complexify(m: &Matrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

fn complex_inverse(z: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !z.iter().all(|w| w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Singular);
    }
    let inv = z.clone().try_inverse().ok_or(Error::Singular)?;
    if inv.iter().all(|w| w.re.is_finite() && w.im.is_finite()) {
        Ok(inv)
    } else {
        Err(Error::Singular)
    }
}

/// Holomorphic continuation `C_t exp(-t^2 (q(z - 1)^{p/2} + q(z^-1 - 1)^{p/2}))`.
#[derive(Clone, Debug, Serialize)]
pub struct HoloKernel {
    pub t: f64,
    pub p: u32,
    pub c_t: f64,
}

impl HoloKernel {
    pub fn new(t: f64, p: u32, c_t: f64) -> Result<Self> {
        if p == 0 || p % 2 == 1 {
            return Err(Error::Config(format!(
                "gauge exponent must be even and positive, got {p}"
            )));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("t must be positive, got {t}")));
        }
        if !(c_t > 0.0 && c_t.is_finite()) {
            return Err(Error::Config(format!("normalization must be positive, got {c_t}")));
        }
        Ok(HoloKernel { t, p, c_t })
    }

    pub fn from_kernel(kernel: &DiracKernel) -> Self {
        HoloKernel {
            t: kernel.t,
            p: kernel.p,
            c_t: kernel.c_t,
        }
    }

    /// `q(z - 1)^{p/2} + q(z^-1 - 1)^{p/2}`.
    pub fn exponent(&self, z: &ComplexMatrix) -> Result<Complex64> {
        let n = z.nrows();
        let id = ComplexMatrix::identity(n, n);
        let inv = complex_inverse(z)?;
        let half = (self.p / 2) as i32;
        Ok(holo_square_gauge(&(z - &id)).powi(half) + holo_square_gauge(&(inv - id)).powi(half))
    }

    /// `log phi_t(z)`, with the imaginary part not reduced mod `2 pi`.
    pub fn log_eval(&self, z: &ComplexMatrix) -> Result<Complex64> {
        Ok(Complex64::new(self.c_t.ln(), 0.0) - self.exponent(z)? * (self.t * self.t))
    }

    pub fn eval(&self, z: &ComplexMatrix) -> Result<Complex64> {
        Ok(self.log_eval(z)?.exp())
    }
}

/// See [`HoloKernel::eval`].
pub fn holo_kernel_eval(kernel: &HoloKernel, z: &ComplexMatrix) -> Result<Complex64> {
    kernel.eval(z)
}

/// Largest relative Cauchy-Riemann defect `|df/dx + i df/dy|` over the
/// entries of `z`, by central differences with step `h`.
pub fn cauchy_riemann_residual<F>(f: F, z: &ComplexMatrix, h: f64) -> Result<f64>
where
    F: Fn(&ComplexMatrix) -> Result<Complex64>,
{
    let f0 = f(z)?;
    let mut worst = 0.0f64;
    let mut scale = f0.norm();
    let mut defects = Vec::new();
    for idx in 0..z.len() {
        let shifted = |dz: Complex64| {
            let mut w = z.clone();
            w[idx] += dz;
            f(&w)
        };
        let dx = (shifted(Complex64::new(h, 0.0))? - shifted(Complex64::new(-h, 0.0))?) / (2.0 * h);
        let dy = (shifted(Complex64::new(0.0, h))? - shifted(Complex64::new(0.0, -h))?) / (2.0 * h);
        scale = scale.max(dx.norm());
        defects.push((dx + Complex64::i() * dy).norm());
    }
    for d in defects {
        worst = worst.max(d / scale);
    }
    Ok(worst)
}

/// `n` angles of `Omega`, optionally carrying the `1 / (n + 1)` factor.
#[derive(Clone, Debug, Serialize)]
pub struct OmegaPoint {
    pub n: usize,
    pub theta: Vec<f64>,
    pub scaled: bool,
}

impl OmegaPoint {
    pub fn new(theta: Vec<f64>, scaled: bool) -> Result<Self> {
        let n = theta.len();
        let bound = Self::bound(n, scaled);
        if let Some(bad) = theta.iter().find(|x| !(x.abs() < bound)) {
            return Err(Error::Config(format!("angle {bad} outside |theta| < {bound}")));
        }
        Ok(OmegaPoint { n, theta, scaled })
    }

    /// `pi / 4`, or `pi / (4 (n + 1))` when scaled.
    pub fn bound(n: usize, scaled: bool) -> f64 {
        let quarter = std::f64::consts::FRAC_PI_4;
        if scaled {
            quarter / (n + 1) as f64
        } else {
            quarter
        }
    }

    /// `exp(i diag(theta))`.
    pub fn torus_element(&self) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.n,
            self.theta.iter().map(|&x| Complex64::from_polar(1.0, x)),
        ))
    }
}

/// `q = h exp(i diag(theta)) k`.
#[derive(Clone, Debug)]
pub struct CrownPoint {
    pub h: GroupElement,
    pub omega: OmegaPoint,
    pub k: ComplexMatrix,
    pub product: ComplexMatrix,
}

impl CrownPoint {
    pub fn new(h: GroupElement, omega: OmegaPoint, k: ComplexMatrix) -> Result<Self> {
        let n = h.group().n();
        if omega.n != n || k.nrows() != n || k.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: omega.n,
            });
        }
        let product = complexify(h.matrix()) * omega.torus_element() * &k;
        Ok(CrownPoint { h, omega, k, product })
    }

    /// `|k k^t - 1|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.k.nrows();
        let defect = &self.k * self.k.transpose() - ComplexMatrix::identity(n, n);
        defect.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Product of complex plane rotations over every coordinate pair, with
/// `|Im angle| <= max_imag`, times a reflection half of the time.
pub fn random_complex_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R, max_imag: f64) -> ComplexMatrix {
    let mut k = ComplexMatrix::identity(n, n);
    for _ in 0..2 {
        for i in 0..n {
            for j in i + 1..n {
                let angle = Complex64::new(
                    rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
                    rng.random_range(-max_imag..=max_imag),
                );
                let (c, s) = (angle.cos(), angle.sin());
                let mut rot = ComplexMatrix::identity(n, n);
                rot[(i, i)] = c;
                rot[(j, j)] = c;
                rot[(i, j)] = -s;
                rot[(j, i)] = s;
                k = k * rot;
            }
        }
    }
    if rng.random::<bool>() {
        k.row_mut(0).neg_mut();
    }
    k
}

/// Imaginary parts of the rotation angles in [`sample_crown`].
pub const CROWN_MAX_IMAG: f64 = 0.5;

/// `count` points with `||h|| <= radius`, `theta` uniform in the scaled
/// `Omega` shrunk by `1 - margin`, and `k` from [`random_complex_orthogonal`].
pub fn sample_crown(group: &Group, count: usize, margin: f64, radius: f64, seed: u64) -> Result<Vec<CrownPoint>> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::Config(format!("margin must lie in (0, 1), got {margin}")));
    }
    let n = group.n();
    if !(radius >= (n as f64).sqrt()) {
        return Err(Error::Config(format!("radius must be at least sqrt(n), got {radius}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_width = (1.0 - margin) * OmegaPoint::bound(n, true);
    (0..count)
        .map(|_| {
            let h = group.sample(&mut rng, radius);
            let theta = (0..n).map(|_| rng.random_range(-half_width..=half_width)).collect();
            let k = random_complex_orthogonal(n, &mut rng, CROWN_MAX_IMAG);
            CrownPoint::new(h, OmegaPoint::new(theta, true)?, k)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateId {
    P1,
    P2,
    U2,
    Fs,
}

impl EstimateId {
    pub fn label(self) -> &'static str {
        match self {
            EstimateId::P1 => "p1",
            EstimateId::P2 => "p2",
            EstimateId::U2 => "u2",
            EstimateId::Fs => "fs",
        }
    }
}

impl std::str::FromStr for EstimateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p1" => Ok(EstimateId::P1),
            "p2" => Ok(EstimateId::P2),
            "u2" => Ok(EstimateId::U2),
            "fs" => Ok(EstimateId::Fs),
            other => Err(Error::Config(format!(
                "unknown estimate `{other}`; expected p1, p2, u2 or fs"
            ))),
        }
    }
}

/// Per power `k` for p1, p2 and u2.
#[derive(Clone, Debug, Serialize)]
pub struct PowerSummary {
    pub k: u32,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub estimate_id: EstimateId,
    /// Number of `(g, q, k)` evaluations.
    pub samples: usize,
    /// C1, C2 (minimum ratio), C3 (maximum ratio) or C (minimum decay rate).
    pub fitted_constant: f64,
    /// Least favourable ratio: the minimum for p1, p2, fs; for u2 the largest
    /// `Re(tr^k) / |tr|^k`, which must stay at most 1.
    pub worst_ratio: f64,
    pub violations: usize,
    pub by_power: Vec<PowerSummary>,
}

impl EstimateReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.fitted_constant > 0.0 && self.fitted_constant.is_finite()
    }
}

fn check_k_max(k_max: u32, limit: usize, what: &str) -> Result<()> {
    if k_max == 0 || k_max as usize > limit {
        return Err(Error::Config(format!(
            "{what}: k_max must lie in 1..={limit}, got {k_max}"
        )));
    }
    Ok(())
}

fn lower_estimate<F>(
    id: EstimateId,
    points: &[CrownPoint],
    g_samples: &[GroupElement],
    k_max: u32,
    pair: F,
) -> Result<EstimateReport>
where
    F: Fn(&GroupElement, &CrownPoint) -> Result<Complex64>,
{
    // pair returns q(.) / |.|^2 for the relevant matrices
    let mut by_power: Vec<PowerSummary> = (1..=k_max)
        .map(|k| PowerSummary {
            k,
            min_ratio: f64::INFINITY,
            max_ratio: f64::NEG_INFINITY,
            violations: 0,
        })
        .collect();
    for g in g_samples {
        for q in points {
            let w = pair(g, q)?;
            for s in by_power.iter_mut() {
                let ratio = w.powi(s.k as i32).re;
                s.min_ratio = s.min_ratio.min(ratio);
                s.max_ratio = s.max_ratio.max(ratio);
                if !(ratio > 0.0) {
                    s.violations += 1;
                }
            }
        }
    }
    let fitted = by_power.iter().map(|s| s.min_ratio).fold(f64::INFINITY, f64::min);
    Ok(EstimateReport {
        estimate_id: id,
        samples: g_samples.len() * points.len() * k_max as usize,
        fitted_constant: fitted,
        worst_ratio: fitted,
        violations: by_power.iter().map(|s| s.violations).sum(),
        by_power,
    })
}

/// (p1): `Re(q(g q)^k) >= C1 |g|^{2k}` for `k <= k_max <= 2n`.
pub fn check_p1(points: &[CrownPoint], g_samples: &[GroupElement], k_max: u32) -> Result<EstimateReport> {
    let n = points.first().map_or(1, |q| q.omega.n);
    check_k_max(k_max, 2 * n, "p1")?;
    lower_estimate(EstimateId::P1, points, g_samples, k_max, |g, q| {
        let z = complexify(g.matrix()) * &q.product;
        Ok(holo_square_gauge(&z) / frobenius_gauge(g.matrix()).powi(2))
    })
}

/// (p2): `Re(q((g q)^-1)^k) >= C2 |g^-1|^{2k}` for `k <= k_max <= 2n`.
pub fn check_p2(points: &[CrownPoint], g_samples: &[GroupElement], k_max: u32) -> Result<EstimateReport> {
    let n = points.first().map_or(1, |q| q.omega.n);
    check_k_max(k_max, 2 * n, "p2")?;
    lower_estimate(EstimateId::P2, points, g_samples, k_max, |g, q| {
        let z = complex_inverse(&(complexify(g.matrix()) * &q.product))?;
        Ok(holo_square_gauge(&z) / frobenius_gauge(g.inverse_matrix()).powi(2))
    })
}

/// (u2): `Re(tr(g q)^k) <= |tr(g q)|^k <= C3 |g|^k` for `k <= k_max <= 4n`.
pub fn check_u2(points: &[CrownPoint], g_samples: &[GroupElement], k_max: u32) -> Result<EstimateReport> {
    let n = points.first().map_or(1, |q| q.omega.n);
    check_k_max(k_max, 4 * n, "u2")?;
    let mut by_power: Vec<PowerSummary> = (1..=k_max)
        .map(|k| PowerSummary {
            k,
            min_ratio: f64::INFINITY,
            max_ratio: f64::NEG_INFINITY,
            violations: 0,
        })
        .collect();
    let mut worst_first = f64::NEG_INFINITY;
    for g in g_samples {
        let gauge = frobenius_gauge(g.matrix());
        for q in points {
            let tr = (complexify(g.matrix()) * &q.product).trace() / gauge;
            for s in by_power.iter_mut() {
                let power = tr.powi(s.k as i32);
                let modulus = power.norm();
                // first inequality, normalized by |tr|^k
                let first = if modulus > 0.0 { power.re / modulus } else { 0.0 };
                worst_first = worst_first.max(first);
                s.min_ratio = s.min_ratio.min(modulus);
                s.max_ratio = s.max_ratio.max(modulus);
                if first > 1.0 + 1e-12 || !modulus.is_finite() {
                    s.violations += 1;
                }
            }
        }
    }
    let fitted = by_power.iter().map(|s| s.max_ratio).fold(0.0, f64::max);
    Ok(EstimateReport {
        estimate_id: EstimateId::U2,
        samples: g_samples.len() * points.len() * k_max as usize,
        fitted_constant: fitted,
        worst_ratio: worst_first,
        violations: by_power.iter().map(|s| s.violations).sum(),
        by_power,
    })
}

/// (fs): `-log |phi_t(g q)| / ||g||^{4n}` over samples with `||g|| >= 2 sqrt(n)`;
/// the fitted `C` is its minimum and a sample violates when it is not positive.
pub fn check_fs(kernel: &HoloKernel, points: &[CrownPoint], g_samples: &[GroupElement]) -> Result<EstimateReport> {
    let mut fitted = f64::INFINITY;
    let mut violations = 0;
    let mut samples = 0;
    for g in g_samples {
        let n = g.group().n();
        let norm = g.norm();
        if norm < 2.0 * (n as f64).sqrt() {
            continue;
        }
        let scale = norm.powi(4 * n as i32);
        for q in points {
            let z = complexify(g.matrix()) * &q.product;
            let decay = -kernel.log_eval(&z)?.re / scale;
            samples += 1;
            fitted = fitted.min(decay);
            if !(decay > 0.0) {
                violations += 1;
            }
        }
    }
    Ok(EstimateReport {
        estimate_id: EstimateId::Fs,
        samples,
        fitted_constant: fitted,
        worst_ratio: fitted,
        violations,
        by_power: Vec::new(),
    })
}
