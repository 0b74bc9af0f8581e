//! Certified upper bounds `d_ub(g) >= d(g)` for the left-invariant metric
//! with the trace form at the identity, and the inequalities that use them.
//!
//! A bound is the length of an explicit path `start exp(X_1) ... exp(X_k)`
//! traced one factor at a time; along `a exp(s X)` the speed is `|X|`, so the
//! length is `sum |X_i|`.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use super::{jordan_chevalley, log_norm, unipotent_log, DEFAULT_CLUSTER_TOL};
use crate::error::{Error, Result};
use crate::group::{expm, frobenius_gauge, GroupElement, GroupKind, Matrix};
use crate::kernel::Representation;

#[derive(Clone, Debug)]
pub struct PathSegment {
    pub label: &'static str,
    pub generator: Matrix,
}

/// `s -> start exp(X_1) ... exp(X_{j}) exp((s - j) X_{j+1})` for `s` in `[0, k]`.
#[derive(Clone, Debug)]
pub struct CertifyingPath {
    pub start: Matrix,
    pub segments: Vec<PathSegment>,
}

impl CertifyingPath {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| frobenius_gauge(&s.generator)).sum()
    }

    pub fn point(&self, s: f64) -> Matrix {
        let mut x = self.start.clone();
        for (j, seg) in self.segments.iter().enumerate() {
            let local = (s - j as f64).clamp(0.0, 1.0);
            if local == 0.0 {
                break;
            }
            x = &x * expm(&(&seg.generator * local));
        }
        x
    }

    pub fn endpoint(&self) -> Matrix {
        self.point(self.segments.len() as f64)
    }

    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        if self.start != Matrix::identity(self.start.nrows(), self.start.ncols()) {
            parts.push("sigma".into());
        }
        for seg in &self.segments {
            parts.push(format!(
                "exp(s {}) [len {:.6e}]",
                seg.label,
                frobenius_gauge(&seg.generator)
            ));
        }
        if parts.is_empty() {
            "constant".into()
        } else {
            parts.join(" . ")
        }
    }
}

#[derive(Clone, Debug)]
pub struct DistanceBound {
    pub g: GroupElement,
    pub d_ub: f64,
    /// `|log u|`.
    pub unipotent: f64,
    /// `|log k| + |log p|` from the polar factors of `r`.
    pub reductive: f64,
    /// Set when `det g < 0`; the path then starts at `diag(-1, 1, ..)`.
    pub reflected: bool,
    pub path: CertifyingPath,
    pub path_description: String,
}

/// Real logarithm of a rotation, read off its real Schur form.
///
/// `2x2` blocks give their angle; eigenvalues `-1` are paired into rotations
/// by `pi`.
fn rotation_log(k: &Matrix) -> Result<Matrix> {
    let n = k.nrows();
    let (q, t) = k.clone().schur().unpack();
    let mut l = Matrix::zeros(n, n);
    let mut minus_one = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > 1e-12 {
            let c = 0.5 * (t[(i, i)] + t[(i + 1, i + 1)]);
            let s = 0.5 * (t[(i + 1, i)] - t[(i, i + 1)]);
            let theta = s.atan2(c);
            l[(i + 1, i)] = theta;
            l[(i, i + 1)] = -theta;
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                minus_one.push(i);
            }
            i += 1;
        }
    }
    if minus_one.len() % 2 == 1 {
        return Err(Error::NotMember {
            group: format!("SO({n})"),
            residual: 2.0,
            tol: 0.0,
        });
    }
    for pair in minus_one.chunks(2) {
        l[(pair[1], pair[0])] = std::f64::consts::PI;
        l[(pair[0], pair[1])] = -std::f64::consts::PI;
    }
    let x = &q * l * q.transpose();
    Ok((&x - x.transpose()) * 0.5)
}

/// `r = k p` with `p = sqrt(r^t r)`; returns `(log k, log p)`.
fn polar_logs(r: &Matrix) -> Result<(Matrix, Matrix)> {
    let eig = SymmetricEigen::new(r.transpose() * r);
    if eig.eigenvalues.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Singular);
    }
    let v = &eig.eigenvectors;
    let half_log = eig.eigenvalues.map(|x| 0.5 * x.ln());
    let inv_sqrt = eig.eigenvalues.map(|x| 1.0 / x.sqrt());
    let log_p = v * Matrix::from_diagonal(&half_log) * v.transpose();
    let p_inv = v * Matrix::from_diagonal(&inv_sqrt) * v.transpose();
    let k = r * p_inv;
    Ok((rotation_log(&k)?, (&log_p + log_p.transpose()) * 0.5))
}

fn segment(label: &'static str, generator: Matrix, out: &mut Vec<PathSegment>) {
    if generator.iter().any(|&x| x != 0.0) {
        out.push(PathSegment { label, generator });
    }
}

/// `d_ub(g) = |log u| + |log k| + |log p|` with `g = u r` and `r = k p`.
///
/// Rotations use their angle directly and unipotent groups `|log g|`. For
/// `det g < 0` the bound is to the reflection `sigma = diag(-1, 1, ..)`, the
/// base point of that component.
pub fn distance_upper_bound(g: &GroupElement) -> Result<DistanceBound> {
    distance_upper_bound_with(g, DEFAULT_CLUSTER_TOL)
}

pub fn distance_upper_bound_with(g: &GroupElement, cluster_tol: f64) -> Result<DistanceBound> {
    let group = g.group();
    let n = group.n();
    let mut start = Matrix::identity(n, n);
    let mut segments = Vec::new();
    let (unipotent, reductive);
    let mut reflected = false;
    match group.kind() {
        GroupKind::So => {
            let x = rotation_log(g.matrix())?;
            reductive = frobenius_gauge(&x);
            unipotent = 0.0;
            segment("log g", x, &mut segments);
        }
        GroupKind::Ut | GroupKind::Heisenberg => {
            let x = unipotent_log(g.matrix())?;
            unipotent = frobenius_gauge(&x);
            reductive = 0.0;
            segment("log g", x, &mut segments);
        }
        _ => {
            let mut m = g.matrix().clone();
            if m.determinant() < 0.0 {
                start[(0, 0)] = -1.0;
                m.row_mut(0).neg_mut();
                reflected = true;
            }
            let jc = jordan_chevalley(&m, cluster_tol)?;
            let log_u = unipotent_log(&jc.u)?;
            let (log_k, log_p) = polar_logs(&jc.r)?;
            unipotent = frobenius_gauge(&log_u);
            reductive = frobenius_gauge(&log_k) + frobenius_gauge(&log_p);
            segment("log k", log_k, &mut segments);
            segment("log p", log_p, &mut segments);
            segment("log u", log_u, &mut segments);
        }
    }
    let path = CertifyingPath { start, segments };
    Ok(DistanceBound {
        g: g.clone(),
        d_ub: path.length(),
        unipotent,
        reductive,
        reflected,
        path_description: path.describe(),
        path,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    /// Smallest `R = 2^{k/4}` on the grid that works for every sample.
    pub fitted_r: Option<f64>,
    /// Samples violating the bound at the fitted (or largest) `R`.
    pub violations: Vec<usize>,
    pub n_exp: u32,
    pub samples: usize,
}

const R_GRID: std::ops::RangeInclusive<i32> = -80..=400;

/// `e^{n_exp d_ub(g)} <= R e^{R ||g||^{3n}} ||g||^R`, compared in logs.
pub fn growth_bound_check(samples: &[GroupElement], n_exp: u32) -> Result<GrowthReport> {
    let mut rows = Vec::with_capacity(samples.len());
    for g in samples {
        let d = distance_upper_bound(g)?.d_ub;
        let log_norm = g.norm().ln();
        let n = g.group().n() as f64;
        rows.push((n_exp as f64 * d, log_norm, (3.0 * n * log_norm).exp()));
    }
    let fails = |r: f64| -> Vec<usize> {
        rows.iter()
            .enumerate()
            .filter(|(_, &(lhs, log_norm, big))| lhs > r.ln() + r * big + r * log_norm)
            .map(|(i, _)| i)
            .collect()
    };
    let fitted_r = R_GRID.map(|k| 2f64.powf(k as f64 / 4.0)).find(|&r| fails(r).is_empty());
    let violations = fails(fitted_r.unwrap_or(2f64.powf(*R_GRID.end() as f64 / 4.0)));
    Ok(GrowthReport {
        fitted_r,
        violations,
        n_exp,
        samples: samples.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisNormReport {
    /// Samples with `|P|^2 > n 2^n ||g||^2`.
    pub violations: Vec<usize>,
    /// Largest `|P|^2 / (n 2^n ||g||^2)`.
    pub worst_ratio: f64,
    /// Largest `max(|P|, |P^-1|)^2 / (n 2^n ||g||^2)`; observational.
    pub worst_inverse_ratio: f64,
    pub samples: usize,
}

/// `|P|^2 <= n 2^n ||g||^2` for the unit-column eigenbasis convention.
pub fn basis_norm_check(samples: &[GroupElement], cluster_tol: f64) -> Result<BasisNormReport> {
    let mut violations = Vec::new();
    let mut worst_ratio = 0.0f64;
    let mut worst_inverse_ratio = 0.0f64;
    for (i, g) in samples.iter().enumerate() {
        let jc = jordan_chevalley(g.matrix(), cluster_tol)?;
        let n = g.group().n() as i32;
        let rhs = n as f64 * 2f64.powi(n) * g.norm().powi(2);
        let ratio = jc.basis_gauge_sq() / rhs;
        worst_ratio = worst_ratio.max(ratio);
        worst_inverse_ratio = worst_inverse_ratio.max(jc.basis_norm_sq() / rhs);
        if ratio > 1.0 {
            violations.push(i);
        }
    }
    Ok(BasisNormReport {
        violations,
        worst_ratio,
        worst_inverse_ratio,
        samples: samples.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparabilityReport {
    /// `log ||g|| <= c d_ub(g) + C`.
    pub c_fit: f64,
    #[serde(rename = "C_fit")]
    pub big_c_fit: f64,
    /// Observational lower line `c' d_ub + C' <= log ||g||`; `d_ub >= d` so it
    /// certifies nothing about `d`.
    pub lower_slope: f64,
    pub lower_offset: f64,
    pub holds: bool,
    pub samples: usize,
}

/// Fits the upper comparability line with `C = log sqrt(n)`, the value at
/// the identity, and `c` the largest slope seen.
pub fn comparability_check(samples: &[GroupElement]) -> Result<ComparabilityReport> {
    let Some(first) = samples.first() else {
        return Err(Error::Config("comparability check needs samples".into()));
    };
    if !first.group().kind().is_reductive() {
        return Err(Error::UnsupportedGroup(format!(
            "{}: comparability needs a reductive group",
            first.group().name()
        )));
    }
    let mut pts = Vec::with_capacity(samples.len());
    for g in samples {
        pts.push((distance_upper_bound(g)?.d_ub, log_norm(g.matrix())?));
    }
    let big_c = 0.5 * (first.group().n() as f64).ln();
    let c = pts
        .iter()
        .filter(|(d, _)| *d > 1e-12)
        .map(|(d, y)| (y - big_c) / d)
        .fold(0.0f64, f64::max);
    let holds = c.is_finite() && pts.iter().all(|&(d, y)| y <= c * d + big_c + 1e-12 * (1.0 + y.abs()));

    let m = pts.len() as f64;
    let (dm, ym) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / m, a.1 + p.1 / m));
    let sxx: f64 = pts.iter().map(|p| (p.0 - dm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - dm) * (p.1 - ym)).sum();
    let lower_slope = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    let lower_offset = pts
        .iter()
        .map(|&(d, y)| y - lower_slope * d)
        .fold(f64::INFINITY, f64::min);
    Ok(ComparabilityReport {
        c_fit: c,
        big_c_fit: big_c,
        lower_slope,
        lower_offset,
        holds,
        samples: samples.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RepresentationGrowth {
    /// `||pi(g)|| <= C e^{c d_ub(g)}`.
    #[serde(rename = "C")]
    pub big_c: f64,
    pub c: f64,
    pub samples: usize,
}

/// Fits `(C, c)` from operator norms; `c` is the largest `log ||pi(g)|| / d_ub`
/// and `C` absorbs what remains.
pub fn fit_representation_growth(rep: &dyn Representation, samples: &[GroupElement]) -> Result<RepresentationGrowth> {
    let m = rep.dim();
    let mut pts = Vec::with_capacity(samples.len());
    for g in samples {
        let mut op = Matrix::zeros(m, m);
        let mut e = vec![0.0; m];
        let mut out = vec![0.0; m];
        for j in 0..m {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            rep.apply(g, &e, &mut out);
            op.column_mut(j).copy_from_slice(&out);
        }
        let norm = op.singular_values().max();
        pts.push((distance_upper_bound(g)?.d_ub, norm.ln()));
    }
    let c = pts
        .iter()
        .filter(|(d, _)| *d > 1e-12)
        .map(|(d, y)| y / d)
        .fold(0.0f64, f64::max);
    let log_c = pts.iter().map(|&(d, y)| y - c * d).fold(0.0f64, f64::max);
    Ok(RepresentationGrowth {
        big_c: log_c.exp(),
        c,
        samples: samples.len(),
    })
}
