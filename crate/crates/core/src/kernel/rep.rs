//! Finite-dimensional representations and the averaged operators
//! `Pi(phi_t) v = int phi_t(g) pi(g) v dg`.

use serde::Serialize;

use super::{kernel_config, DiracKernel};
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};
use crate::haar::{integrate_vec, IntegrationConfig, Truncation, VectorIntegral};

pub trait Representation: Sync {
    fn group(&self) -> &Group;
    fn dim(&self) -> usize;
    /// `out = pi(g) v`.
    fn apply(&self, g: &GroupElement, v: &[f64], out: &mut [f64]);
    /// `k` with `|pi(g) v| <= ||g||^k |v|`.
    fn norm_degree(&self) -> i32;
    fn name(&self) -> String;
}

pub struct TrivialRep {
    group: Group,
    dim: usize,
}

impl TrivialRep {
    pub fn new(group: &Group, dim: usize) -> Self {
        TrivialRep {
            group: group.clone(),
            dim,
        }
    }
}

impl Representation for TrivialRep {
    fn group(&self) -> &Group {
        &self.group
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, _: &GroupElement, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(v);
    }
    fn norm_degree(&self) -> i32 {
        0
    }
    fn name(&self) -> String {
        "trivial".into()
    }
}

/// `pi(g) v = g v` on `R^n`.
pub struct StandardRep {
    group: Group,
}

impl StandardRep {
    pub fn new(group: &Group) -> Self {
        StandardRep { group: group.clone() }
    }
}

impl Representation for StandardRep {
    fn group(&self) -> &Group {
        &self.group
    }
    fn dim(&self) -> usize {
        self.group.n()
    }
    fn apply(&self, g: &GroupElement, v: &[f64], out: &mut [f64]) {
        let m = g.matrix();
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..v.len()).map(|j| m[(i, j)] * v[j]).sum();
        }
    }
    fn norm_degree(&self) -> i32 {
        1
    }
    fn name(&self) -> String {
        "standard".into()
    }
}

/// `pi(g) S = g S g^t` on symmetric matrices, in the orthonormal coordinates
/// `S_ii` and `sqrt 2 S_ij` (`i < j`).
pub struct SymSquareRep {
    group: Group,
}

impl SymSquareRep {
    pub fn new(group: &Group) -> Self {
        SymSquareRep { group: group.clone() }
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.group.n();
        let mut p: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        for i in 0..n {
            for j in i + 1..n {
                p.push((i, j));
            }
        }
        p
    }
}

impl Representation for SymSquareRep {
    fn group(&self) -> &Group {
        &self.group
    }
    fn dim(&self) -> usize {
        let n = self.group.n();
        n * (n + 1) / 2
    }
    fn apply(&self, g: &GroupElement, v: &[f64], out: &mut [f64]) {
        let n = self.group.n();
        let r2 = std::f64::consts::SQRT_2;
        let mut s = crate::group::Matrix::zeros(n, n);
        for (&(i, j), x) in self.pairs().iter().zip(v) {
            if i == j {
                s[(i, i)] = *x;
            } else {
                s[(i, j)] = x / r2;
                s[(j, i)] = x / r2;
            }
        }
        let m = g.matrix();
        let image = m * s * m.transpose();
        for (&(i, j), o) in self.pairs().iter().zip(out.iter_mut()) {
            *o = if i == j { image[(i, i)] } else { image[(i, j)] * r2 };
        }
    }
    fn norm_degree(&self) -> i32 {
        2
    }
    fn name(&self) -> String {
        "sym2".into()
    }
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct AveragedVector {
    pub values: Vec<f64>,
    /// Per component: estimate + tail bound + normalization share.
    pub errors: Vec<f64>,
    pub evaluations: usize,
    pub radius: f64,
}

impl AveragedVector {
    /// Bound on the Euclidean norm of the error vector.
    pub fn error_norm(&self) -> f64 {
        self.errors.iter().sum()
    }
}

fn finish(kernel: &DiracKernel, r: VectorIntegral) -> AveragedVector {
    let rel = kernel.relative_error();
    AveragedVector {
        errors: r
            .errors
            .iter()
            .zip(&r.values)
            .map(|(e, v)| e + r.truncated_tail_bound + v.abs() * rel)
            .collect(),
        values: r.values,
        evaluations: r.evaluations,
        radius: r.radius,
    }
}

fn check_dim(rep: &dyn Representation, v: &[f64]) -> Result<()> {
    if v.len() == rep.dim() {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: rep.dim(),
            got: v.len(),
        })
    }
}

/// `Pi(phi_t) v`.
///
/// On non-compact groups the integral is repeated on a box one and a half
/// times larger; a change beyond four times the combined error is reported
/// as divergence.
pub fn average_representation(
    kernel: &DiracKernel,
    rep: &dyn Representation,
    v: &[f64],
    cfg: &IntegrationConfig,
) -> Result<AveragedVector> {
    check_dim(rep, v)?;
    let group = kernel.group();
    let cfg = kernel_config(kernel.gauge(), kernel.t, cfg);
    let env = kernel
        .envelope()
        .with_growth(euclid(v).max(f64::MIN_POSITIVE), rep.norm_degree() as f64);
    let m = rep.dim();
    let f = |g: &GroupElement, out: &mut [f64]| {
        rep.apply(g, v, out);
        let phi = kernel.eval(g);
        out.iter_mut().for_each(|o| *o *= phi);
    };
    let first = finish(kernel, integrate_vec(group, m, f, &env, None, &cfg)?);
    if group.kind().is_compact() {
        return Ok(first);
    }
    let wider = IntegrationConfig {
        truncation: Truncation::Radius(first.radius * 1.5),
        ..cfg.clone()
    };
    let second = finish(kernel, integrate_vec(group, m, f, &env, None, &wider)?);
    let change: f64 = first
        .values
        .iter()
        .zip(&second.values)
        .map(|(a, b)| (a - b).abs())
        .sum();
    let budget = 4.0 * (first.error_norm() + second.error_norm()) + 1e-14 * euclid(&first.values);
    if change > budget {
        return Err(Error::Divergence { change, budget });
    }
    Ok(first)
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitReport {
    /// `pi(g) Pi(phi_t) v`.
    pub lhs: Vec<f64>,
    /// `int phi_t(g^-1 x) pi(x) v dx`.
    pub rhs: Vec<f64>,
    pub deviation: f64,
    pub combined_error: f64,
}

impl OrbitReport {
    pub fn within_error(&self) -> bool {
        self.deviation <= self.combined_error
    }
}

/// Compares `pi(g) Pi(phi_t) v` with `Pi(L_g phi_t) v`.
pub fn orbit_identity_check(
    kernel: &DiracKernel,
    rep: &dyn Representation,
    v: &[f64],
    g: &GroupElement,
    cfg: &IntegrationConfig,
) -> Result<OrbitReport> {
    check_dim(rep, v)?;
    let m = rep.dim();
    let avg = average_representation(kernel, rep, v, cfg)?;
    let mut lhs = vec![0.0; m];
    rep.apply(g, &avg.values, &mut lhs);
    let gn = g.norm().powi(rep.norm_degree());
    let lhs_error = gn * avg.error_norm();

    let kcfg = kernel_config(kernel.gauge(), kernel.t, cfg);
    let env = kernel
        .envelope()
        .with_growth(euclid(v).max(f64::MIN_POSITIVE) * gn, rep.norm_degree() as f64);
    let g_inv = g.inverse();
    let f = |x: &GroupElement, out: &mut [f64]| {
        rep.apply(x, v, out);
        let phi = kernel.eval(&g_inv.mul(x));
        out.iter_mut().for_each(|o| *o *= phi);
    };
    let rhs = finish(kernel, integrate_vec(kernel.group(), m, f, &env, Some(g), &kcfg)?);
    let diff: Vec<f64> = lhs.iter().zip(&rhs.values).map(|(a, b)| a - b).collect();
    Ok(OrbitReport {
        deviation: euclid(&diff),
        combined_error: lhs_error + rhs.error_norm(),
        lhs,
        rhs: rhs.values,
    })
}
