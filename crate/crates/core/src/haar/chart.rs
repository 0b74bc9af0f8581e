//! Global charts with Haar densities.
//!
//! Each chart parametrizes (almost all of) a group by a box of coordinates so
//! that `int_G f dg = sum_c int f(sigma_c * to_group(x)) density(x) dx` over
//! the component representatives `sigma_c`.
//!
//! | group            | coordinates                         | density                       |
//! |------------------|-------------------------------------|-------------------------------|
//! | SO(2)            | angle `theta`                       | 1                             |
//! | SO(3)            | `(r, polar, alpha)`, `X = r * dir(polar, alpha)` | `r^2 sin(polar) 2(1 - cos w)/w^2`, `w = r/sqrt 2` |
//! | GL(n)/GL+(n)/SL(n), n <= 3 | `k * a * n` (Iwasawa)     | `density_K * e^{sum_{i<j} (s_i - s_j)}` |
//! | UT(n), HEIS      | exponential coordinates             | 1 (nilpotent `ad`)            |
//! | DIAG+(n)         | `s_i = log x_ii`                    | 1                             |
//!
//! In the Iwasawa chart `a = diag(e^{s_i})` (for SL the last entry is
//! `-sum` of the others) and `n` is upper unitriangular in matrix-entry
//! coordinates. GL(n) has a second component reached by left
//! multiplication with `diag(-1, 1, ..)`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::group::{expm, inverse, Group, GroupElement, GroupKind, Matrix};

/// Total Haar volume of SO(3) in the ball chart.
pub const SO3_VOLUME: f64 = 16.0 * SQRT_2 * PI * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisKind {
    /// Periodic angle, period `2 pi`.
    Angle,
    /// Radial coordinate of the rotation ball; identity at 0.
    Radius,
    /// Bounded direction coordinate; no preferred point.
    Direction,
    /// Periodic direction coordinate (azimuth); no preferred point.
    Azimuth,
    /// Unbounded coordinate.
    Line,
}

#[derive(Clone, Copy, Debug)]
pub struct Axis {
    pub kind: AxisKind,
    pub lo: f64,
    pub hi: f64,
}

impl Axis {
    fn angle() -> Self {
        Axis {
            kind: AxisKind::Angle,
            lo: -PI,
            hi: PI,
        }
    }
    fn line() -> Self {
        Axis {
            kind: AxisKind::Line,
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn is_centered(&self) -> bool {
        !matches!(self.kind, AxisKind::Direction | AxisKind::Azimuth)
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, AxisKind::Angle | AxisKind::Azimuth)
    }
}

#[derive(Clone, Copy, Debug)]
enum ChartKind {
    Circle,
    RotationBall,
    Iwasawa { k_dim: usize, a_dim: usize, special: bool },
    Exponential,
    Diagonal,
}

#[derive(Clone, Debug)]
pub struct Chart {
    group: Group,
    kind: ChartKind,
    axes: Vec<Axis>,
    components: Vec<Matrix>,
}

fn rotation2(theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    Matrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Basis of so(3) matching `GroupSpec` ordering: (0,1), (0,2), (1,2), each scaled by 1/sqrt 2.
fn so3_realize(c: &[f64]) -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut x = Matrix::zeros(3, 3);
    x[(0, 1)] = c[0] * s;
    x[(1, 0)] = -c[0] * s;
    x[(0, 2)] = c[1] * s;
    x[(2, 0)] = -c[1] * s;
    x[(1, 2)] = c[2] * s;
    x[(2, 1)] = -c[2] * s;
    x
}

fn ball_direction(polar: f64, alpha: f64) -> [f64; 3] {
    let (s, c) = polar.sin_cos();
    [s * alpha.cos(), s * alpha.sin(), c]
}

/// Rodrigues formula for `exp` of the so(3) element with ball coordinates.
fn ball_rotation(r: f64, polar: f64, alpha: f64) -> Matrix {
    let d = ball_direction(polar, alpha);
    let x = so3_realize(&[r * d[0], r * d[1], r * d[2]]);
    let angle = r / SQRT_2;
    let id = Matrix::identity(3, 3);
    if angle < 1e-8 {
        return id + &x + &x * &x * 0.5;
    }
    let xs = &x / angle;
    id + &xs * angle.sin() + &xs * &xs * (1.0 - angle.cos())
}

fn ball_density(r: f64, polar: f64) -> f64 {
    let angle = r / SQRT_2;
    let ratio = if angle < 1e-4 {
        1.0 - angle * angle / 12.0
    } else {
        2.0 * (1.0 - angle.cos()) / (angle * angle)
    };
    r * r * polar.sin().abs() * ratio
}

/// Ball coordinates `(r, polar, alpha)` of a rotation in SO(3).
fn ball_coords(rot: &Matrix) -> [f64; 3] {
    let cos_angle = ((rot.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = cos_angle.acos();
    // rotation vector omega with X = [omega]_x
    let skew = [
        0.5 * (rot[(2, 1)] - rot[(1, 2)]),
        0.5 * (rot[(0, 2)] - rot[(2, 0)]),
        0.5 * (rot[(1, 0)] - rot[(0, 1)]),
    ];
    let omega = if angle < 1e-6 {
        skew
    } else if PI - angle > 1e-4 {
        let f = angle / angle.sin();
        [skew[0] * f, skew[1] * f, skew[2] * f]
    } else {
        // near pi: axis from the symmetric part, sign from the skew part
        let b = (rot + Matrix::identity(3, 3)) * 0.5;
        let k = (0..3).max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)])).unwrap();
        let mut axis = [b[(0, k)], b[(1, k)], b[(2, k)]];
        let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
        axis.iter_mut().for_each(|a| *a /= norm);
        let dot: f64 = axis.iter().zip(&skew).map(|(a, s)| a * s).sum();
        let sign = if dot < 0.0 { -1.0 } else { 1.0 };
        [axis[0] * angle * sign, axis[1] * angle * sign, axis[2] * angle * sign]
    };
    // X[(0,1)] = -omega_z = c0/sqrt2, X[(0,2)] = omega_y = c1/sqrt2, X[(1,2)] = -omega_x = c2/sqrt2
    let c = [-omega[2] * SQRT_2, omega[1] * SQRT_2, -omega[0] * SQRT_2];
    let r = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r < 1e-300 {
        return [0.0, 0.0, 0.0];
    }
    [r, (c[2] / r).clamp(-1.0, 1.0).acos(), c[1].atan2(c[0])]
}

impl Chart {
    pub fn for_group(group: &Group) -> Result<Chart> {
        let n = group.n();
        let unsupported = || Error::NoChart(group.name());
        let reflection = || {
            let mut s = Matrix::identity(n, n);
            s[(0, 0)] = -1.0;
            s
        };
        let (kind, axes, components) = match group.kind() {
            GroupKind::So if n == 2 => (ChartKind::Circle, vec![Axis::angle()], vec![]),
            GroupKind::So if n == 3 => (ChartKind::RotationBall, ball_axes(), vec![]),
            GroupKind::So => return Err(unsupported()),
            GroupKind::Gl | GroupKind::GlPlus | GroupKind::Sl if n <= 3 => {
                let special = group.kind() == GroupKind::Sl;
                let mut axes = match n {
                    1 => vec![],
                    2 => vec![Axis::angle()],
                    _ => ball_axes(),
                };
                let k_dim = axes.len();
                let a_dim = if special { n - 1 } else { n };
                axes.extend((0..a_dim + n * (n - 1) / 2).map(|_| Axis::line()));
                let comps = if group.kind() == GroupKind::Gl {
                    vec![reflection()]
                } else {
                    vec![]
                };
                (ChartKind::Iwasawa { k_dim, a_dim, special }, axes, comps)
            }
            GroupKind::Gl | GroupKind::GlPlus | GroupKind::Sl => return Err(unsupported()),
            GroupKind::Ut | GroupKind::Heisenberg => (ChartKind::Exponential, vec![Axis::line(); group.dim()], vec![]),
            GroupKind::DiagPlus => (ChartKind::Diagonal, vec![Axis::line(); n], vec![]),
        };
        let mut all = vec![Matrix::identity(n, n)];
        all.extend(components);
        Ok(Chart {
            group: group.clone(),
            kind,
            axes,
            components: all,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn param_dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Left translates of the chart image covering the group; the first is the identity.
    pub fn components(&self) -> &[Matrix] {
        &self.components
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.kind, ChartKind::Circle | ChartKind::RotationBall)
    }

    /// Group matrix and its inverse at chart point `x` on component `component`.
    pub fn matrices_at(&self, x: &[f64], component: usize) -> (Matrix, Matrix) {
        let (g, inv) = match self.kind {
            ChartKind::Circle => (rotation2(x[0]), rotation2(-x[0])),
            ChartKind::RotationBall => {
                let r = ball_rotation(x[0], x[1], x[2]);
                let t = r.transpose();
                (r, t)
            }
            ChartKind::Iwasawa { k_dim, a_dim, special } => self.iwasawa(x, k_dim, a_dim, special),
            ChartKind::Exponential => {
                let xm = self.group.realize(x);
                (expm(&xm), expm(&(-xm)))
            }
            ChartKind::Diagonal => {
                let n = x.len();
                (
                    Matrix::from_fn(n, n, |i, j| if i == j { x[i].exp() } else { 0.0 }),
                    Matrix::from_fn(n, n, |i, j| if i == j { (-x[i]).exp() } else { 0.0 }),
                )
            }
        };
        if component == 0 {
            (g, inv)
        } else {
            let s = &self.components[component];
            (s * g, inv * s)
        }
    }

    pub fn element_at(&self, x: &[f64], component: usize) -> GroupElement {
        let (g, inv) = self.matrices_at(x, component);
        GroupElement::from_raw_parts(self.group.clone(), g, inv)
    }

    fn iwasawa(&self, x: &[f64], k_dim: usize, a_dim: usize, special: bool) -> (Matrix, Matrix) {
        let n = self.group.n();
        let k = match k_dim {
            0 => Matrix::identity(1, 1),
            1 => rotation2(x[0]),
            _ => ball_rotation(x[0], x[1], x[2]),
        };
        let s = self.diagonal_exponents(&x[k_dim..k_dim + a_dim], special);
        let mut an = Matrix::zeros(n, n);
        let mut an_inv_diag = vec![0.0; n];
        let mut unit = Matrix::identity(n, n);
        let mut idx = k_dim + a_dim;
        for i in 0..n {
            for j in i + 1..n {
                unit[(i, j)] = x[idx];
                idx += 1;
            }
        }
        for i in 0..n {
            let e = s[i].exp();
            an_inv_diag[i] = 1.0 / e;
            for j in i..n {
                an[(i, j)] = e * unit[(i, j)];
            }
        }
        let unit_inv = inverse(&unit).expect("unitriangular");
        let mut an_inv = unit_inv;
        for j in 0..n {
            for i in 0..n {
                an_inv[(i, j)] *= an_inv_diag[j];
            }
        }
        (&k * an, an_inv * k.transpose())
    }

    fn diagonal_exponents(&self, a: &[f64], special: bool) -> Vec<f64> {
        let mut s = a.to_vec();
        if special {
            s.push(-a.iter().sum::<f64>());
        }
        s
    }

    /// Haar density at chart point `x` (same on every component).
    pub fn density(&self, x: &[f64]) -> f64 {
        match self.kind {
            ChartKind::Circle | ChartKind::Exponential | ChartKind::Diagonal => 1.0,
            ChartKind::RotationBall => ball_density(x[0], x[1]),
            ChartKind::Iwasawa { k_dim, a_dim, special } => {
                let dk = if k_dim == 3 { ball_density(x[0], x[1]) } else { 1.0 };
                let s = self.diagonal_exponents(&x[k_dim..k_dim + a_dim], special);
                dk * two_rho(&s).exp()
            }
        }
    }

    /// Chart coordinates of the chart point `0` on component 0 (the identity).
    pub fn identity_coords(&self) -> Vec<f64> {
        vec![0.0; self.param_dim()]
    }

    /// Component index and chart coordinates of a group matrix.
    pub fn coords_of(&self, g: &Matrix) -> Result<(usize, Vec<f64>)> {
        match self.kind {
            ChartKind::Circle => Ok((0, vec![g[(1, 0)].atan2(g[(0, 0)])])),
            ChartKind::RotationBall => Ok((0, ball_coords(g).to_vec())),
            ChartKind::Exponential => {
                let l = crate::group::logm(g)?;
                Ok((0, self.group.coords_of(&l)))
            }
            ChartKind::Diagonal => Ok((0, (0..g.nrows()).map(|i| g[(i, i)].ln()).collect())),
            ChartKind::Iwasawa { k_dim, a_dim, special } => {
                let n = g.nrows();
                let (component, base) = if g.determinant() < 0.0 && self.components.len() > 1 {
                    (1, &self.components[1] * g)
                } else {
                    (0, g.clone())
                };
                let qr = base.qr();
                let mut q = qr.q();
                let mut r = qr.r();
                for j in 0..n {
                    if r[(j, j)] < 0.0 {
                        q.column_mut(j).neg_mut();
                        r.row_mut(j).neg_mut();
                    }
                }
                let mut coords = match k_dim {
                    0 => vec![],
                    1 => vec![q[(1, 0)].atan2(q[(0, 0)])],
                    _ => ball_coords(&q).to_vec(),
                };
                let s: Vec<f64> = (0..n).map(|i| r[(i, i)].ln()).collect();
                coords.extend_from_slice(&s[..a_dim]);
                if special {
                    debug_assert!(s.iter().sum::<f64>().abs() < 1e-6);
                }
                for i in 0..n {
                    for j in i + 1..n {
                        coords.push(r[(i, j)] / r[(i, i)]);
                    }
                }
                Ok((component, coords))
            }
        }
    }

    /// Per-axis coordinate box containing every element with `||g|| <= radius`.
    ///
    /// Iwasawa: `||g|| >= e^{|s_i|}` and `||g||^4 >= 1 + x_ij^2`.
    /// Exponential: `|log g| <= sum_{k<n} |g - 1|^k / k` with `|g - 1|^2 = |g|^2 - n`.
    pub fn box_for_norm(&self, radius: f64) -> Vec<(f64, f64)> {
        let n = self.group.n() as f64;
        let radius = radius.max(n.sqrt());
        let log_r = radius.ln();
        let x_max = (radius.powi(4) - 1.0).max(0.0).sqrt();
        // unipotent g: |g - 1|^2 = |g|^2 - n
        let unipotent_gap = (radius * radius - n).max(0.0).sqrt();
        let exp_max: f64 = (1..self.group.n())
            .map(|k| unipotent_gap.powi(k as i32) / k as f64)
            .sum();
        match self.kind {
            ChartKind::Circle | ChartKind::RotationBall => self.axes.iter().map(|a| (a.lo, a.hi)).collect(),
            ChartKind::Iwasawa { k_dim, a_dim, .. } => self
                .axes
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    if i < k_dim {
                        (a.lo, a.hi)
                    } else if i < k_dim + a_dim {
                        (-log_r, log_r)
                    } else {
                        (-x_max, x_max)
                    }
                })
                .collect(),
            ChartKind::Exponential => vec![(-exp_max, exp_max); self.param_dim()],
            ChartKind::Diagonal => vec![(-log_r, log_r); self.param_dim()],
        }
    }

    /// Upper bound on the Haar volume of `box_for_norm(radius)` over all components.
    pub fn box_volume(&self, radius: f64) -> f64 {
        let bx = self.box_for_norm(radius);
        let comps = self.components.len() as f64;
        let widths = |range: std::ops::Range<usize>| -> f64 { range.map(|i| bx[i].1 - bx[i].0).product() };
        match self.kind {
            ChartKind::Circle => 2.0 * PI,
            ChartKind::RotationBall => SO3_VOLUME,
            ChartKind::Exponential | ChartKind::Diagonal => widths(0..bx.len()),
            ChartKind::Iwasawa { k_dim, a_dim, special } => {
                let vol_k = match k_dim {
                    0 => 1.0,
                    1 => 2.0 * PI,
                    _ => SO3_VOLUME,
                };
                // e^{2 rho} is log-linear in s: its sup over the box sits at a corner
                let mut sup = 0.0f64;
                for mask in 0..(1usize << a_dim) {
                    let corner: Vec<f64> = (0..a_dim)
                        .map(|i| {
                            let (lo, hi) = bx[k_dim + i];
                            if mask >> i & 1 == 1 {
                                hi
                            } else {
                                lo
                            }
                        })
                        .collect();
                    sup = sup.max(two_rho(&self.diagonal_exponents(&corner, special)).exp());
                }
                comps * vol_k * sup * widths(k_dim..bx.len())
            }
        }
    }
}

fn ball_axes() -> Vec<Axis> {
    vec![
        Axis {
            kind: AxisKind::Radius,
            lo: 0.0,
            hi: PI * SQRT_2,
        },
        Axis {
            kind: AxisKind::Direction,
            lo: 0.0,
            hi: PI,
        },
        Axis {
            kind: AxisKind::Azimuth,
            lo: -PI,
            hi: PI,
        },
    ]
}

/// `sum_{i<j} (s_i - s_j)`, the modular exponent of the Iwasawa chart.
fn two_rho(s: &[f64]) -> f64 {
    let n = s.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            acc += s[i] - s[j];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{frobenius_gauge, GroupExt, GroupSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn groups_with_charts() -> Vec<Group> {
        [
            (GroupKind::So, 2),
            (GroupKind::So, 3),
            (GroupKind::Gl, 1),
            (GroupKind::Gl, 2),
            (GroupKind::GlPlus, 3),
            (GroupKind::Sl, 2),
            (GroupKind::Sl, 3),
            (GroupKind::Ut, 4),
            (GroupKind::Heisenberg, 3),
            (GroupKind::DiagPlus, 2),
        ]
        .into_iter()
        .map(|(k, n)| GroupSpec::new(k, n).unwrap())
        .collect()
    }

    fn random_point(chart: &Chart, rng: &mut ChaCha8Rng) -> Vec<f64> {
        chart
            .axes()
            .iter()
            .map(|a| match a.kind {
                AxisKind::Line => rng.random_range(-1.5..1.5),
                AxisKind::Radius => rng.random_range(0.01..a.hi * 0.95),
                _ => rng.random_range(a.lo * 0.95..a.hi * 0.95),
            })
            .collect()
    }

    #[test]
    fn chart_images_are_members_with_consistent_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in groups_with_charts() {
            let chart = Chart::for_group(&g).unwrap();
            let n = g.n();
            for _ in 0..40 {
                let x = random_point(&chart, &mut rng);
                for c in 0..chart.components().len() {
                    let (m, inv) = chart.matrices_at(&x, c);
                    assert!(g.membership_residual(&m) < 1e-10, "{}", g.name());
                    let err = frobenius_gauge(&(&m * &inv - Matrix::identity(n, n)));
                    assert!(err < 1e-10, "{} inverse error {err}", g.name());
                }
            }
        }
    }

    #[test]
    fn coords_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for g in groups_with_charts() {
            let chart = Chart::for_group(&g).unwrap();
            for _ in 0..40 {
                let x = random_point(&chart, &mut rng);
                let comp = rng.random_range(0..chart.components().len());
                let (m, _) = chart.matrices_at(&x, comp);
                let (c2, y) = chart.coords_of(&m).unwrap();
                assert_eq!(c2, comp, "{}", g.name());
                let (m2, _) = chart.matrices_at(&y, c2);
                assert!(frobenius_gauge(&(m2 - &m)) < 1e-9, "{}", g.name());
            }
        }
    }

    #[test]
    fn ball_density_matches_exp_chart_density() {
        let so3 = GroupSpec::new(GroupKind::So, 3).unwrap();
        for (r, polar, alpha) in [(0.3, 0.2, 1.0), (2.0, 2.7, -2.5), (4.1, 0.9, 0.3)] {
            let d = ball_direction(polar, alpha);
            let x = so3.algebra_vector(vec![r * d[0], r * d[1], r * d[2]]).unwrap();
            let generic = so3.haar_density_exp_chart(&x);
            let want = r * r * polar.sin() * generic;
            assert!((ball_density(r, polar) - want).abs() < 1e-10 * want);
            let direct = ball_rotation(r, polar, alpha);
            assert!(frobenius_gauge(&(direct - expm(x.matrix()))) < 1e-12);
        }
    }

    #[test]
    fn boxes_cover_norm_balls() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in groups_with_charts() {
            let chart = Chart::for_group(&g).unwrap();
            for _ in 0..200 {
                let e = g.sample(&mut rng, 30.0);
                let (_, y) = chart.coords_of(e.matrix()).unwrap();
                let bx = chart.box_for_norm(e.norm() * (1.0 + 1e-9));
                for (v, (lo, hi)) in y.iter().zip(&bx) {
                    assert!(
                        *v >= lo - 1e-9 && *v <= hi + 1e-9,
                        "{}: {v} outside [{lo}, {hi}]",
                        g.name()
                    );
                }
            }
        }
    }
}
