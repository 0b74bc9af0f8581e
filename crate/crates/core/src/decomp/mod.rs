//! Multiplicative Jordan-Chevalley decomposition `g = u r` and the distance
//! bounds built on it.
//!
//! Eigenvalues are grouped by single-linkage clustering on relative gaps
//! rather than by an exact Jordan form. Each cluster with mean `mu` and size
//! `m` spans the null space of `(g - mu)^m`; `P` collects an orthonormal basis
//! of every such generalized eigenspace (unit columns, canonical pivots), and
//! `r = P diag(mu) P^-1`, `u = g r^-1`.

mod distance;
mod sample;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{frobenius_gauge, inverse, matrix_norm, unipotent_series_log, ComplexMatrix, Matrix};

pub use distance::{
    basis_norm_check, comparability_check, distance_upper_bound, fit_representation_growth, growth_bound_check,
    BasisNormReport, CertifyingPath, ComparabilityReport, DistanceBound, GrowthReport, PathSegment,
    RepresentationGrowth,
};
pub use sample::sample_separated;

/// Relative eigenvalue gap below which two eigenvalues are merged.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

/// Scaled tolerance on `|(u - 1)^n|` accepted by [`unipotent_log`].
pub const UNIPOTENT_TOL: f64 = 1e-8;

/// Gaps in `(tol, AMBIGUITY_FACTOR * tol]` are neither merged nor trusted.
const AMBIGUITY_FACTOR: f64 = 100.0;

#[derive(Clone, Debug)]
pub struct JordanChevalley {
    pub u: Matrix,
    pub r: Matrix,
    /// Generalized-eigenbasis change matrix.
    pub p: ComplexMatrix,
    /// One entry per cluster: mean eigenvalue and multiplicity.
    pub clusters: Vec<(Complex64, usize)>,
    /// `|u r - g|`.
    pub residual_product: f64,
    /// `|u r - r u|`.
    pub residual_commute: f64,
    /// `|(u - 1)^n|`.
    pub residual_unipotent: f64,
    /// Imaginary part discarded when `P D P^-1` was taken real.
    pub residual_imaginary: f64,
}

fn relative_gap(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn fmt_complex(z: Complex64) -> String {
    format!("{:.6e}{:+.6e}i", z.re, z.im)
}

fn cluster(eigs: &[Complex64], tol: f64) -> Result<Vec<(Complex64, usize)>> {
    let n = eigs.len();
    let mut label: Vec<usize> = (0..n).collect();
    // single linkage: relabel until stable; n <= 8
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in 0..n {
                if relative_gap(eigs[i], eigs[j]) <= tol && label[j] > label[i] {
                    label[j] = label[i];
                    changed = true;
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let gap = relative_gap(eigs[i], eigs[j]);
            if label[i] != label[j] && gap <= AMBIGUITY_FACTOR * tol {
                return Err(Error::IllConditioned {
                    a: fmt_complex(eigs[i]),
                    b: fmt_complex(eigs[j]),
                    gap,
                    lo: tol,
                    hi: AMBIGUITY_FACTOR * tol,
                });
            }
        }
    }
    let mut out = Vec::new();
    for l in 0..n {
        let members: Vec<Complex64> = (0..n).filter(|&i| label[i] == l).map(|i| eigs[i]).collect();
        if !members.is_empty() {
            let mean = members.iter().sum::<Complex64>() / members.len() as f64;
            out.push((mean, members.len()));
        }
    }
    Ok(out)
}

fn complexify(m: &Matrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

fn cnorm<'a>(v: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    v.into_iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis of the null space of `(g - mu)^m`, canonicalized by
/// pivoted Gram-Schmidt on the orthogonal projector so that coordinate
/// subspaces come back as coordinate vectors. Returns `(pivot, column)`.
fn generalized_eigenspace(g: &Matrix, mu: Complex64, m: usize) -> Vec<(usize, DVector<Complex64>)> {
    let n = g.nrows();
    let shifted = complexify(g) - ComplexMatrix::identity(n, n) * mu;
    let mut a = ComplexMatrix::identity(n, n);
    for _ in 0..m {
        a = &a * &shifted;
    }
    let svd = a.svd(false, true);
    let v = svd.v_t.expect("requested").adjoint();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let null = ComplexMatrix::from_columns(&order[..m].iter().map(|&i| v.column(i)).collect::<Vec<_>>());
    let mut residual = &null * null.adjoint();

    let mut basis = Vec::with_capacity(m);
    for _ in 0..m {
        let (pivot, _) = (0..n)
            .map(|j| (j, cnorm(residual.column(j).iter())))
            .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        let col = residual.column(pivot).clone_owned();
        let mut q = &col / Complex64::new(cnorm(col.iter()), 0.0);
        let phase = q[pivot] / q[pivot].norm();
        q /= phase;
        for j in 0..n {
            let proj = (q.adjoint() * residual.column(j))[(0, 0)];
            let update = &q * proj;
            residual.column_mut(j).zip_apply(&update, |a, b| *a -= b);
        }
        basis.push((pivot, q));
    }
    basis
}

/// `g = u r = r u` with `u` unipotent and `r` semisimple.
///
/// Fails with [`Error::Singular`] for non-invertible `g` and with
/// [`Error::IllConditioned`] when two eigenvalues are closer than
/// `100 cluster_tol` (relative) without being within `cluster_tol`.
pub fn jordan_chevalley(g: &Matrix, cluster_tol: f64) -> Result<JordanChevalley> {
    if !(cluster_tol > 0.0) {
        return Err(Error::Config(format!(
            "cluster tolerance must be positive, got {cluster_tol}"
        )));
    }
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: g.ncols(),
        });
    }
    inverse(g)?;
    let eigs: Vec<Complex64> = g.clone().complex_eigenvalues().iter().copied().collect();
    let clusters = cluster(&eigs, cluster_tol)?;

    let mut columns: Vec<(usize, usize, DVector<Complex64>)> = Vec::with_capacity(n);
    for (k, &(mu, m)) in clusters.iter().enumerate() {
        for (pivot, q) in generalized_eigenspace(g, mu, m) {
            columns.push((pivot, k, q));
        }
    }
    columns.sort_by_key(|c| (c.0, c.1));
    let p = ComplexMatrix::from_columns(&columns.iter().map(|c| c.2.clone()).collect::<Vec<_>>());
    let d = DVector::from_iterator(n, columns.iter().map(|c| clusters[c.1].0));
    let p_inv = p.clone().try_inverse().ok_or(Error::Singular)?;
    let r_complex = &p * ComplexMatrix::from_diagonal(&d) * &p_inv;
    let r = r_complex.map(|z| z.re);
    let residual_imaginary = r_complex.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    let u = g * inverse(&r)?;

    let id = Matrix::identity(n, n);
    let ur = &u * &r;
    let e = &u - &id;
    let mut power = id.clone();
    for _ in 0..n {
        power = &power * &e;
    }
    Ok(JordanChevalley {
        residual_product: frobenius_gauge(&(&ur - g)),
        residual_commute: frobenius_gauge(&(&ur - &r * &u)),
        residual_unipotent: frobenius_gauge(&power),
        residual_imaginary,
        u,
        r,
        p,
        clusters,
    })
}

impl JordanChevalley {
    /// `|P|^2` in the Frobenius gauge; equals `n` under the unit-column convention.
    pub fn basis_gauge_sq(&self) -> f64 {
        cnorm(self.p.iter()).powi(2)
    }

    /// `max(|P|, |P^-1|)^2`.
    pub fn basis_norm_sq(&self) -> f64 {
        let inv = self
            .p
            .clone()
            .try_inverse()
            .map(|m| cnorm(m.iter()))
            .unwrap_or(f64::INFINITY);
        cnorm(self.p.iter()).max(inv).powi(2)
    }
}

/// `log u = sum_{k=1}^{n-1} (-1)^{k+1} (u - 1)^k / k` for unipotent `u`.
pub fn unipotent_log(u: &Matrix) -> Result<Matrix> {
    unipotent_series_log(u, UNIPOTENT_TOL).map_err(Error::NotUnipotent)
}

/// `log ||g||` of a matrix; errors on singular input.
fn log_norm(g: &Matrix) -> Result<f64> {
    Ok(matrix_norm(g)?.ln())
}
