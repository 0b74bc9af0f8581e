//! Matrix groups from a fixed catalog, their Lie algebras and elements.
//!
//! Every catalog algebra basis is orthonormal for the trace form
//! `<X, Y> = tr(X^t Y)`, so algebra coordinates are plain trace pairings.

mod linalg;
mod sample;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use linalg::unipotent_series_log;
pub use linalg::{expm, frobenius_gauge, inverse, logm, matrix_norm, sqrtm, ComplexMatrix, Matrix};
pub use sample::random_rotation;

/// Largest supported ambient size.
pub const MAX_AMBIENT: usize = 8;

/// Default membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    /// General linear group, both components.
    Gl,
    /// Identity component of the general linear group (`det > 0`).
    GlPlus,
    Sl,
    So,
    /// Upper unitriangular matrices.
    Ut,
    /// Positive diagonal matrices.
    DiagPlus,
    /// 3x3 Heisenberg group (upper unitriangular, n = 3).
    Heisenberg,
}

impl GroupKind {
    pub fn label(self) -> &'static str {
        match self {
            GroupKind::Gl => "GL",
            GroupKind::GlPlus => "GL+",
            GroupKind::Sl => "SL",
            GroupKind::So => "SO",
            GroupKind::Ut => "UT",
            GroupKind::DiagPlus => "DIAG+",
            GroupKind::Heisenberg => "HEIS",
        }
    }

    /// Closed under transposition (GL, GL+, SL, SO, DIAG+).
    pub fn is_reductive(self) -> bool {
        matches!(
            self,
            GroupKind::Gl | GroupKind::GlPlus | GroupKind::Sl | GroupKind::So | GroupKind::DiagPlus
        )
    }

    pub fn is_compact(self) -> bool {
        self == GroupKind::So
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GL" => Ok(GroupKind::Gl),
            "GL+" | "GLPLUS" | "GL_PLUS" => Ok(GroupKind::GlPlus),
            "SL" => Ok(GroupKind::Sl),
            "SO" => Ok(GroupKind::So),
            "UT" => Ok(GroupKind::Ut),
            "DIAG+" | "DIAG" | "DIAGPLUS" | "DIAG_PLUS" => Ok(GroupKind::DiagPlus),
            "HEIS" | "HEISENBERG" => Ok(GroupKind::Heisenberg),
            other => Err(Error::UnsupportedGroup(other.to_string())),
        }
    }
}

/// A catalog group: ambient size, Lie algebra basis and membership test.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    kind: GroupKind,
    n: usize,
    basis: Vec<Matrix>,
    membership_tol: f64,
}

/// Shared handle; elements and algebra vectors keep one.
pub type Group = Arc<GroupSpec>;

fn unit(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

fn trace_inner(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn algebra_basis(kind: GroupKind, n: usize) -> Vec<Matrix> {
    match kind {
        GroupKind::Gl | GroupKind::GlPlus => (0..n).flat_map(|i| (0..n).map(move |j| unit(n, i, j))).collect(),
        GroupKind::Sl => {
            let mut basis: Vec<Matrix> = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| unit(n, i, j)))
                .collect();
            // Gram-Schmidt on E_kk - E_{k+1,k+1}
            let mut diag: Vec<Matrix> = Vec::new();
            for k in 0..n - 1 {
                let mut h = unit(n, k, k) - unit(n, k + 1, k + 1);
                for q in &diag {
                    let c = trace_inner(q, &h);
                    h -= q * c;
                }
                let norm = frobenius_gauge(&h);
                diag.push(h / norm);
            }
            basis.extend(diag);
            basis
        }
        GroupKind::So => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let mut basis = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    basis.push((unit(n, i, j) - unit(n, j, i)) * s);
                }
            }
            basis
        }
        GroupKind::Ut => {
            let mut basis = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    basis.push(unit(n, i, j));
                }
            }
            basis
        }
        GroupKind::Heisenberg => vec![unit(3, 0, 1), unit(3, 1, 2), unit(3, 0, 2)],
        GroupKind::DiagPlus => (0..n).map(|i| unit(n, i, i)).collect(),
    }
}

impl GroupSpec {
    pub fn new(kind: GroupKind, n: usize) -> Result<Group> {
        let bad = |why: &str| Err(Error::UnsupportedGroup(format!("{}({n}): {why}", kind.label())));
        if n == 0 || n > MAX_AMBIENT {
            return bad("ambient size must be in 1..=8");
        }
        match kind {
            GroupKind::Sl | GroupKind::So | GroupKind::Ut if n < 2 => return bad("trivial group"),
            GroupKind::Heisenberg if n != 3 => return bad("Heisenberg group is 3x3"),
            _ => {}
        }
        Ok(Arc::new(GroupSpec {
            kind,
            n,
            basis: algebra_basis(kind, n),
            membership_tol: MEMBERSHIP_TOL,
        }))
    }

    /// Parses names such as `SO(2)`, `gl+(1)`, `HEIS`, or a bare kind with `n` supplied.
    pub fn parse(name: &str, n: Option<usize>) -> Result<Group> {
        let name = name.trim();
        let (kind_str, inner_n) = match (name.find('('), name.strip_suffix(')')) {
            (Some(open), Some(stripped)) => {
                let parsed = stripped[open + 1..]
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::UnsupportedGroup(name.to_string()))?;
                (&name[..open], Some(parsed))
            }
            _ => (name, None),
        };
        let kind: GroupKind = kind_str.parse()?;
        let n = match (inner_n, n, kind) {
            (Some(a), Some(b), _) if a != b => {
                return Err(Error::UnsupportedGroup(format!("{name} conflicts with n = {b}")))
            }
            (Some(a), _, _) | (None, Some(a), _) => a,
            (None, None, GroupKind::Heisenberg) => 3,
            (None, None, _) => return Err(Error::UnsupportedGroup(format!("{name}: ambient size missing"))),
        };
        GroupSpec::new(kind, n)
    }

    pub fn with_membership_tol(&self, tol: f64) -> Group {
        Arc::new(GroupSpec {
            membership_tol: tol,
            ..self.clone()
        })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// Ambient matrix size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Manifold dimension.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    pub fn membership_tol(&self) -> f64 {
        self.membership_tol
    }

    pub fn name(&self) -> String {
        match self.kind {
            GroupKind::Heisenberg => "HEIS".to_string(),
            k => format!("{}({})", k.label(), self.n),
        }
    }

    /// Trace-form inner product on the algebra.
    pub fn inner_product(&self, a: &AlgebraVector, b: &AlgebraVector) -> f64 {
        a.coords.iter().zip(&b.coords).map(|(x, y)| x * y).sum()
    }

    /// Membership defect; zero on exact members.
    ///
    /// GL: 0 (invertibility is checked separately). GL+: `max(0, -det)`.
    /// SL: `|det - 1|`. SO: `|g^t g - 1| + |det - 1|`. UT/HEIS: Frobenius
    /// norm of the lower triangle plus diagonal deviation from 1. DIAG+:
    /// off-diagonal Frobenius norm plus the negative part of the diagonal.
    pub fn membership_residual(&self, mat: &Matrix) -> f64 {
        let n = self.n;
        if mat.nrows() != n || mat.ncols() != n {
            return f64::INFINITY;
        }
        if !mat.iter().all(|x| x.is_finite()) {
            return f64::INFINITY;
        }
        match self.kind {
            GroupKind::Gl => 0.0,
            GroupKind::GlPlus => (-mat.determinant()).max(0.0),
            GroupKind::Sl => (mat.determinant() - 1.0).abs(),
            GroupKind::So => {
                let gram = mat.transpose() * mat - Matrix::identity(n, n);
                frobenius_gauge(&gram) + (mat.determinant() - 1.0).abs()
            }
            GroupKind::Ut | GroupKind::Heisenberg => {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..=i {
                        let target = if i == j { 1.0 } else { 0.0 };
                        s += (mat[(i, j)] - target).powi(2);
                    }
                }
                s.sqrt()
            }
            GroupKind::DiagPlus => {
                let mut off = 0.0;
                let mut neg = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if i == j {
                            neg += (-mat[(i, i)]).max(0.0);
                        } else {
                            off += mat[(i, j)].powi(2);
                        }
                    }
                }
                off.sqrt() + neg
            }
        }
    }

    /// Algebra coordinates of a matrix (orthogonal projection onto the algebra).
    pub fn coords_of(&self, x: &Matrix) -> Vec<f64> {
        self.basis.iter().map(|b| trace_inner(b, x)).collect()
    }

    pub fn realize(&self, coords: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for (c, b) in coords.iter().zip(&self.basis) {
            m += b * *c;
        }
        m
    }

    /// Distance of `x` from the algebra in the trace norm.
    pub fn algebra_residual(&self, x: &Matrix) -> f64 {
        frobenius_gauge(&(x - self.realize(&self.coords_of(x))))
    }

    /// Matrix of `ad X` in the algebra basis.
    pub fn ad_matrix(&self, x: &Matrix) -> Matrix {
        let d = self.dim();
        let mut ad = Matrix::zeros(d, d);
        for (j, b) in self.basis.iter().enumerate() {
            let bracket = x * b - b * x;
            for (i, c) in self.coords_of(&bracket).into_iter().enumerate() {
                ad[(i, j)] = c;
            }
        }
        ad
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Operations that hand out elements tied to the shared group handle.
pub trait GroupExt {
    fn identity(&self) -> GroupElement;
    fn element(&self, mat: Matrix) -> Result<GroupElement>;
    fn algebra_vector(&self, coords: Vec<f64>) -> Result<AlgebraVector>;
    fn algebra_vector_from_matrix(&self, x: &Matrix) -> AlgebraVector;
    fn exp(&self, x: &AlgebraVector) -> GroupElement;
    fn log(&self, g: &GroupElement) -> Result<AlgebraVector>;
    fn haar_density_exp_chart(&self, x: &AlgebraVector) -> f64;
    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R, max_norm: f64) -> GroupElement;
}

impl GroupExt for Group {
    fn identity(&self) -> GroupElement {
        let id = Matrix::identity(self.n, self.n);
        GroupElement {
            group: Arc::clone(self),
            inv: id.clone(),
            mat: id,
        }
    }

    /// Validates membership and invertibility.
    fn element(&self, mat: Matrix) -> Result<GroupElement> {
        if mat.nrows() != self.n || mat.ncols() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: mat.nrows(),
            });
        }
        let residual = self.membership_residual(&mat);
        if !(residual <= self.membership_tol) {
            return Err(Error::NotMember {
                group: self.name(),
                residual,
                tol: self.membership_tol,
            });
        }
        GroupElement::from_parts(Arc::clone(self), mat)
    }

    fn algebra_vector(&self, coords: Vec<f64>) -> Result<AlgebraVector> {
        if coords.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: coords.len(),
            });
        }
        let mat = self.realize(&coords);
        Ok(AlgebraVector {
            group: Arc::clone(self),
            coords,
            mat,
        })
    }

    /// Projects `x` onto the algebra.
    fn algebra_vector_from_matrix(&self, x: &Matrix) -> AlgebraVector {
        let coords = self.coords_of(x);
        let mat = self.realize(&coords);
        AlgebraVector {
            group: Arc::clone(self),
            coords,
            mat,
        }
    }

    fn exp(&self, x: &AlgebraVector) -> GroupElement {
        let mat = expm(&x.mat);
        let inv = expm(&(-&x.mat));
        GroupElement {
            group: Arc::clone(self),
            mat,
            inv,
        }
    }

    fn log(&self, g: &GroupElement) -> Result<AlgebraVector> {
        let l = logm(&g.mat)?;
        Ok(self.algebra_vector_from_matrix(&l))
    }

    /// `|det((1 - e^{-ad X}) / ad X)|` on the algebra.
    ///
    /// The operator series is read off the top-right block of
    /// `exp([[-ad X, 1], [0, 0]])`.
    fn haar_density_exp_chart(&self, x: &AlgebraVector) -> f64 {
        let d = self.dim();
        let ad = self.ad_matrix(&x.mat);
        let mut aug = Matrix::zeros(2 * d, 2 * d);
        aug.view_mut((0, 0), (d, d)).copy_from(&(-ad));
        aug.view_mut((0, d), (d, d)).fill_with_identity();
        let e = expm(&aug);
        let block = e.view((0, d), (d, d)).clone_owned();
        block.determinant().abs()
    }

    /// Random element with `||g|| <= max_norm`, spread log-uniformly in scale.
    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R, max_norm: f64) -> GroupElement {
        let mat = sample::sample_matrix(self, rng, max_norm);
        GroupElement::from_parts(Arc::clone(self), mat).expect("sampled matrices are invertible")
    }
}

/// A group element together with its inverse.
///
/// The inverse is computed once, so `g.inverse().inverse()` is bitwise `g`.
#[derive(Debug, Clone)]
pub struct GroupElement {
    group: Group,
    mat: Matrix,
    inv: Matrix,
}

impl GroupElement {
    pub(crate) fn from_parts(group: Group, mat: Matrix) -> Result<Self> {
        let inv = inverse(&mat)?;
        Ok(GroupElement { group, mat, inv })
    }

    /// Caller guarantees `inv` is the inverse of `mat`.
    pub(crate) fn from_raw_parts(group: Group, mat: Matrix, inv: Matrix) -> Self {
        GroupElement { group, mat, inv }
    }

    /// Skips the membership test; for chart images and products of members.
    pub fn new_unchecked(group: Group, mat: Matrix) -> Result<Self> {
        Self::from_parts(group, mat)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn inverse_matrix(&self) -> &Matrix {
        &self.inv
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            group: Arc::clone(&self.group),
            mat: self.inv.clone(),
            inv: self.mat.clone(),
        }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            group: Arc::clone(&self.group),
            mat: &self.mat * &other.mat,
            inv: &other.inv * &self.inv,
        }
    }

    /// `max(|g|, |g^-1|)`; symmetric under inversion by construction.
    pub fn norm(&self) -> f64 {
        frobenius_gauge(&self.mat).max(frobenius_gauge(&self.inv))
    }

    pub fn membership_residual(&self) -> f64 {
        self.group.membership_residual(&self.mat)
    }
}

/// `||g||` for an element; see [`GroupElement::norm`].
pub fn group_norm(g: &GroupElement) -> f64 {
    g.norm()
}

/// An element of the Lie algebra: coordinates and their matrix realization.
#[derive(Debug, Clone)]
pub struct AlgebraVector {
    group: Group,
    coords: Vec<f64>,
    mat: Matrix,
}

impl AlgebraVector {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    /// Trace-form length.
    pub fn length(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_groups() -> Vec<Group> {
        vec![
            GroupSpec::new(GroupKind::Gl, 1).unwrap(),
            GroupSpec::new(GroupKind::Gl, 2).unwrap(),
            GroupSpec::new(GroupKind::GlPlus, 3).unwrap(),
            GroupSpec::new(GroupKind::Sl, 2).unwrap(),
            GroupSpec::new(GroupKind::Sl, 3).unwrap(),
            GroupSpec::new(GroupKind::So, 2).unwrap(),
            GroupSpec::new(GroupKind::So, 3).unwrap(),
            GroupSpec::new(GroupKind::Ut, 4).unwrap(),
            GroupSpec::new(GroupKind::DiagPlus, 2).unwrap(),
            GroupSpec::new(GroupKind::Heisenberg, 3).unwrap(),
        ]
    }

    #[test]
    fn parse_names() {
        assert_eq!(GroupSpec::parse("SO(2)", None).unwrap().name(), "SO(2)");
        assert_eq!(GroupSpec::parse("gl+", Some(1)).unwrap().name(), "GL+(1)");
        assert_eq!(GroupSpec::parse("HEIS", None).unwrap().dim(), 3);
        assert!(GroupSpec::parse("SU(2)", None).is_err());
        assert!(GroupSpec::parse("SL(2)", Some(3)).is_err());
        assert!(GroupSpec::parse("GL", None).is_err());
        assert!(GroupSpec::new(GroupKind::Gl, 9).is_err());
    }

    #[test]
    fn bases_are_orthonormal_and_closed_under_bracket() {
        for g in all_groups() {
            let b = g.basis();
            assert_eq!(b.len(), g.dim());
            for i in 0..b.len() {
                for j in 0..b.len() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((trace_inner(&b[i], &b[j]) - want).abs() < 1e-14);
                    let bracket = &b[i] * &b[j] - &b[j] * &b[i];
                    assert!(g.algebra_residual(&bracket) < 1e-10, "{}", g.name());
                }
            }
        }
    }

    #[test]
    fn dimensions() {
        let dims: Vec<usize> = all_groups().iter().map(|g| g.dim()).collect();
        assert_eq!(dims, vec![1, 4, 9, 3, 8, 1, 3, 6, 2, 3]);
    }

    #[test]
    fn membership_examples() {
        let sl2 = GroupSpec::new(GroupKind::Sl, 2).unwrap();
        assert_eq!(sl2.membership_residual(&Matrix::identity(2, 2)), 0.0);
        let d = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert_eq!(sl2.membership_residual(&d), 1.0);
        let so2 = GroupSpec::new(GroupKind::So, 2).unwrap();
        let t: f64 = 0.83;
        let r = Matrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert!(so2.membership_residual(&r) < 1e-15);
        assert!(sl2.element(d).is_err());
        let heis = GroupSpec::new(GroupKind::Heisenberg, 3).unwrap();
        assert!(heis.element(Matrix::identity(3, 3) * 2.0).is_err());
    }

    #[test]
    fn samples_are_members_within_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in all_groups() {
            for _ in 0..50 {
                let e = g.sample(&mut rng, 50.0);
                assert!(
                    e.membership_residual() < 1e-9,
                    "{} residual {}",
                    g.name(),
                    e.membership_residual()
                );
                assert!(e.norm() <= 50.0 * (1.0 + 1e-12), "{} norm {}", g.name(), e.norm());
            }
        }
    }

    #[test]
    fn inversion_is_exact_involution() {
        let g = GroupSpec::new(GroupKind::Sl, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = g.sample(&mut rng, 20.0);
        let back = e.inverse().inverse();
        assert_eq!(back.matrix(), e.matrix());
        assert_eq!(e.norm(), e.inverse().norm());
    }

    #[test]
    fn exp_density_trivial_cases() {
        let heis = GroupSpec::new(GroupKind::Heisenberg, 3).unwrap();
        let zero = heis.algebra_vector(vec![0.0; 3]).unwrap();
        assert!((heis.haar_density_exp_chart(&zero) - 1.0).abs() < 1e-15);
        for g in [
            GroupSpec::new(GroupKind::So, 2).unwrap(),
            GroupSpec::new(GroupKind::Gl, 1).unwrap(),
            GroupSpec::new(GroupKind::DiagPlus, 3).unwrap(),
        ] {
            let x = g.algebra_vector(vec![1.7; g.dim()]).unwrap();
            assert!((g.haar_density_exp_chart(&x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exp_log_roundtrip() {
        let g = GroupSpec::new(GroupKind::Sl, 3).unwrap();
        let x = g
            .algebra_vector(vec![0.3, -0.2, 0.5, 0.1, -0.4, 0.25, 0.6, -0.35])
            .unwrap();
        let e = g.exp(&x);
        assert!(e.membership_residual() < 1e-12);
        let back = g.log(&e).unwrap();
        for (a, b) in back.coords().iter().zip(x.coords()) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
