//! Dense matrix primitives for desk-sized matrices (n <= 8): gauges,
//! inverses, and the exponential / logarithm / square root.
//!
//! `expm` is Taylor with scaling and squaring; `logm` is inverse scaling and
//! squaring (product-form Denman-Beavers square roots) followed by the
//! Gregory series. Nilpotent and unipotent inputs take the finite series.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

const TAYLOR_DEGREE: usize = 18;
const SCALING_THRESHOLD: f64 = 0.5;

/// `|g| = sqrt(tr(g^t g))`, the square root of the sum of squared entries.
pub fn frobenius_gauge(g: &Matrix) -> f64 {
    g.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn inverse(g: &Matrix) -> Result<Matrix> {
    if !g.iter().all(|x| x.is_finite()) {
        return Err(Error::Singular);
    }
    let inv = g.clone().try_inverse().ok_or(Error::Singular)?;
    if inv.iter().all(|x| x.is_finite()) {
        Ok(inv)
    } else {
        Err(Error::Singular)
    }
}

/// `max(|g|, |g^-1|)` for an invertible matrix.
pub fn matrix_norm(g: &Matrix) -> Result<f64> {
    let inv = inverse(g)?;
    Ok(frobenius_gauge(g).max(frobenius_gauge(&inv)))
}

fn one_norm(x: &Matrix) -> f64 {
    x.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Returns `sum_{k<n} x^k / k!` when `x^n` vanishes (to roundoff), else `None`.
fn nilpotent_exp(x: &Matrix) -> Option<Matrix> {
    let n = x.nrows();
    let scale = 1.0 + frobenius_gauge(x);
    let mut power = Matrix::identity(n, n);
    let mut sum = Matrix::identity(n, n);
    let mut factorial = 1.0;
    for k in 1..=n {
        power = &power * x;
        if k == n {
            let tol = 1e-14 * scale.powi(n as i32);
            return (frobenius_gauge(&power) <= tol).then_some(sum);
        }
        factorial *= k as f64;
        sum += &power / factorial;
    }
    None
}

/// Matrix exponential.
pub fn expm(x: &Matrix) -> Matrix {
    let n = x.nrows();
    if let Some(exact) = nilpotent_exp(x) {
        return exact;
    }
    let norm = one_norm(x);
    let squarings = if norm > SCALING_THRESHOLD {
        (norm / SCALING_THRESHOLD).log2().ceil() as i32
    } else {
        0
    };
    let a = x / 2f64.powi(squarings);
    let mut term = Matrix::identity(n, n);
    let mut sum = Matrix::identity(n, n);
    for k in 1..=TAYLOR_DEGREE {
        term = (&term * &a) / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Principal square root by the product form of the Denman-Beavers iteration.
pub fn sqrtm(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    let id = Matrix::identity(n, n);
    let mut m = a.clone();
    let mut y = a.clone();
    for _ in 0..100 {
        let m_inv = inverse(&m)?;
        let y_next = &y * (&id + &m_inv) * 0.5;
        m = (&id + (&m + &m_inv) * 0.5) * 0.5;
        let change = frobenius_gauge(&(&y_next - &y));
        y = y_next;
        if change <= 1e-15 * frobenius_gauge(&y) {
            break;
        }
    }
    Ok(y)
}

/// `sum_{k=1}^{n-1} (-1)^{k+1} (u-1)^k / k` when `(u-1)^n` vanishes.
pub(crate) fn unipotent_series_log(u: &Matrix, tol: f64) -> std::result::Result<Matrix, f64> {
    let n = u.nrows();
    let e = u - Matrix::identity(n, n);
    let mut power = Matrix::identity(n, n);
    let mut sum = Matrix::zeros(n, n);
    for k in 1..=n {
        power = &power * &e;
        if k == n {
            let residual = frobenius_gauge(&power);
            let scale = (1.0 + frobenius_gauge(&e)).powi(n as i32);
            return if residual <= tol * scale {
                Ok(sum)
            } else {
                Err(residual)
            };
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += &power * (sign / k as f64);
    }
    unreachable!()
}

/// Principal matrix logarithm.
///
/// Fails with [`Error::LogUndefined`] when an eigenvalue sits on the closed
/// negative real axis.
pub fn logm(g: &Matrix) -> Result<Matrix> {
    let n = g.nrows();
    inverse(g)?;
    if let Ok(exact) = unipotent_series_log(g, 1e-14) {
        return Ok(exact);
    }
    for ev in g.clone().complex_eigenvalues().iter() {
        let on_cut = ev.re <= 0.0 && ev.im.abs() <= 1e-12 * ev.norm().max(1.0);
        if on_cut {
            return Err(Error::LogUndefined { re: ev.re, im: ev.im });
        }
    }
    let id = Matrix::identity(n, n);
    let mut a = g.clone();
    let mut halvings = 0;
    while frobenius_gauge(&(&a - &id)) > 0.25 {
        if halvings >= 64 {
            return Err(Error::LogUndefined {
                re: f64::NAN,
                im: f64::NAN,
            });
        }
        a = sqrtm(&a)?;
        halvings += 1;
    }
    // log(A) = 2 atanh(Z), Z = (A - 1)(A + 1)^-1
    let z = (&a - &id) * inverse(&(&a + &id))?;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    for j in (3..80).step_by(2) {
        term = &term * &z2;
        let add = &term / j as f64;
        sum += &add;
        if frobenius_gauge(&add) <= 1e-18 * frobenius_gauge(&sum) {
            break;
        }
    }
    Ok(sum * (2.0 * 2f64.powi(halvings)))
}
