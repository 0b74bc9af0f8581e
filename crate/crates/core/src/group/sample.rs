use rand::Rng;
use rand_distr::StandardNormal;

use super::{GroupKind, GroupSpec, Matrix};

/// Haar-random rotation in SO(n) from the QR factorization of a Gaussian matrix.
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let gauss = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gauss.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

fn diag_exp(s: &[f64]) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_iterator(s.len(), s.iter().map(|x| x.exp())))
}

pub(super) fn sample_matrix<R: Rng + ?Sized>(group: &GroupSpec, rng: &mut R, max_norm: f64) -> Matrix {
    let n = group.n();
    let spread = (max_norm / (n as f64).sqrt()).ln().max(0.0);
    // log-uniform in scale: most samples moderate, some near the cap
    let level = spread * rng.random::<f64>();
    match group.kind() {
        GroupKind::Gl | GroupKind::GlPlus => {
            let s: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0) * level).collect();
            let mut g = random_rotation(n, rng) * diag_exp(&s) * random_rotation(n, rng);
            if group.kind() == GroupKind::Gl && rng.random::<bool>() {
                g.row_mut(0).neg_mut();
            }
            g
        }
        GroupKind::Sl => {
            let mut s: Vec<f64> = (0..n - 1)
                .map(|_| rng.random_range(-1.0..=1.0) * level / (n - 1) as f64)
                .collect();
            s.push(-s.iter().sum::<f64>());
            random_rotation(n, rng) * diag_exp(&s) * random_rotation(n, rng)
        }
        GroupKind::So => random_rotation(n, rng),
        GroupKind::DiagPlus => {
            let s: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0) * level).collect();
            diag_exp(&s)
        }
        GroupKind::Ut | GroupKind::Heisenberg => {
            let mut scale = level.exp() - 1.0;
            for _ in 0..200 {
                let mut g = Matrix::identity(n, n);
                for i in 0..n {
                    for j in i + 1..n {
                        g[(i, j)] = rng.random_range(-1.0..=1.0) * scale;
                    }
                }
                match super::matrix_norm(&g) {
                    Ok(norm) if norm <= max_norm => return g,
                    _ => scale *= 0.8,
                }
            }
            Matrix::identity(n, n)
        }
    }
}
