use rand::Rng;

use crate::group::{random_rotation, Group, GroupElement, GroupExt, GroupKind, Matrix};

fn rotation2(theta: f64) -> [f64; 4] {
    [theta.cos(), -theta.sin(), theta.sin(), theta.cos()]
}

/// Block-diagonal `J` and its eigenvalues (Jordan pairs counted once).
fn spectrum<R: Rng + ?Sized>(n: usize, rng: &mut R, spread: f64, signed: bool) -> (Matrix, Vec<(f64, f64)>) {
    let mut j = Matrix::zeros(n, n);
    let mut eigs = Vec::new();
    let mut i = 0;
    while i < n {
        let modulus = (rng.random_range(-1.0..=1.0) * spread).exp();
        let sign = if signed && rng.random::<bool>() { -1.0 } else { 1.0 };
        let kind = if i + 1 < n { rng.random_range(0..3) } else { 0 };
        match kind {
            0 => {
                j[(i, i)] = sign * modulus;
                eigs.push((sign * modulus, 0.0));
                i += 1;
            }
            1 => {
                let theta = rng.random_range(0.3..std::f64::consts::PI - 0.3);
                let r = rotation2(theta);
                for (k, v) in r.iter().enumerate() {
                    j[(i + k / 2, i + k % 2)] = modulus * v;
                }
                eigs.push((modulus * theta.cos(), modulus * theta.sin()));
                eigs.push((modulus * theta.cos(), -modulus * theta.sin()));
                i += 2;
            }
            _ => {
                let lambda = sign * modulus;
                j[(i, i)] = lambda;
                j[(i + 1, i + 1)] = lambda;
                j[(i, i + 1)] = lambda * rng.random_range(-2.0..=2.0);
                eigs.push((lambda, 0.0));
                i += 2;
            }
        }
    }
    (j, eigs)
}

fn separated(eigs: &[(f64, f64)], min_gap: f64) -> bool {
    for (a, x) in eigs.iter().enumerate() {
        for y in &eigs[a + 1..] {
            let gap = (x.0 - y.0).hypot(x.1 - y.1);
            let scale = x.0.hypot(x.1).max(y.0.hypot(y.1));
            if gap < min_gap * scale {
                return false;
            }
        }
    }
    true
}

/// Random element with `||g|| <= max_norm` whose distinct eigenvalues are at
/// least `min_gap` apart relative to their moduli.
///
/// `g = Q J Q^-1` with `J` built from real eigenvalues, rotation-scaling
/// blocks and `2x2` Jordan blocks, and `Q` a mildly anisotropic conjugator.
/// Groups without such spectra (SO, UT, HEIS) fall back to
/// [`GroupExt::sample`].
pub fn sample_separated<R: Rng + ?Sized>(group: &Group, rng: &mut R, max_norm: f64, min_gap: f64) -> GroupElement {
    let n = group.n();
    let kind = group.kind();
    if !matches!(
        kind,
        GroupKind::Gl | GroupKind::GlPlus | GroupKind::Sl | GroupKind::DiagPlus
    ) {
        return group.sample(rng, max_norm);
    }
    let spread = (max_norm / (n as f64).sqrt()).ln().max(0.0);
    for _ in 0..10_000 {
        let level = spread * rng.random::<f64>();
        if kind == GroupKind::DiagPlus {
            let s: Vec<f64> = (0..n)
                .map(|_| (rng.random_range(-1.0..=1.0) * 2.0 * level).exp())
                .collect();
            let eigs: Vec<(f64, f64)> = s.iter().map(|&x| (x, 0.0)).collect();
            if !separated(&eigs, min_gap) {
                continue;
            }
            let g = Matrix::from_diagonal(&nalgebra::DVector::from_vec(s));
            match group.element(g) {
                Ok(e) if e.norm() <= max_norm => return e,
                _ => continue,
            }
        }
        let (mut j, eigs) = spectrum(n, rng, level, true);
        if !separated(&eigs, min_gap) {
            continue;
        }
        let det = j.determinant();
        if kind != GroupKind::Gl && det < 0.0 {
            continue;
        }
        if kind == GroupKind::Sl {
            j /= det.powf(1.0 / n as f64);
        }
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect();
        let q = random_rotation(n, rng)
            * Matrix::from_diagonal(&nalgebra::DVector::from_iterator(n, a.iter().map(|x| x.exp())))
            * random_rotation(n, rng);
        let Some(q_inv) = q.clone().try_inverse() else { continue };
        match group.element(&q * j * q_inv) {
            Ok(e) if e.norm() <= max_norm => return e,
            _ => continue,
        }
    }
    group.identity()
}
