use dirac_core::crown::{
    cauchy_riemann_residual, check_fs, check_p1, check_p2, check_u2, holo_kernel_eval, holo_square_gauge,
    random_complex_orthogonal, sample_crown, CrownPoint, HoloKernel, OmegaPoint,
};
use dirac_core::group::{frobenius_gauge, ComplexMatrix};
use dirac_core::haar::IntegrationConfig;
use dirac_core::kernel::{normalize, Gauge};
use dirac_core::{GroupExt, GroupKind, GroupSpec, Matrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn complexify(m: &Matrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

fn real_point(h: Matrix, k: Matrix) -> CrownPoint {
    let gl = GroupSpec::new(GroupKind::Gl, h.nrows()).unwrap();
    let n = h.nrows();
    CrownPoint::new(
        gl.element(h).unwrap(),
        OmegaPoint::new(vec![0.0; n], true).unwrap(),
        complexify(&k),
    )
    .unwrap()
}

#[test]
fn square_gauge_on_real_matrices_and_k_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 2..=4 {
        for _ in 0..50 {
            let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-5.0..5.0));
            let q = holo_square_gauge(&complexify(&m));
            let f2 = frobenius_gauge(&m).powi(2);
            assert!((q.re - f2).abs() <= 1e-14 * f2 && q.im == 0.0);

            let z = ComplexMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
            });
            let k = random_complex_orthogonal(n, &mut rng, 0.5);
            let kkt = &k * k.transpose() - ComplexMatrix::identity(n, n);
            assert!(kkt.iter().map(|w| w.norm()).fold(0.0, f64::max) < 1e-12);
            let a = holo_square_gauge(&z);
            let b = holo_square_gauge(&(&z * &k));
            assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
        }
    }
}

#[test]
fn holo_kernel_matches_real_kernel() {
    let so2 = GroupSpec::new(GroupKind::So, 2).unwrap();
    let cfg = IntegrationConfig {
        points_per_axis: 256,
        ..Default::default()
    };
    let kernel = normalize(&Gauge::default_for(&so2), 1.0, &cfg).unwrap();
    let holo = HoloKernel::from_kernel(&kernel);
    assert_eq!(
        holo_kernel_eval(&holo, &ComplexMatrix::identity(2, 2)).unwrap(),
        Complex64::new(kernel.c_t, 0.0)
    );
    for theta in [0.1f64, 0.7, 1.5, 3.0] {
        let g = so2
            .element(Matrix::from_row_slice(
                2,
                2,
                &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()],
            ))
            .unwrap();
        // exp amplifies rounding in the exponent, so compare logarithms
        let z = holo.log_eval(&complexify(g.matrix())).unwrap();
        let want = kernel.log_eval(&g);
        assert!((z.re - want).abs() <= 1e-14 * want.abs().max(1.0) && z.im == 0.0);
        let value = holo_kernel_eval(&holo, &complexify(g.matrix())).unwrap();
        assert!((value.re - kernel.eval(&g)).abs() <= 1e-12 * kernel.eval(&g).max(f64::MIN_POSITIVE));
    }
    let singular = ComplexMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
    assert!(holo.eval(&singular).is_err());
}

#[test]
fn holo_kernel_is_conjugate_symmetric_and_holomorphic() {
    let gl2 = GroupSpec::new(GroupKind::Gl, 2).unwrap();
    // difference truncation grows like (t^2 |S'|)^2; holomorphy does not depend on t
    let holo = HoloKernel::new(0.1, 8, 1.3).unwrap();
    let points = sample_crown(&gl2, 20, 0.1, 2.0, 4).unwrap();
    for q in &points {
        assert!(q.orthogonality_residual() < 1e-10);
        let z = &q.product;
        let a = holo.eval(z).unwrap();
        let b = holo.eval(&z.map(|w| w.conj())).unwrap();
        assert!((a.conj() - b).norm() <= 1e-12 * a.norm());
        let direct = cauchy_riemann_residual(|w| holo.eval(w), z, 1e-5).unwrap();
        let logged = cauchy_riemann_residual(|w| holo.log_eval(w), z, 1e-5).unwrap();
        assert!(direct <= 1e-6 && logged <= 1e-6, "{direct:e} {logged:e}");
    }
}

#[test]
fn crown_samples_are_valid_and_deterministic() {
    let gl2 = GroupSpec::new(GroupKind::Gl, 2).unwrap();
    let a = sample_crown(&gl2, 50, 0.1, 10.0, 3).unwrap();
    let b = sample_crown(&gl2, 50, 0.1, 10.0, 3).unwrap();
    let bound = 0.9 * OmegaPoint::bound(2, true);
    for (p, q) in a.iter().zip(&b) {
        assert_eq!(p.product, q.product);
        assert!(p.omega.theta.iter().all(|t| t.abs() <= bound));
        assert!(p.h.norm() <= 10.0);
        let rebuilt = complexify(p.h.matrix()) * p.omega.torus_element() * &p.k;
        assert!((&rebuilt - &p.product).iter().map(|w| w.norm()).fold(0.0, f64::max) <= 1e-12);
    }
    // margin near 1: theta collapses to 0
    for p in sample_crown(&gl2, 20, 0.999, 10.0, 3).unwrap() {
        assert!(p
            .omega
            .theta
            .iter()
            .all(|t| t.abs() < 1e-3 * OmegaPoint::bound(2, true)));
    }
}

#[test]
fn estimate_examples_on_real_points() {
    let gl2 = GroupSpec::new(GroupKind::Gl, 2).unwrap();
    let id = Matrix::identity(2, 2);
    let one = real_point(id.clone(), id.clone());

    let p1 = check_p1(std::slice::from_ref(&one), &[gl2.identity()], 4).unwrap();
    assert!(p1.by_power.iter().all(|s| (s.min_ratio - 1.0).abs() < 1e-15));
    let p2 = check_p2(std::slice::from_ref(&one), &[gl2.identity()], 4).unwrap();
    assert!(p2.by_power.iter().all(|s| (s.min_ratio - 1.0).abs() < 1e-15));
    // identity g and q: |tr|^k / |g|^k = 2^k / 2^{k/2}
    let u2 = check_u2(std::slice::from_ref(&one), &[gl2.identity()], 8).unwrap();
    for s in &u2.by_power {
        assert!((s.max_ratio - 2f64.powf(s.k as f64 / 2.0)).abs() < 1e-12 * s.max_ratio);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = gl2.sample(&mut rng, 20.0).matrix().clone();
    let c = 0.4f64;
    let k = Matrix::from_row_slice(2, 2, &[c.cos(), -c.sin(), c.sin(), c.cos()]);
    let q = real_point(h.clone(), k.clone());
    let gs: Vec<_> = (0..30).map(|_| gl2.sample(&mut rng, 1e3)).collect();

    // theta = 0: q(g q) = |g h|^2, real
    let p1 = check_p1(std::slice::from_ref(&q), &gs, 4).unwrap();
    let sigma_min = h.singular_values().min();
    for s in &p1.by_power {
        let oracle = gs
            .iter()
            .map(|g| (frobenius_gauge(&(g.matrix() * &h)) / frobenius_gauge(g.matrix())).powi(2 * s.k as i32))
            .fold(f64::INFINITY, f64::min);
        assert!((s.min_ratio - oracle).abs() <= 1e-12 * oracle);
        assert!(s.min_ratio >= sigma_min.powi(2 * s.k as i32) * (1.0 - 1e-12));
    }

    let s = 100.0;
    let dg = gl2
        .element(Matrix::from_row_slice(2, 2, &[s, 0.0, 0.0, 1.0 / s]))
        .unwrap();
    let p2 = check_p2(std::slice::from_ref(&q), std::slice::from_ref(&dg), 4).unwrap();
    let inv = dg.inverse_matrix();
    let h_inv = h.clone().try_inverse().unwrap();
    for st in &p2.by_power {
        let oracle = (frobenius_gauge(&(k.transpose() * &h_inv * inv)) / frobenius_gauge(inv)).powi(2 * st.k as i32);
        assert!((st.min_ratio - oracle).abs() <= 1e-10 * oracle);
    }

    // q = identity: |tr g| <= sqrt(n) |g|
    let u2 = check_u2(std::slice::from_ref(&one), &gs, 8).unwrap();
    assert_eq!(u2.violations, 0);
    for st in &u2.by_power {
        assert!(st.max_ratio <= 2f64.powf(st.k as f64 / 2.0) * (1.0 + 1e-12));
    }

    // fs on a real rotation reduces to the real kernel
    let holo = HoloKernel::new(1.0, 8, 1.0).unwrap();
    let real_k = real_point(id, k.clone());
    let fs = check_fs(&holo, std::slice::from_ref(&real_k), &gs).unwrap();
    let gauge = Gauge::new(&gl2, 8).unwrap();
    let oracle = gs
        .iter()
        .filter(|g| g.norm() >= 2.0 * 2f64.sqrt())
        .map(|g| gauge.eval_matrix(&(g.matrix() * &k)).unwrap() / g.norm().powi(8))
        .fold(f64::INFINITY, f64::min);
    assert!(fs.fitted_constant > 0.0 && fs.violations == 0);
    assert!((fs.fitted_constant - oracle).abs() <= 1e-10 * oracle);
}

#[test]
fn k_max_is_bounded() {
    let gl2 = GroupSpec::new(GroupKind::Gl, 2).unwrap();
    let pts = sample_crown(&gl2, 2, 0.5, 5.0, 1).unwrap();
    assert!(check_p1(&pts, &[gl2.identity()], 5).is_err());
    assert!(check_u2(&pts, &[gl2.identity()], 9).is_err());
    assert!(check_u2(&pts, &[gl2.identity()], 8).is_ok());
}

/// With `theta_1 = theta_2 = theta`, `q(d)^k = 2^k e^{2 i k theta}`: positive
/// real part for `k <= n + 1` whenever `|theta| < pi / (4 (n + 1))`, but not
/// for `k = 2n` once `theta > pi / (8 n)`.
#[test]
fn p1_beyond_n_plus_one_fails_inside_scaled_omega() {
    let theta = 0.23;
    assert!(theta < 0.9 * OmegaPoint::bound(2, true));
    let gl2 = GroupSpec::new(GroupKind::Gl, 2).unwrap();
    let q = CrownPoint::new(
        gl2.identity(),
        OmegaPoint::new(vec![theta, theta], true).unwrap(),
        ComplexMatrix::identity(2, 2),
    )
    .unwrap();
    let report = check_p1(std::slice::from_ref(&q), &[gl2.identity()], 4).unwrap();
    for s in &report.by_power {
        let oracle = (2.0 * s.k as f64 * theta).cos();
        assert!((s.min_ratio - oracle).abs() < 1e-14);
    }
    assert!(report.by_power[..3].iter().all(|s| s.violations == 0));
    assert_eq!(report.by_power[3].violations, 1);
}

#[test]
fn estimates_hold_where_the_argument_covers_them() {
    let gl2 = GroupSpec::new(GroupKind::Gl, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let gs: Vec<_> = (0..200).map(|_| gl2.sample(&mut rng, 1e3)).collect();

    // margin 0.1: powers up to n + 1 = 3 keep a positive real part
    let pts = sample_crown(&gl2, 200, 0.1, 2.0, 7).unwrap();
    for report in [check_p1(&pts, &gs, 3).unwrap(), check_p2(&pts, &gs, 3).unwrap()] {
        assert_eq!(report.violations, 0);
        assert!(report.fitted_constant > 0.0);
    }
    let u2 = check_u2(&pts, &gs, 8).unwrap();
    assert!(u2.passed());

    // |theta| < pi / (8n): every power up to 2n, and fs once ||g|| is large
    let pts = sample_crown(&gl2, 200, 0.3, 2.0, 7).unwrap();
    for report in [check_p1(&pts, &gs, 4).unwrap(), check_p2(&pts, &gs, 4).unwrap()] {
        assert!(report.passed());
    }
    let large: Vec<_> = (0..200)
        .map(|_| loop {
            let g = gl2.sample(&mut rng, 1e3);
            if g.norm() >= 100.0 {
                break g;
            }
        })
        .collect();
    let f1 = check_fs(&HoloKernel::new(1.0, 8, 1.0).unwrap(), &pts, &large).unwrap();
    let f2 = check_fs(&HoloKernel::new(2.0, 8, 1.0).unwrap(), &pts, &large).unwrap();
    assert!(f1.passed() && f2.passed());
    let growth = f2.fitted_constant / f1.fitted_constant;
    assert!((2.0..=8.0).contains(&growth), "{growth}");
}
