use std::f64::consts::PI;

use dirac_core::group::{frobenius_gauge, GroupExt, GroupKind, GroupSpec, Matrix};
use dirac_core::haar::{
    integrate, left_invariance_check, truncation_radius, Chart, Envelope, IntegrationConfig, Method, Truncation,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn so2() -> dirac_core::Group {
    GroupSpec::new(GroupKind::So, 2).unwrap()
}

fn gl1_plus() -> dirac_core::Group {
    GroupSpec::new(GroupKind::GlPlus, 1).unwrap()
}

fn angle(g: &Matrix) -> f64 {
    g[(1, 0)].atan2(g[(0, 0)])
}

#[test]
fn circle_volume() {
    let r = integrate(&so2(), |_| 1.0, &Envelope::bounded(1.0), &IntegrationConfig::default()).unwrap();
    assert!((r.value - 2.0 * PI).abs() <= r.error_estimate + 1e-13, "{r:?}");
    assert_eq!(r.truncated_tail_bound, 0.0);
}

#[test]
fn gl1_plus_matches_oracle() {
    let f = |x: f64| (-(x - 1.0).powi(2) - (1.0 / x - 1.0).powi(2)).exp();
    // Haar measure dx/x on (0, inf); substitute x = e^s
    let oracle = quad_oracle::reference(|s| f(s.exp()), -40.0, 40.0);
    let cfg = IntegrationConfig {
        points_per_axis: 96,
        ..Default::default()
    };
    let env = Envelope::kernel(1.0, 2.0);
    let r = integrate(&gl1_plus(), |g| f(g.matrix()[(0, 0)]), &env, &cfg).unwrap();
    assert!((r.value - oracle).abs() <= 1e-8 * oracle, "{} vs {oracle}", r.value);
    assert!(r.error_estimate < 1e-8 * oracle);
}

#[test]
fn heisenberg_small_ball_volume() {
    let heis = GroupSpec::new(GroupKind::Heisenberg, 3).unwrap();
    let radius = 0.1;
    let indicator = move |g: &dirac_core::GroupElement| {
        let x = heis_log(g.matrix());
        if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
            1.0
        } else {
            0.0
        }
    };
    let cfg = IntegrationConfig {
        points_per_axis: 160,
        truncation: Truncation::Radius(2.0),
        scale: Some(0.05),
        ..Default::default()
    };
    let r = integrate(&heis, indicator, &Envelope::kernel(1.0, 2.0), &cfg).unwrap();
    let exact = 4.0 / 3.0 * PI * radius.powi(3);
    // discontinuous integrand: first-order in the node spacing
    assert!((r.value - exact).abs() < 2e-2 * exact, "{} vs {exact}", r.value);
    assert!((r.value - exact).abs() <= r.error_estimate + 1e-12 + 2e-2 * exact);
}

/// Exponential coordinates of a Heisenberg matrix `[[1,a,c],[0,1,b],[0,0,1]]`.
fn heis_log(g: &Matrix) -> [f64; 3] {
    let (a, b, c) = (g[(0, 1)], g[(1, 2)], g[(0, 2)]);
    [a, b, c - 0.5 * a * b]
}

#[test]
fn circle_left_invariance_oracle_example() {
    let f = |g: &dirac_core::GroupElement| (-8.0 * (1.0 - g.matrix()[(0, 0)])).exp();
    let h = so2().element(rot(0.7)).unwrap();
    let cfg = IntegrationConfig::default();
    let rep = left_invariance_check(&so2(), f, &h, &Envelope::bounded(1.0), &cfg).unwrap();
    assert!(rep.deviation <= 1e-8, "{rep:?}");
    let oracle = quad_oracle::reference(|t| (-8.0 * (1.0 - (t + 0.7).cos())).exp(), -PI, PI);
    assert!((rep.lhs.value - oracle).abs() < 1e-10);
}

fn rot(t: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
}

#[test]
fn gl1_plus_left_invariance_oracle_example() {
    let f = |g: &dirac_core::GroupElement| (-(g.matrix()[(0, 0)].ln()).powi(2)).exp();
    let h = gl1_plus().element(Matrix::from_element(1, 1, 2.0)).unwrap();
    let cfg = IntegrationConfig {
        points_per_axis: 64,
        ..Default::default()
    };
    let env = Envelope::log_decay(1.0, 1.0, 2.0);
    let rep = left_invariance_check(&gl1_plus(), f, &h, &env, &cfg).unwrap();
    assert!(rep.deviation <= 1e-8, "{rep:?}");
    assert!((rep.rhs.value - PI.sqrt()).abs() < 1e-10);
}

#[test]
fn identity_translation_has_no_deviation() {
    let g = GroupSpec::new(GroupKind::Sl, 2).unwrap();
    let env = Envelope::kernel(1.0, 4.0);
    let f = |x: &dirac_core::GroupElement| {
        let m = x.matrix() - Matrix::identity(2, 2);
        (-frobenius_gauge(&m).powi(4)).exp()
    };
    let cfg = IntegrationConfig {
        points_per_axis: 20,
        ..Default::default()
    };
    let rep = left_invariance_check(&g, f, &g.identity(), &env, &cfg).unwrap();
    assert!(rep.deviation <= rep.combined_error, "{rep:?}");
}

#[test]
fn left_invariance_on_every_chart() {
    // (kind, n, points per axis, relative accuracy expected of the estimate)
    let cases: Vec<(GroupKind, usize, usize, f64)> = vec![
        (GroupKind::So, 2, 64, 1e-8),
        (GroupKind::So, 3, 28, 1e-2),
        (GroupKind::Gl, 1, 64, 1e-8),
        (GroupKind::GlPlus, 1, 64, 1e-8),
        (GroupKind::DiagPlus, 2, 48, 1e-6),
        (GroupKind::Heisenberg, 3, 48, 1e-2),
        (GroupKind::Ut, 3, 48, 1e-2),
        (GroupKind::Sl, 2, 40, 1e-2),
        // five-dimensional tensor grid over two components; kept coarse for runtime
        (GroupKind::Gl, 2, 16, 0.2),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (kind, n, points, accuracy) in cases {
        let g = GroupSpec::new(kind, n).unwrap();
        let t = 1.0;
        let env = Envelope::kernel(t, 2.0);
        let id = Matrix::identity(n, n);
        let f = move |x: &dirac_core::GroupElement| {
            let a = frobenius_gauge(&(x.matrix() - &id)).powi(2);
            let b = frobenius_gauge(&(x.inverse_matrix() - &id)).powi(2);
            (-t * t * (a + b)).exp()
        };
        let cfg = IntegrationConfig {
            points_per_axis: points,
            scale: Some(0.5),
            ..Default::default()
        };
        for _ in 0..10 {
            let h = g.sample(&mut rng, 1.6 * (n as f64).sqrt());
            let rep = left_invariance_check(&g, f.clone(), &h, &env, &cfg).unwrap();
            assert!(rep.within_error(), "{}: {rep:?}", g.name());
            assert!(
                rep.combined_error < accuracy * rep.rhs.value.abs(),
                "{}: {rep:?}",
                g.name()
            );
        }
    }
}

#[test]
fn monte_carlo_error_bars_are_calibrated() {
    let g = gl1_plus();
    let f = |x: &dirac_core::GroupElement| (-(x.matrix()[(0, 0)].ln()).powi(2)).exp();
    let truth = PI.sqrt();
    let env = Envelope::log_decay(1.0, 1.0, 2.0);
    let mut inside = 0;
    for seed in 0..100 {
        let cfg = IntegrationConfig {
            method: Method::MonteCarlo,
            samples: 4000,
            seed,
            ..Default::default()
        };
        let r = integrate(&g, f, &env, &cfg).unwrap();
        if (r.value - truth).abs() <= r.error_estimate {
            inside += 1;
        }
    }
    // 95% nominal; binomial sd about 2.2 over 100 runs
    assert!(inside >= 88, "coverage {inside}/100");
}

#[test]
fn results_are_identical_across_thread_counts() {
    let g = GroupSpec::new(GroupKind::Sl, 2).unwrap();
    let env = Envelope::kernel(1.0, 2.0);
    let f = |x: &dirac_core::GroupElement| (-frobenius_gauge(&(x.matrix() - Matrix::identity(2, 2))).powi(2)).exp();
    for method in [Method::TensorQuadrature, Method::MonteCarlo] {
        let cfg = IntegrationConfig {
            method,
            points_per_axis: 24,
            samples: 20_000,
            seed: 7,
            ..Default::default()
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| integrate(&g, f, &env, &cfg).unwrap())
        };
        let one = run(1);
        let many = run(4);
        assert_eq!(one.value.to_bits(), many.value.to_bits());
        assert_eq!(one.error_estimate.to_bits(), many.error_estimate.to_bits());
    }
}

#[test]
fn quadrature_converges_geometrically_on_smooth_integrand() {
    // e^{cos theta} on the circle: 2 pi I_0(1)
    let exact = 2.0 * PI * quad_oracle::reference(|t| (t.cos()).exp(), 0.0, PI) / PI;
    let mut last = f64::INFINITY;
    for points in [4, 8, 16, 32] {
        let cfg = IntegrationConfig {
            points_per_axis: points,
            scale: Some(1e6),
            ..Default::default()
        };
        let r = integrate(&so2(), |g| g.matrix()[(0, 0)].exp(), &Envelope::bounded(3.0), &cfg).unwrap();
        let err = (r.value - exact).abs();
        eprintln!("points {points}: {err:e}");
        assert!(err < last * 1e-2 || err < 1e-13, "points {points}: {err} vs {last}");
        last = err;
    }
    assert!(last < 1e-13);
}

#[test]
fn truncation_radius_monotone() {
    let g = GroupSpec::new(GroupKind::Sl, 2).unwrap();
    let chart = Chart::for_group(&g).unwrap();
    let r1 = truncation_radius(&chart, &Envelope::kernel(1.0, 4.0), 1e-8).unwrap();
    let r2 = truncation_radius(&chart, &Envelope::kernel(2.0, 4.0), 1e-8).unwrap();
    let r3 = truncation_radius(&chart, &Envelope::kernel(1.0, 4.0), 0.5e-8).unwrap();
    assert!(r2 <= r1);
    assert!(r3 >= r1);
    let circle = Chart::for_group(&so2()).unwrap();
    assert!(truncation_radius(&circle, &Envelope::kernel(1.0, 4.0), 0.0 + f64::MIN_POSITIVE).unwrap() <= PI);
}

#[test]
fn non_finite_integrand_reports_location() {
    let cfg = IntegrationConfig::default();
    let err = integrate(
        &so2(),
        |g| 1.0 / (angle(g.matrix()) - angle(g.matrix())),
        &Envelope::bounded(1.0),
        &cfg,
    );
    assert!(matches!(err, Err(dirac_core::Error::NonFinite { .. })));
}
