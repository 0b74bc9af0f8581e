//! The six subcommands. Each resolves the `auto` entries of its config
//! (group, points, ...) so the echoed config is the effective one.

use std::f64::consts::PI;

use dirac_core::crown::{check_fs, check_p1, check_p2, check_u2, sample_crown, EstimateId, EstimateReport, HoloKernel};
use dirac_core::decomp::{
    basis_norm_check, comparability_check, growth_bound_check, jordan_chevalley, sample_separated, unipotent_log,
};
use dirac_core::group::{expm, frobenius_gauge};
use dirac_core::haar::{Chart, IntegrationConfig, Truncation};
use dirac_core::kernel::{
    self, average_representation, convolve, normalize as normalize_kernel, Gauge, Representation, StandardRep,
    SymSquareRep, TrivialRep,
};
use dirac_core::{Group, GroupElement, GroupExt, GroupSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Exponent, RunConfig, TruncationSetting};
use crate::report::{Cell, Report, Status};
use crate::CliError;

type Outcome = Result<(Report, RunConfig), CliError>;

fn resolve_group(cfg: &mut RunConfig, default: &str) -> Result<Group, CliError> {
    let name = cfg.group.clone().unwrap_or_else(|| default.to_string());
    let group = GroupSpec::parse(&name, cfg.n)?;
    cfg.group = Some(group.name());
    cfg.n = Some(group.n());
    Ok(group)
}

fn resolve_gauge(cfg: &mut RunConfig, group: &Group) -> Result<Gauge, CliError> {
    let gauge = match cfg.exponent {
        Exponent::Default => Gauge::default_for(group),
        Exponent::Even(p) => Gauge::new(group, p)?,
    };
    cfg.exponent = Exponent::Even(gauge.p());
    Ok(gauge)
}

fn resolve_integration(cfg: &mut RunConfig, group: &Group) -> Result<IntegrationConfig, CliError> {
    let dim = Chart::for_group(group)?.param_dim();
    let points = *cfg.points.get_or_insert(IntegrationConfig::points_for_dim(dim));
    let icfg = IntegrationConfig {
        method: cfg.method,
        points_per_axis: points,
        samples: cfg.samples,
        seed: cfg.seed,
        truncation: match cfg.truncation {
            TruncationSetting::Auto(tol) => Truncation::Auto { tol },
            TruncationSetting::Radius(r) => Truncation::Radius(r),
        },
        confidence: cfg.confidence,
        scale: None,
    };
    icfg.validate()?;
    Ok(icfg)
}

/// Rows `(t, C_t, C_t_error, evaluations)`.
pub fn normalize(mut cfg: RunConfig) -> Outcome {
    let group = resolve_group(&mut cfg, "SO(2)")?;
    let gauge = resolve_gauge(&mut cfg, &group)?;
    let icfg = resolve_integration(&mut cfg, &group)?;
    let mut report = Report::new("normalize", &["t", "C_t", "C_t_error", "evaluations"]);
    for &t in &cfg.t_grid {
        let k = normalize_kernel(&gauge, t, &icfg)?;
        report.push(vec![
            t.into(),
            k.c_t.into(),
            k.c_t_error.into(),
            k.mass.evaluations.into(),
        ]);
    }
    Ok((report, cfg))
}

/// One row per `(t, radius)`; passes when every tail column strictly
/// decreases in `t` and its last entry is below `threshold`.
pub fn dirac_check(mut cfg: RunConfig) -> Outcome {
    let group = resolve_group(&mut cfg, "SO(2)")?;
    let gauge = resolve_gauge(&mut cfg, &group)?;
    let icfg = resolve_integration(&mut cfg, &group)?;
    let rep = kernel::dirac_check(&gauge, &cfg.t_grid, &cfg.radii, &icfg)?;
    let mut report = Report::new(
        "dirac-check",
        &[
            "t",
            "radius",
            "tail_mass",
            "tail_error",
            "mass",
            "mass_error",
            "c_t",
            "splitting_bound",
            "splitting_holds",
        ],
    );
    for (i, &t) in rep.t_grid.iter().enumerate() {
        for (j, &r) in rep.neighborhoods.iter().enumerate() {
            let tail = &rep.tail_mass[i][j];
            report.push(vec![
                t.into(),
                r.into(),
                tail.value.into(),
                tail.total_error().into(),
                rep.mass[i].value.into(),
                rep.mass[i].total_error().into(),
                rep.c_t[i].into(),
                rep.splitting[j].bound[i].into(),
                rep.splitting[j].holds[i].into(),
            ]);
        }
    }
    let final_tails_small = rep
        .tail_mass
        .last()
        .is_some_and(|row| row.iter().all(|tail| tail.value < cfg.threshold));
    report.status = Some(Status::from_bool(
        rep.monotone_in_t.iter().all(|&m| m) && final_tails_small,
    ));
    Ok((report, cfg))
}

/// `f` with its sup bound; `cos` is the `(0, 0)` matrix entry.
fn test_function(name: &str, group: &Group) -> Result<(fn(&GroupElement) -> f64, f64), CliError> {
    fn one(_: &GroupElement) -> f64 {
        1.0
    }
    fn cos(g: &GroupElement) -> f64 {
        g.matrix()[(0, 0)]
    }
    fn gauss(g: &GroupElement) -> f64 {
        (-kernel::rho2(g)).exp()
    }
    match name {
        "one" => Ok((one, 1.0)),
        "cos" if group.kind().is_compact() => Ok((cos, 1.0)),
        "cos" => Err(CliError::Usage(format!(
            "function cos is unbounded on {}",
            group.name()
        ))),
        "gauss" => Ok((gauss, 1.0)),
        other => Err(CliError::Usage(format!(
            "unknown function `{other}`; expected one, cos or gauss"
        ))),
    }
}

fn default_grid(chart: &Chart) -> Vec<Vec<f64>> {
    let dim = chart.param_dim();
    if chart.is_compact() && dim == 1 {
        return (0..16).map(|j| vec![-PI + 2.0 * PI * j as f64 / 16.0]).collect();
    }
    let origin = chart.identity_coords();
    let mut grid = vec![origin.clone()];
    for axis in 0..dim {
        for step in [-0.5, 0.5] {
            let mut x = origin.clone();
            x[axis] += step;
            grid.push(x);
        }
    }
    grid
}

/// Rows `(t, x_0.., f, phi_f, phi_f_error, abs_diff, sup_error)`; `sup_error`
/// is the largest `abs_diff` at that `t`.
pub fn mollify(mut cfg: RunConfig) -> Outcome {
    let group = resolve_group(&mut cfg, "SO(2)")?;
    let gauge = resolve_gauge(&mut cfg, &group)?;
    let icfg = resolve_integration(&mut cfg, &group)?;
    let (f, bound) = test_function(&cfg.function, &group)?;
    let chart = Chart::for_group(&group)?;
    let grid = cfg.grid.get_or_insert_with(|| default_grid(&chart)).clone();
    let dim = chart.param_dim();
    if let Some(bad) = grid.iter().find(|x| x.len() != dim) {
        return Err(dirac_core::Error::Dimension {
            expected: dim,
            got: bad.len(),
        }
        .into());
    }
    let points: Vec<GroupElement> = grid.iter().map(|x| chart.element_at(x, 0)).collect();

    let mut columns: Vec<String> = vec!["t".into()];
    columns.extend((0..dim).map(|i| format!("x{i}")));
    columns.extend(["f", "phi_f", "phi_f_error", "abs_diff", "sup_error"].map(String::from));
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut report = Report::new("mollify", &columns);
    for &t in &cfg.t_grid {
        let k = normalize_kernel(&gauge, t, &icfg)?;
        let mut rows = Vec::with_capacity(points.len());
        for (x, g) in grid.iter().zip(&points) {
            let conv = convolve(&k, f, bound, g, &icfg)?;
            let fx = f(g);
            rows.push((x, fx, conv.value, conv.total_error(), (conv.value - fx).abs()));
        }
        let sup = rows.iter().map(|r| r.4).fold(0.0, f64::max);
        for (x, fx, value, err, diff) in rows {
            let mut row: Vec<Cell> = vec![t.into()];
            row.extend(x.iter().map(|&c| Cell::from(c)));
            row.extend([fx.into(), value.into(), err.into(), diff.into(), sup.into()]);
            report.push(row);
        }
    }
    Ok((report, cfg))
}

fn representation(name: &str, group: &Group) -> Result<Box<dyn Representation>, CliError> {
    match name {
        "trivial" => Ok(Box::new(TrivialRep::new(group, 1))),
        "standard" => Ok(Box::new(StandardRep::new(group))),
        "sym2" => Ok(Box::new(SymSquareRep::new(group))),
        other => Err(CliError::Usage(format!(
            "unknown representation `{other}`; expected trivial, standard or sym2"
        ))),
    }
}

/// Rows `(t, distance, distance_error, value_i.., error_i..)` with
/// `distance = |Pi(phi_t) v - v|`.
pub fn rep_converge(mut cfg: RunConfig) -> Outcome {
    let group = resolve_group(&mut cfg, "SO(2)")?;
    let gauge = resolve_gauge(&mut cfg, &group)?;
    let icfg = resolve_integration(&mut cfg, &group)?;
    let rep = representation(&cfg.rep, &group)?;
    let m = rep.dim();
    let v = cfg
        .vector
        .get_or_insert_with(|| (0..m).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect())
        .clone();
    if v.len() != m {
        return Err(dirac_core::Error::Dimension {
            expected: m,
            got: v.len(),
        }
        .into());
    }
    let mut columns: Vec<String> = ["t", "distance", "distance_error"].map(String::from).to_vec();
    columns.extend((0..m).map(|i| format!("value{i}")));
    columns.extend((0..m).map(|i| format!("error{i}")));
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut report = Report::new("rep-converge", &columns);
    for &t in &cfg.t_grid {
        let k = normalize_kernel(&gauge, t, &icfg)?;
        let avg = average_representation(&k, rep.as_ref(), &v, &icfg)?;
        let distance = avg
            .values
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let mut row: Vec<Cell> = vec![t.into(), distance.into(), avg.error_norm().into()];
        row.extend(avg.values.iter().map(|&x| Cell::from(x)));
        row.extend(avg.errors.iter().map(|&x| Cell::from(x)));
        report.push(row);
    }
    Ok((report, cfg))
}

fn estimate_ids(name: &str) -> Result<Vec<EstimateId>, CliError> {
    if name == "all" {
        return Ok(vec![EstimateId::P1, EstimateId::P2, EstimateId::U2, EstimateId::Fs]);
    }
    Ok(vec![name
        .parse()
        .map_err(|e: dirac_core::Error| CliError::Usage(e.to_string()))?])
}

fn estimate_row(report: &mut Report, r: &EstimateReport, t: Option<f64>, growth: Option<f64>) {
    let id = r.estimate_id.label();
    report.push(vec![
        id.into(),
        t.into(),
        Cell::Null,
        r.samples.into(),
        r.fitted_constant.into(),
        r.worst_ratio.into(),
        Cell::Null,
        Cell::Null,
        r.violations.into(),
        growth.into(),
        r.passed().into(),
    ]);
    for s in &r.by_power {
        report.push(vec![
            id.into(),
            Cell::Null,
            s.k.into(),
            Cell::Null,
            Cell::Null,
            Cell::Null,
            s.min_ratio.into(),
            s.max_ratio.into(),
            s.violations.into(),
            Cell::Null,
            Cell::Null,
        ]);
    }
}

/// One summary row per estimate (and per `t` for fs) followed by one row per
/// power `k`. For fs, `growth` is the ratio of fitted constants between
/// consecutive `t`, which must stay within a factor 2 of `(t'/t)^2`.
pub fn crown_check(mut cfg: RunConfig) -> Outcome {
    let group = resolve_group(&mut cfg, "GL(2)")?;
    let ids = estimate_ids(&cfg.estimate)?;
    let n = group.n() as u32;
    let points = sample_crown(&group, cfg.count, cfg.margin, cfg.h_radius, cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let gs: Vec<GroupElement> = (0..cfg.count).map(|_| group.sample(&mut rng, cfg.radius)).collect();

    let mut report = Report::new(
        "crown-check",
        &[
            "estimate",
            "t",
            "k",
            "samples",
            "fitted_constant",
            "worst_ratio",
            "min_ratio",
            "max_ratio",
            "violations",
            "growth",
            "passed",
        ],
    );
    let mut ok = true;
    for id in ids {
        match id {
            EstimateId::P1 | EstimateId::P2 | EstimateId::U2 => {
                let r = match id {
                    EstimateId::P1 => check_p1(&points, &gs, cfg.k_max.unwrap_or(2 * n))?,
                    EstimateId::P2 => check_p2(&points, &gs, cfg.k_max.unwrap_or(2 * n))?,
                    _ => check_u2(&points, &gs, cfg.k_max.unwrap_or(4 * n))?,
                };
                ok &= r.passed();
                estimate_row(&mut report, &r, None, None);
            }
            EstimateId::Fs => {
                let gauge = resolve_gauge(&mut cfg, &group)?;
                let icfg = resolve_integration(&mut cfg, &group)?;
                let mut last: Option<(f64, f64)> = None;
                for &t in &cfg.t_grid {
                    let k = normalize_kernel(&gauge, t, &icfg)?;
                    let r = check_fs(&HoloKernel::from_kernel(&k), &points, &gs)?;
                    let mut growth = None;
                    if let Some((t0, c0)) = last {
                        let expected = (t / t0).powi(2);
                        let ratio = r.fitted_constant / c0;
                        ok &= ratio >= expected / 2.0 && ratio <= 2.0 * expected;
                        growth = Some(ratio);
                    }
                    ok &= r.passed();
                    estimate_row(&mut report, &r, Some(t), growth);
                    last = Some((t, r.fitted_constant));
                }
            }
        }
    }
    report.status = Some(Status::from_bool(ok));
    Ok((report, cfg))
}

/// `jc`: one row per sample; passes when product and commutator residuals are
/// at most `1e-8 ||g||`, the unipotency residual at most `1e-8` and the
/// unipotent log round trip at most `1e-10 |u|`. The other checks emit a
/// single summary row.
pub fn decomp_check(mut cfg: RunConfig) -> Outcome {
    let group = resolve_group(&mut cfg, "GL(2)")?;
    let check = cfg.check.clone();
    if !matches!(check.as_str(), "jc" | "growth" | "basis" | "compare") {
        return Err(CliError::Usage(format!(
            "unknown check `{check}`; expected jc, growth, basis or compare"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<GroupElement> = (0..cfg.count)
        .map(|_| sample_separated(&group, &mut rng, cfg.radius, cfg.min_gap))
        .collect();
    let report = match check.as_str() {
        "jc" => {
            let mut report = Report::new(
                "decomp-check",
                &[
                    "index",
                    "norm",
                    "residual_product",
                    "residual_commute",
                    "residual_unipotent",
                    "log_round_trip",
                    "clusters",
                ],
            );
            let mut ok = true;
            for (i, g) in samples.iter().enumerate() {
                let jc = jordan_chevalley(g.matrix(), cfg.cluster_tol)?;
                let log_u = unipotent_log(&jc.u)?;
                let round_trip = frobenius_gauge(&(expm(&log_u) - &jc.u)) / frobenius_gauge(&jc.u);
                let norm = g.norm();
                ok &= jc.residual_product <= 1e-8 * norm
                    && jc.residual_commute <= 1e-8 * norm
                    && jc.residual_unipotent <= 1e-8
                    && round_trip <= 1e-10;
                report.push(vec![
                    i.into(),
                    norm.into(),
                    jc.residual_product.into(),
                    jc.residual_commute.into(),
                    jc.residual_unipotent.into(),
                    round_trip.into(),
                    jc.clusters.len().into(),
                ]);
            }
            report.status = Some(Status::from_bool(ok));
            report
        }
        "growth" => {
            let n_exp = *cfg.n_exp.get_or_insert(group.n() as u32);
            let r = growth_bound_check(&samples, n_exp)?;
            let mut report = Report::new("decomp-check", &["samples", "n_exp", "fitted_R", "violations"]);
            report.push(vec![
                r.samples.into(),
                r.n_exp.into(),
                r.fitted_r.into(),
                r.violations.len().into(),
            ]);
            report.status = Some(Status::from_bool(r.fitted_r.is_some() && r.violations.is_empty()));
            report
        }
        "basis" => {
            let r = basis_norm_check(&samples, cfg.cluster_tol)?;
            let mut report = Report::new(
                "decomp-check",
                &["samples", "worst_ratio", "worst_inverse_ratio", "violations"],
            );
            report.push(vec![
                r.samples.into(),
                r.worst_ratio.into(),
                r.worst_inverse_ratio.into(),
                r.violations.len().into(),
            ]);
            report.status = Some(Status::from_bool(r.violations.is_empty()));
            report
        }
        _ => {
            let r = comparability_check(&samples)?;
            let mut report = Report::new(
                "decomp-check",
                &["samples", "c_fit", "C_fit", "lower_slope", "lower_offset", "holds"],
            );
            report.push(vec![
                r.samples.into(),
                r.c_fit.into(),
                r.big_c_fit.into(),
                r.lower_slope.into(),
                r.lower_offset.into(),
                r.holds.into(),
            ]);
            report.status = Some(Status::from_bool(r.holds));
            report
        }
    };
    Ok((report, cfg))
}
