use std::process::{Command, Output};

use dirac_core::crown::{check_p1, sample_crown, CrownPoint, OmegaPoint};
use dirac_core::{GroupExt, GroupKind, GroupSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn dirac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = dirac(&all);
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&out.stderr)));
    (v, code)
}

fn column(v: &Value, name: &str) -> Vec<f64> {
    v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[name].as_f64().unwrap())
        .collect()
}

#[test]
fn normalize_rows_and_exit_codes() {
    let (v, code) = json(&["normalize"]);
    assert_eq!(code, 0);
    assert_eq!(v["command"], "normalize");
    assert_eq!(v["status"], Value::Null);
    let c = column(&v, "C_t");
    assert_eq!(c.len(), 4);
    assert!(c.windows(2).all(|w| w[1] > w[0]));

    let (v, code) = json(&["normalize", "--t-grid", ""]);
    assert_eq!(code, 0);
    assert!(v["rows"].as_array().unwrap().is_empty());

    let out = dirac(&["normalize", "--group", "XY(2)"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported group"));
    assert_eq!(dirac(&["normalize", "--exponent", "3"]).status.code(), Some(1));
    assert_eq!(dirac(&["normalize", "--bogus"]).status.code(), Some(1));
    assert_eq!(dirac(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(dirac(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failure_exits_with_2() {
    // with a relative cluster tolerance of 0.5 every pair of distinct
    // eigenvalues lands in the ambiguous band
    let out = dirac(&[
        "decomp-check",
        "--group",
        "GL(2)",
        "--cluster-tol",
        "0.5",
        "--count",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn dirac_check_status() {
    let (v, code) = json(&["dirac-check"]);
    assert_eq!((v["status"].as_str(), code), (Some("pass"), 0));

    let (v, code) = json(&["dirac-check", "--group", "GL+(1)", "--threshold", "0"]);
    assert_eq!((v["status"].as_str(), code), (Some("fail"), 3));

    // rho_2 <= 16 on SO(2), so nothing lies outside radius 2
    let (v, code) = json(&["dirac-check", "--radii", "2"]);
    assert_eq!(code, 0);
    assert!(column(&v, "tail_mass").iter().all(|&x| x == 0.0));
}

#[test]
fn mollify_examples() {
    let (v, code) = json(&["mollify", "--function", "one"]);
    assert_eq!(code, 0);
    for row in v["rows"].as_array().unwrap() {
        let diff = row["abs_diff"].as_f64().unwrap();
        assert!(diff <= row["phi_f_error"].as_f64().unwrap() + 1e-12, "{row}");
    }
    let (v, _) = json(&[
        "mollify",
        "--group",
        "HEIS",
        "--function",
        "gauss",
        "--t-grid",
        "2",
        "--points",
        "24",
    ]);
    // identity plus two steps along each of the three axes
    assert_eq!(v["rows"].as_array().unwrap().len(), 7);
    assert_eq!(dirac(&["mollify", "--function", "sinc"]).status.code(), Some(1));
    assert_eq!(
        dirac(&["mollify", "--group", "SL(2)", "--function", "cos"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(dirac(&["mollify", "--grid", "0,0;1,1"]).status.code(), Some(1));
}

#[test]
fn rep_converge_examples() {
    let (v, _) = json(&["rep-converge", "--rep", "trivial", "--vector", "2.5"]);
    assert!(column(&v, "distance").iter().all(|&d| d <= 1e-12));
    let (v, _) = json(&["rep-converge", "--vector", "0,0"]);
    assert!(column(&v, "distance").iter().all(|&d| d == 0.0));
    let (v, _) = json(&["rep-converge", "--rep", "sym2"]);
    let d = column(&v, "distance");
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert_eq!(dirac(&["rep-converge", "--vector", "1,0,0"]).status.code(), Some(1));
    assert_eq!(dirac(&["rep-converge", "--rep", "adjoint"]).status.code(), Some(1));
}

#[test]
fn crown_check_examples() {
    let (v, code) = json(&["crown-check", "u2"]);
    assert_eq!((v["status"].as_str(), code), (Some("pass"), 0));
    assert!(v["rows"][0]["fitted_constant"].as_f64().unwrap() > 0.0);

    // powers up to n + 1 stay in the right half plane at margin 0.1
    let (v, code) = json(&["crown-check", "p1", "--k-max", "3"]);
    assert_eq!((v["status"].as_str(), code), (Some("pass"), 0));

    // almost no room left in Omega: the constants approach those of the real
    // points h k (theta = 0), rebuilt here from the same seeds
    let (v, code) = json(&["crown-check", "p1", "--margin", "0.999", "--count", "50", "--seed", "4"]);
    assert_eq!(code, 0);
    let c = v["rows"][0]["fitted_constant"].as_f64().unwrap();
    let gl2 = GroupSpec::new(GroupKind::Gl, 2).unwrap();
    let real: Vec<CrownPoint> = sample_crown(&gl2, 50, 0.999, 2.0, 4)
        .unwrap()
        .into_iter()
        .map(|q| CrownPoint::new(q.h, OmegaPoint::new(vec![0.0; 2], true).unwrap(), q.k).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gs: Vec<_> = (0..50).map(|_| gl2.sample(&mut rng, 1e3)).collect();
    let want = check_p1(&real, &gs, 4).unwrap().fitted_constant;
    assert!(want > 0.0 && (c - want).abs() <= 0.05 * want, "{c} vs {want}");

    for margin in ["0", "-0.5", "1"] {
        assert_eq!(dirac(&["crown-check", "--margin", margin]).status.code(), Some(1));
    }
    assert_eq!(dirac(&["crown-check", "p3"]).status.code(), Some(1));
    assert_eq!(dirac(&["crown-check", "p1", "--k-max", "5"]).status.code(), Some(1));
}

#[test]
fn decomp_check_examples() {
    let (v, code) = json(&["decomp-check", "jc", "--count", "100"]);
    assert_eq!((v["status"].as_str(), code), (Some("pass"), 0));
    assert_eq!(v["rows"].as_array().unwrap().len(), 100);
    for name in ["residual_product", "residual_commute", "residual_unipotent"] {
        assert!(column(&v, name).iter().all(|&r| r <= 1e-8 * 1e3), "{name}");
    }
    let (v, code) = json(&["decomp-check", "growth", "--group", "SO(3)", "--count", "50"]);
    assert_eq!(code, 0);
    assert!(v["rows"][0]["fitted_R"].as_f64().unwrap().is_finite());
    assert_eq!(
        dirac(&["decomp-check", "compare", "--group", "HEIS"]).status.code(),
        Some(1)
    );
    assert_eq!(dirac(&["decomp-check", "svd"]).status.code(), Some(1));
}

#[test]
fn config_file_flags_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# SO(2) with the quadratic gauge\ngroup = SO(2)\nexponent = 2\nt_grid = 1, 2\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let (v, _) = json(&["normalize", "--config", cfg, "--t-grid", "4"]);
    assert_eq!(v["config"]["exponent"], 2);
    assert_eq!(v["config"]["t_grid"], serde_json::json!([4.0]));
    assert_eq!(v["config"]["points"], 256);
    assert_eq!(v["config"]["schema"], "normalize/v1");

    // the CSV header is itself a config file reproducing the run
    let out_path = dir.path().join("first.csv");
    let first = dirac(&["normalize", "--config", cfg, "--out", out_path.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0));
    assert!(first.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let echo: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| !l.starts_with("schema") && !l.starts_with("status") && !l.starts_with("out "))
        .map(|l| format!("{l}\n"))
        .collect();
    let replay = dir.path().join("replay.cfg");
    std::fs::write(&replay, echo).unwrap();
    let again = dirac(&[
        "normalize",
        "--config",
        replay.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), text);

    std::fs::write(dir.path().join("bad.cfg"), "gruop = SO(2)\n").unwrap();
    let bad = dir.path().join("bad.cfg");
    assert_eq!(
        dirac(&["normalize", "--config", bad.to_str().unwrap()]).status.code(),
        Some(1)
    );
    assert_eq!(
        dirac(&["normalize", "--config", "/nonexistent/run.cfg"]).status.code(),
        Some(1)
    );
}

#[test]
fn csv_is_parseable() {
    let out = dirac(&["rep-converge", "--t-grid", "1,2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "t",
            "distance",
            "distance_error",
            "value0",
            "value1",
            "error0",
            "error1"
        ]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let t: f64 = rows[1][0].parse().unwrap();
    assert_eq!(t, 2.0);
}

#[test]
fn reports_are_reproducible_across_runs_and_threads() {
    let args = [
        "rep-converge",
        "--group",
        "SL(2)",
        "--method",
        "mc",
        "--samples",
        "20000",
        "--t-grid",
        "1,4",
    ];
    let run = |threads: &str| {
        let mut a = args.to_vec();
        a.extend(["--threads", threads]);
        let out = dirac(&a);
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("3"));
}
