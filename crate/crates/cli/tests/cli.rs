use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use prepay::curve::YieldCurve;
use prepay::ias::{par_mortgage_rate, price_deterministic_as};
use prepay::mortgage::{MortgageKind, MortgageSpec};
use prepay_cli::io::read_quotes;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn prepay(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_prepay"));
    cmd.args(args).env_remove("PREPAY_OUT_DIR");
    cmd
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn scenario_args<'a>(out: &'a Path, extra: &[&'a str]) -> Vec<String> {
    let mut v = vec![
        "--config".to_string(),
        data("scenario.toml").display().to_string(),
        "--out".to_string(),
        out.display().to_string(),
    ];
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn missing_curve_file_exits_2_and_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("no_such_curve.csv");
    let out = prepay(&["--seed", "1", "--out"])
        .arg(tmp.path())
        .arg("--curve")
        .arg(&missing)
        .arg("bootstrap")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_curve.csv"));
}

#[test]
fn seed_is_mandatory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = prepay(&["--curve"]).arg(data("reference_curve.csv")).arg("--out").arg(tmp.path()).arg("bootstrap").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn unknown_config_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\n[mortgage]\nkidn = \"bullet\"\n").unwrap();
    let out = prepay(&["--config"]).arg(&cfg).arg("bootstrap").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.toml") && err.contains("mortgage.kidn"), "{err}");
}

#[test]
fn unbootstrappable_curve_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let curve = tmp.path().join("curve.csv");
    std::fs::write(&curve, "maturity_years,par_rate,fixed_frequency\n1,0.01,1\n2,50.0,1\n").unwrap();
    let out = prepay(&["--seed", "1", "--out"]).arg(tmp.path()).arg("--curve").arg(&curve).arg("bootstrap").output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_vol_file_names_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let vols = tmp.path().join("vols.csv");
    std::fs::write(&vols, "expiry,1Yr\n1Yr,abc\n").unwrap();
    let out = prepay(&scenario_args(tmp.path(), &["calibrate"]).iter().map(String::as_str).collect::<Vec<_>>())
        .arg("--vols")
        .arg(&vols)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vols.csv"));
}

/// Deterministic amortizing swap on the constant-CPR schedule.
fn constant_cpr_oracle(kind: MortgageKind, lambda: f64) -> f64 {
    let curve = YieldCurve::bootstrap(&read_quotes(&data("reference_curve.csv")).unwrap()).unwrap();
    let rate = par_mortgage_rate(&curve, kind, 10).unwrap();
    let spec = MortgageSpec::new(kind, 1e6, rate, 10).unwrap();
    price_deterministic_as(&curve, &spec, &[lambda; 9]).unwrap() / 1e6 * 1e4
}

#[test]
fn constant_cpr_price_matches_the_deterministic_swap() {
    let tmp = tempfile::tempdir().unwrap();
    for (kind, lambda) in [("bullet", "0.04"), ("annuity", "0.12")] {
        let args = scenario_args(
            tmp.path(),
            &["price", "--set", "cpr.model=constant", "--set", &format!("cpr.lambda={lambda}")],
        );
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        run_ok(prepay(&args).args(["--set", &format!("mortgage.kind={kind}")]));
        let p = json(&tmp.path().join("price/price.json"));
        let value = p["value_bps"].as_f64().unwrap();
        let se = p["stderr_bps"].as_f64().unwrap();
        let exact = constant_cpr_oracle(kind.parse().unwrap(), lambda.parse().unwrap());
        assert!((value - exact).abs() <= 3.0 * se, "{kind}: {value} vs {exact} (se {se})");
        for key in ["value_bps", "stderr_bps", "n_paths", "seed", "scenario_digest"] {
            assert!(!p[key].is_null(), "missing {key}");
        }
    }
}

#[test]
fn report_table1_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let args = scenario_args(tmp.path(), &["report", "table1", "--paths", "2000"]);
    run_ok(&mut prepay(&args.iter().map(String::as_str).collect::<Vec<_>>()));
    let text = std::fs::read_to_string(tmp.path().join("report-table1/table1.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mortgage_type,maturity_years,strike_bps,prepayment_model,price_bps,stderr_bps");
    let keys: Vec<(&str, &str)> = lines[1..]
        .iter()
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0], c[3])
        })
        .collect();
    assert_eq!(
        keys,
        [("Bullet", "Full-rational"), ("Bullet", "Sigmoid"), ("Annuity", "Full-rational"), ("Annuity", "Sigmoid")]
    );
    // at-the-money strike is the 10y par rate for the bullet
    let strike: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((strike - 88.83).abs() < 1e-6);
}

#[test]
fn output_dir_precedence_flag_over_env_over_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("s.toml");
    std::fs::write(
        &cfg,
        format!("seed = 3\ncurve = {:?}\nout_dir = \"from_config\"\n", data("reference_curve.csv").display().to_string()),
    )
    .unwrap();
    run_ok(prepay(&["--config"]).arg(&cfg).arg("bootstrap"));
    assert!(tmp.path().join("from_config/bootstrap/curve.csv").is_file());

    let env_dir = tmp.path().join("from_env");
    run_ok(prepay(&["--config"]).arg(&cfg).arg("bootstrap").env("PREPAY_OUT_DIR", &env_dir));
    assert!(env_dir.join("bootstrap/curve.csv").is_file());

    let flag_dir = tmp.path().join("from_flag");
    run_ok(prepay(&["--config"]).arg(&cfg).arg("--out").arg(&flag_dir).arg("bootstrap").env("PREPAY_OUT_DIR", &env_dir));
    assert!(flag_dir.join("bootstrap/curve.csv").is_file());
}

#[test]
fn hedging_ignores_a_nonzero_spread() {
    let tmp = tempfile::tempdir().unwrap();
    let base = scenario_args(&tmp.path().join("a"), &["hedge", "--strategy", "linear,diag9", "--paths", "2000"]);
    run_ok(&mut prepay(&base.iter().map(String::as_str).collect::<Vec<_>>()));
    let spread = scenario_args(
        &tmp.path().join("b"),
        &["hedge", "--strategy", "linear,diag9", "--paths", "2000", "--set", "zeta=0.01"],
    );
    let out = run_ok(&mut prepay(&spread.iter().map(String::as_str).collect::<Vec<_>>()));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zeta"));
    for f in ["summary.csv", "costs.csv", "error_profile.csv", "weights.json"] {
        assert_eq!(
            std::fs::read(tmp.path().join("a/hedge").join(f)).unwrap(),
            std::fs::read(tmp.path().join("b/hedge").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn manifest_records_seed_inputs_and_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let args = scenario_args(tmp.path(), &["schedule", "--cpr", "0.06"]);
    run_ok(&mut prepay(&args.iter().map(String::as_str).collect::<Vec<_>>()));
    let m = json(&tmp.path().join("schedule/manifest.json"));
    assert_eq!(m["seed"], 20180123);
    assert_eq!(m["command"], "schedule");
    assert!(m["inputs"]["reference_curve.csv"].is_string());
    assert!(m["outputs"]["schedule.csv"].is_string());
    assert_eq!(m["config"]["schedule.cpr"], 0.06);
    assert_eq!(m["input_digest"].as_str().unwrap().len(), 64);

    let text = std::fs::read_to_string(tmp.path().join("schedule/schedule.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "time_years,notional_before_ccy,interest_ccy,repayment_ccy,prepayment_ccy,installment_ccy,notional_after_ccy"
    );
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn cpr_fit_emits_alpha_bins_and_residuals() {
    let tmp = tempfile::tempdir().unwrap();
    let args = scenario_args(tmp.path(), &["cpr-fit", "--bins", "40", "--range", "-0.01:0.03"]);
    run_ok(&mut prepay(&args.iter().map(String::as_str).collect::<Vec<_>>()));
    let fit = json(&tmp.path().join("cpr-fit/cpr_fit.json"));
    assert_eq!(fit["alpha"].as_array().unwrap().len(), 4);
    assert_eq!(fit["bins"].as_array().unwrap().len(), 40);
    assert_eq!(fit["residuals"].as_array().unwrap().len(), 40);
    assert_eq!(fit["bins"][0]["lower"], -0.01);
}

#[test]
fn greeks_columns_carry_units() {
    let tmp = tempfile::tempdir().unwrap();
    let args = scenario_args(tmp.path(), &["greeks", "--paths", "2000"]);
    run_ok(&mut prepay(&args.iter().map(String::as_str).collect::<Vec<_>>()));
    let text = std::fs::read_to_string(tmp.path().join("greeks/greeks.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header[..2], ["portfolio", "bucket"]);
    assert!(header[2..].iter().all(|h| h.contains("_ccy_per_bp")));
    for p in ["ias", "linear", "diag9"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{p},10y,"))));
        assert!(text.lines().any(|l| l.starts_with(&format!("{p},5Y-5Y,"))));
    }
}
