use std::fs;
use std::path::Path;

use ctlasso::cli::{self, read_csv, read_path_document, CliError, ErrorKind};
use ctlasso::covariance::standardize;
use ctlasso::estimators::EstimatorSpec;
use ctlasso::{Error, PathOptions};

fn write_data(dir: &Path) -> std::path::PathBuf {
    let mut s = String::from("x1,x2,x3,x4,target\n");
    for i in 0..40 {
        let t = i as f64;
        let x1 = (t * 0.37).sin();
        let x2 = (t * 1.91).cos();
        let x3 = ((t * 0.73).sin() * 3.1).fract();
        let x4 = (t * 2.3).sin() * (t * 0.11).cos();
        let y = 3.0 + 2.0 * x1 - 1.5 * x4 + 0.05 * (t * 7.7).sin();
        s += &format!("{x1},{x2},{x3},{x4},{y}\n");
    }
    let p = dir.join("data.csv");
    fs::write(&p, s).unwrap();
    p
}

fn run(args: &[&str]) -> Result<String, CliError> {
    let mut out = Vec::new();
    let mut full = vec!["ctlasso"];
    full.extend_from_slice(args);
    cli::run(full, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

#[test]
fn fit_reports_both_scales_consistently() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let d = data.to_str().unwrap();
    let out = run(&["fit", "-i", d, "-r", "target", "--method", "lasso", "--lambda", "0.05", "--format", "json"]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["tuning"]["source"], "user");

    let csv = read_csv(&data, "target").unwrap();
    let design = standardize(&csv.x, &csv.y).unwrap();
    let b0 = v["intercept"].as_f64().unwrap();
    let coefs = v["coefficients"].as_array().unwrap();
    let std: Vec<f64> = coefs.iter().map(|c| c["standardized"].as_f64().unwrap()).collect();
    let orig: Vec<f64> = coefs.iter().map(|c| c["original"].as_f64().unwrap()).collect();
    let via_std = design.predict_raw(&csv.x, &std).unwrap();
    for (i, pred) in via_std.iter().enumerate() {
        let direct = b0 + (0..4).map(|j| csv.x[(i, j)] * orig[j]).sum::<f64>();
        assert!((pred - direct).abs() < 1e-10);
    }
    assert!(orig[0] > 1.0 && orig[3] < -0.5);
}

#[test]
fn fit_csv_has_header_and_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let out = run(&["fit", "-i", data.to_str().unwrap(), "-r", "4", "--lambda", "0.1", "--nu", "0.2"]).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "term,standardized,original");
    assert!(lines[1].starts_with("(intercept),"));
    assert_eq!(lines.len(), 6);
    for field in lines[2].split(',').skip(1) {
        let v: f64 = field.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), field);
    }
}

#[test]
fn fit_without_lambda_uses_cross_validation() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let d = data.to_str().unwrap();
    let args = ["fit", "-i", d, "-r", "target", "--method", "ct-soft", "--nu-grid", "0,0.1", "--seed", "3", "--format", "json"];
    let a = run(&args).unwrap();
    assert_eq!(a, run(&args).unwrap());
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["tuning"]["source"], "cross_validation");
    assert_eq!(v["tuning"]["folds"], 5);
}

#[test]
fn path_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let out_file = dir.path().join("path.json");
    run(&[
        "path", "-i", data.to_str().unwrap(), "-r", "target", "--method", "ct-hard", "--nu", "0.1",
        "--format", "json", "--out", out_file.to_str().unwrap(),
    ])
    .unwrap();
    let doc = read_path_document(&fs::read_to_string(&out_file).unwrap()).unwrap();
    assert_eq!(doc.names, ["x1", "x2", "x3", "x4"]);
    let csv = read_csv(&data, "target").unwrap();
    let design = standardize(&csv.x, &csv.y).unwrap();
    let spec = EstimatorSpec::ct_lasso(ctlasso::ThresholdRule::hard(0.1));
    let direct = spec.fit_path(&design, &PathOptions::default()).unwrap();
    assert_eq!(doc.path, direct);
}

#[test]
fn path_csv_rows_match_breakpoints() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let out = run(&["path", "-i", data.to_str().unwrap(), "-r", "target", "--method", "lasso"]).unwrap();
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "lambda,x1,x2,x3,x4");
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!(first[0] > 0.0);
    assert!(first[1..].iter().all(|b| *b == 0.0));
    let rest: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert!(rest.windows(2).all(|w| w[1][0] <= w[0][0]));
}

#[test]
fn cv_outputs_curve() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let d = data.to_str().unwrap();
    let out = run(&["cv", "-i", d, "-r", "target", "--method", "lasso", "--n-lambda", "30", "--cv-variant", "zero"]).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "lambda,mean_error,sd_error,selected");
    assert_eq!(lines.len(), 31);
    assert_eq!(lines.iter().filter(|l| l.ends_with(",1")).count(), 1);
    let json = run(&["cv", "-i", d, "-r", "target", "--method", "lasso", "--format", "json"]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(v["selection"]["lambda_hat"].as_f64().unwrap() > 0.0);
}

#[test]
fn bad_input_is_reported_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a,b,y\n1,2,3\n4,oops,6\n7,8,9\n").unwrap();
    let e = run(&["fit", "-i", bad.to_str().unwrap(), "-r", "y", "--lambda", "0.1"]).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(e.message.contains("line 3") && e.message.contains("'b'"), "{}", e.message);

    let constant = dir.path().join("const.csv");
    fs::write(&constant, "a,flat,y\n1,5,3\n4,5,6\n7,5,2\n").unwrap();
    let e = run(&["fit", "-i", constant.to_str().unwrap(), "-r", "y", "--lambda", "0.1"]).unwrap_err();
    assert!(e.message.contains("'flat'"), "{}", e.message);

    let data = write_data(dir.path());
    let e = run(&["fit", "-i", data.to_str().unwrap(), "-r", "missing"]).unwrap_err();
    assert_eq!(e.kind, ErrorKind::Input);
    let e = run(&["fit", "--nonsense"]).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let line = e.to_line();
    assert!(!line.contains('\n'));
    let parsed: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(parsed["error"]["code"], 2);
}

#[test]
fn numerical_errors_map_to_exit_three() {
    assert_eq!(CliError::from(Error::SingularSS).exit_code(), 3);
    assert_eq!(CliError::from(Error::InvalidRho(2.0)).exit_code(), 2);
}

#[test]
fn help_is_not_an_error() {
    let out = run(&["--help"]).unwrap();
    assert!(out.contains("simulate"));
}

#[test]
fn diagnose_modes() {
    let out = run(&["diagnose", "--sigma", "constant:0.5", "--p", "8", "--support", "0-2"]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    // ρs/(1−ρ+sρ) with ρ=0.5, s=3
    assert!((v["report"]["irrep_max"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(v["report"]["d_cs"], 3);

    let out = run(&["diagnose", "--preset", "example1"]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["irrelevant"].as_array().unwrap().len(), 90);

    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let out = run(&[
        "diagnose", "-i", data.to_str().unwrap(), "-r", "target", "--support", "0,3", "--beta", "2,-1.5",
        "--method", "ct-soft", "--nu", "0.05", "--lambda", "0.2",
    ])
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["report"]["lemma1"]["holds"].is_boolean());

    for bad in [["--support", "0-7"], ["--support", "9"], ["--support", "x"]] {
        let e = run(&["diagnose", "--sigma", "identity", "--p", "8", bad[0], bad[1]]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}

#[test]
fn simulate_from_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        r#"
n = [12]
replications = 4
seed = 5
methods = ["lasso", "ust"]
tuning = "best"

[design]
name = "small"
beta = [2.0, 2.0, 0.0, 0.0, 0.0, 0.0]
noise = 1.0
sigma = { kind = "ar", rho = 0.4 }
"#,
    )
    .unwrap();
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--reps", "3"]).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("small,12,best,lasso,3,"));

    let e = run(&["simulate"]).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    fs::write(&cfg, "bogus_key = 1\n").unwrap();
    let e = run(&["simulate", "--config", cfg.to_str().unwrap()]).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}
