use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn afqsp(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afqsp")).args(args).env("QSP_OUT_DIR", out_dir).output().expect("binary runs")
}

/// Writes `config` to a file in `dir` and runs it.
fn run_config(dir: &Path, config: &str) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    afqsp(&["run", "--config", path.to_str().unwrap()], dir)
}

fn read_summary(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_records(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes()).records().map(Result::unwrap).collect()
}

/// Result files left in `dir` besides the config.
fn outputs(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "config.json")
        .collect();
    names.sort();
    names
}

#[test]
fn qsp_verify_writes_passing_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), r#"{"suite": "qsp-verify", "function": "laurent_test", "d_list": [4], "trials": 3}"#);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(outputs(dir.path()), vec!["qsp-verify-laurent_test.csv", "qsp-verify-laurent_test.json"]);

    let csv = fs::read_to_string(dir.path().join("qsp-verify-laurent_test.csv")).unwrap();
    let rows = csv_records(&csv);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| &r[r.len() - 1] == "true"));
    assert!(!csv.contains('\r'));

    let summary = read_summary(&dir.path().join("qsp-verify-laurent_test.json"));
    assert_eq!(summary["summary"]["pass_count"], 3);
    assert_eq!(summary["summary"]["fail_count"], 0);
    assert!(summary["summary"]["max_ratio"].as_f64().unwrap() < 1.0);
}

#[test]
fn reruns_are_byte_identical() {
    let config = r#"{"suite": "fhm", "function": "sign_smooth", "d_list": [4, 8], "dimension": 4, "seed": 11, "trials": 2}"#;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run_config(a.path(), config).status.code(), Some(0));
    assert_eq!(run_config(b.path(), config).status.code(), Some(0));
    for name in ["fhm-sign_smooth.csv", "fhm-sign_smooth.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn scaling_reports_the_fitted_slope() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"suite": "scaling", "function": "abs_power_c", "params": {"c": 0.5},
                     "d_list": [8, 16, 32, 64, 128, 256], "output": "OUT/scaling.csv"}"#
        .replace("OUT", dir.path().to_str().unwrap());
    let out = run_config(dir.path(), &config);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    let rows = csv_records(&csv);
    assert_eq!(rows.len(), 7);
    let slope = rows.last().unwrap();
    assert_eq!(&slope[3], "slope");
    let fitted: f64 = slope[6].parse().unwrap();
    assert!((fitted + 0.5).abs() < 0.3, "{fitted}");
    assert!(dir.path().join("scaling.json").exists());
}

#[test]
fn failed_contract_exits_one_but_keeps_results() {
    // At t = 1 the budget is about 2e-17, below double-precision roundoff.
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), r#"{"suite": "hamsim", "function": "exp_it_cos", "params": {"t": 1}, "d_list": [16]}"#);
    assert_eq!(out.status.code(), Some(1));
    let summary = read_summary(&dir.path().join("hamsim-exp_it_cos.json"));
    assert_eq!(summary["summary"]["fail_count"], 1);

    // A tolerance override admits the roundoff.
    let out = run_config(
        dir.path(),
        r#"{"suite": "hamsim", "function": "exp_it_cos", "params": {"t": 1}, "d_list": [16], "tolerance": 1e-12}"#,
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn error_exit_codes_leave_no_output() {
    for (config, code) in [
        (r#"{"suite": "qsp-verify", "function": "nope", "d_list": [4]}"#, 3),
        (r#"{"suite": "qsp-verify", "function": "gibbs", "d_list": [5]}"#, 2),
        (r#"{"suite": "qsp-verify", "function": "gibbs", "d_list": [4], "colour": "red"}"#, 2),
        (r#"not json"#, 2),
        (r#"{"suite": "hamsim", "function": "gibbs", "d_list": [4]}"#, 4),
        (r#"{"suite": "qsvt", "function": "exp_it_cos", "d_list": [4]}"#, 4),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_config(dir.path(), config);
        assert_eq!(out.status.code(), Some(code), "{config}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(outputs(dir.path()).is_empty(), "{config} left {:?}", outputs(dir.path()));
    }
    let dir = tempfile::tempdir().unwrap();
    let missing = afqsp(&["run", "--config", dir.path().join("absent.json").to_str().unwrap()], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn table_prints_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = afqsp(&["table", "--function", "monomial_k", "--d", "4,8", "--param", "k=3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("d,interpolation_error,UB_d,budget,ratio,chebyshev_truncation_error,pass\n"));
    let rows = csv_records(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() <= 1e-11));

    let path = dir.path().join("t.json");
    let out = afqsp(
        &["table", "--function", "exp_it_cos", "--param", "t=5", "--d", "8,16,32,64", "--format", "json", "--out", path.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let doc = read_summary(&path);
    let errors: Vec<f64> = doc["rows"].as_array().unwrap().iter().map(|r| r["interpolation_error"].as_f64().unwrap()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0] || w[1] < 1e-14), "{errors:?}");

    let out = afqsp(&["table", "--function", "nope", "--d", "4"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let out = afqsp(&["table", "--function", "gibbs", "--d", "6"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

/// Numeric cells within 1e-9 relative of the frozen file, the rest verbatim.
fn assert_matches_golden(actual: &str, golden: &str) {
    let (a, g) = (csv_records(actual), csv_records(golden));
    assert_eq!(a.len(), g.len());
    for (ra, rg) in a.iter().zip(&g) {
        for (x, y) in ra.iter().zip(rg) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(x), Ok(y)) => assert!((x - y).abs() <= 1e-9 * y.abs().max(1e-300) + 1e-15, "{x} vs {y}"),
                _ => assert_eq!(x, y),
            }
        }
    }
}

#[test]
fn approx_table_matches_frozen_golden_file() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/approx_table_abs_power_c.csv");
    let dir = tempfile::tempdir().unwrap();
    let out = afqsp(&["table", "--function", "abs_power_c", "--param", "c=0.5", "--d", "4,8,16,32"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let actual = String::from_utf8(out.stdout).unwrap();
    assert_matches_golden(&actual, &fs::read_to_string(&golden).unwrap());
}
