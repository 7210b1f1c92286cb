use std::fs;
use std::process::{Command, Output};

fn tracepow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracepow")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn scenario1_csv_has_header_and_rows() {
    let out = tracepow(&["scenario1", "--dist", "geometric", "--k", "8,16", "--eps", "0.1", "--repeats", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "distribution,k,epsilon,t,table_t,n_samples,max_error_float,max_error_exact,bound_float,bound_exact,repeats,violations,satisfied,seed,run_id"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 15);
        assert_eq!(cols[0], "geometric");
        assert_eq!(cols[2], "1.0000000000000001e-1");
        assert_eq!(cols[12], "true");
    }
}

#[test]
fn scenario1_is_reproducible_from_seed() {
    let args = ["scenario1", "--dist", "arithmetic", "--k", "8", "--eps", "0.1", "--repeats", "3", "--seed", "7"];
    let strip = |s: String| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    assert_eq!(strip(stdout(&tracepow(&args))), strip(stdout(&tracepow(&args))));
}

#[test]
fn failed_row_exits_with_two() {
    let out = tracepow(&["scenario1", "--dist", "geometric", "--k", "8", "--eps", "0.1", "--t", "1", "--exact-oracle"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains(",false,"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(tracepow(&["scenario1", "--k", "x"]).status.code(), Some(1));
    assert_eq!(tracepow(&["estimate", "--dist", "nope"]).status.code(), Some(1));
    assert_eq!(tracepow(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(tracepow(&["--help"]).status.code(), Some(0));
}

#[test]
fn scenario2_json_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = tracepow(&[
        "scenario2",
        "--dist",
        "identical",
        "--t",
        "8",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["meta"]["experiment"], "scenario2");
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["t"], 8);
    assert_eq!(rows[0]["max_error_exact"], "109395/68719476736");
}

#[test]
fn estimate_from_spectrum_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.json");
    fs::write(&path, r#"{"eigenvalues": ["1/2", "1/4", "1/4"]}"#).unwrap();
    let out = tracepow(&["estimate", "--spectrum", path.to_str().unwrap(), "--k", "6", "--eps", "0.1", "--exact-oracle"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body["satisfied"], true);
    assert_eq!(body["estimate"].as_array().unwrap().len(), 6);
    assert_eq!(body["exact"][1].as_f64().unwrap(), 0.375);
}

#[test]
fn detect_werner_threshold() {
    let out = tracepow(&["detect", "--werner", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("label,entangled,witness,min_e\n"));
    assert!(text.contains("werner(0.5),true,"));

    let out = tracepow(&["detect", "--werner", "0.2", "--format", "json"]);
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body[0]["verdict"]["verdict"], "inconclusive");
}

#[test]
fn detect_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bell.json");
    let h = 0.5;
    let re = [h, 0.0, 0.0, h, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, h, 0.0, 0.0, h];
    fs::write(&path, serde_json::json!({"dim": 4, "re": re}).to_string()).unwrap();
    let out = tracepow(&["detect", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).lines().nth(1).unwrap().contains(",true,"));
}

#[test]
fn bounds_prints_json() {
    let out = tracepow(&["bounds", "--k", "32", "--eps", "0.1", "--r", "16", "--t", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body["effective_rank"], 6);
    assert_eq!(body["esp_max_bound"], "6435/2147483648");
}
