use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ginibre-gumbel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn constants_at_one_million() {
    let v = json(&["constants", "--n", "1000000"]);
    let g = v["gamma_n"].as_f64().unwrap();
    assert!((g / 6.726417 - 1.0).abs() < 1e-4, "{g}");
    assert!(v["b_n"].as_f64().unwrap() > 385.0);
}

#[test]
fn inadmissible_size_exits_one() {
    let o = run(&["constants", "--n", "100"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gamma_n") && err.contains("<= 0"), "{err}");
}

#[test]
fn selftest_reports_gumbel_moment() {
    let v = json(&["selftest"]);
    let checks = v.as_array().unwrap();
    let m2 = checks.iter().find(|c| c["name"] == "gumbel_second_moment").unwrap();
    assert!((m2["value"].as_f64().unwrap() - 1.9781119906).abs() < 1e-9);
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["sample", "--n", "10", "--size", "5"]).status.code(), Some(1));
    assert_eq!(run(&["w1", "--n", "10000", "--tol", "0.5"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn unreachable_tolerance_exits_two() {
    let o = run(&["w1", "--n", "10000", "--tol", "1e-16"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn csv_and_json_carry_identical_numbers() {
    let v = json(&["ks", "--n", "1e4", "--scaling", "wn"]);
    let o = run(&["ks", "--n", "1e4", "--scaling", "wn", "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    for (h, cell) in header.iter().zip(&row) {
        match &v[*h] {
            serde_json::Value::Number(num) => assert_eq!(num.as_f64().unwrap(), cell.parse::<f64>().unwrap(), "{h}"),
            serde_json::Value::Null => assert!(cell.is_empty(), "{h}"),
            serde_json::Value::String(s) => assert_eq!(s, cell),
            other => panic!("{h}: {other:?}"),
        }
    }
}

#[test]
fn sampling_is_deterministic_across_thread_counts() {
    let a = run(&["sample", "--n", "500", "--size", "600", "--seed", "9", "--format", "csv", "--threads", "1"]);
    let b = run(&["sample", "--n", "500", "--size", "600", "--seed", "9", "--format", "csv", "--threads", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 601);
}

#[test]
fn sample_writes_binary_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draws.f64");
    let v = json(&["sample", "--n", "50", "--size", "100", "--seed", "2", "--binary", path.to_str().unwrap()]);
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 800);
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("draws.f64.json")).unwrap()).unwrap();
    assert_eq!(side["seed"], v["seed"]);
    assert_eq!(side["size"], 100);
}

#[test]
fn ladder_csv_has_one_row_per_size() {
    let o = run(&["ladder", "--ns", "1e4,2e4", "--format", "csv", "--tol", "1e-5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0].split(',').count(), 20);
}

#[test]
fn kostlan_validation_passes() {
    let v = json(&["validate-kostlan", "--n", "6", "--size", "1000", "--seed", "5"]);
    assert_eq!(v["pass"], true);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn tail_and_beta_side_by_side() {
    let t = json(&["tail", "--n", "1e6", "--k", "0", "--x", "2"]);
    assert!((t["u"].as_f64().unwrap() - 3.3646).abs() < 1e-3);
    let b = json(&["beta", "--n", "1e6", "--x", "0"]);
    assert!((b["beta_exact"].as_f64().unwrap() - 1.5084927).abs() < 1e-6);
    assert_eq!(run(&["tail", "--n", "1e6", "--k", "0", "--x", "0"]).status.code(), Some(1));
}

#[test]
fn cdf_on_explicit_grid() {
    let o = run(&["cdf", "--n", "1e4", "--grid", "-2:2:5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let cdf: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(cdf.len(), 5);
    assert!(cdf.windows(2).all(|w| w[0] < w[1]));
}
