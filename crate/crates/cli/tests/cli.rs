use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudoent")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

#[test]
fn catalog_listing_and_filters() {
    let all = run(&["catalog"]);
    assert!(all.status.success());
    assert_eq!(stdout(&all).lines().filter(|l| !l.starts_with(' ')).count(), 108);

    let ghz = run(&["catalog", "--filter", "ghz"]);
    let text = stdout(&ghz);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with(' ')).collect();
    assert_eq!(rows.len(), 16);
    assert!(text.contains("note:"), "G7 discrepancy is shown");

    let none = run(&["catalog", "--filter", "nonexistent"]);
    assert_eq!(none.status.code(), Some(0));
    assert!(stdout(&none).is_empty());

    let json = run(&["catalog", "--filter", "wprime", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 8);
    assert_eq!(v[0]["name"], "W'1");
    assert_eq!(v[0]["weight"], "1");
    assert_eq!(v[0]["measure"], serde_json::json!(["θ1"]));
}

#[test]
fn build_outputs() {
    let b = run(&["build", "--name", "B1-"]);
    assert_eq!(stdout(&b).trim(), "|ψ0ψ1⟩ - |ψ1ψ0⟩");

    let g = run(&["build", "--name", "G1+", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&g)).unwrap();
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    assert!(terms.iter().all(|t| t["re"] == 1.0 && t["im"] == 0.0));

    let w = run(&["build", "--name", "W'1", "--format", "csv"]);
    let signs: Vec<String> = stdout(&w).lines().skip(1).map(|l| l.split(',').nth(1).unwrap().to_string()).collect();
    assert_eq!(signs, ["-1", "1", "-1"]);

    let missing = run(&["build", "--name", "B9+"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("unknown catalog name"));
}

#[test]
fn solve_targets() {
    let o = run(&["solve", "--target", "psi0,psi1", "--target", "-psi1,psi0"]);
    assert_eq!(stdout(&o).trim(), "-θ1 + θ2");
    let o = run(&["solve", "--target", "psi0,psi0", "--target", "psi1,psi1"]);
    assert_eq!(stdout(&o).trim(), "-1 - θ1·θ2");
    let o = run(&["solve", "--name", "W'3"]);
    assert_eq!(stdout(&o).trim(), "1");
    let o = run(&["solve", "--product", "psi,phi", "--shared", "--target", "psi1,phi1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("|ψ1φ1⟩"));
}

#[test]
fn measure_rows() {
    let o = run(&["measure", "--name", "B2-", "--alpha1", "pi/4", "--alpha2", "pi/4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v[0]["value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!(v[0]["abs_diff"].as_f64().unwrap() <= 1e-10);

    let o = run(&["measure", "--name", "G1+", "--measure", "avg_entropy", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v[0]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let o = run(&["measure", "--name", "B2-", "--s", "1", "--delta", "0", "--format", "csv"]);
    assert!(stdout(&o).starts_with("s,delta,value,closed_form,abs_diff\n1,0,"));

    let o = run(&["measure", "--name", "B2-", "--alpha", "pi/2"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["measure", "--name", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn measure_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.cfg");
    fs::write(&path, "# equal angles\nalpha = pi/4\n").unwrap();
    let o = run(&["measure", "--name", "B2-", "--config", path.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v[0]["value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);

    fs::write(&path, "r = 1\ns = 2\nt = 1\nbeta = 0.3\n").unwrap();
    let o = run(&["measure", "--name", "B1-", "--config", path.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v[0]["closed_form"].is_null());
    assert_eq!(v[0]["inputs"][0][0], "r1");

    let o = run(&["measure", "--name", "B1-", "--config", "/nonexistent/params.cfg"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn sweep_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&["sweep", "--name", "B2-", "--range", "0:2pi", "--steps", "201", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,value,closed_form,abs_diff");
    assert_eq!(lines.len(), 202);
    let value = |i: usize| lines[i + 1].split(',').nth(1).unwrap().parse::<f64>().unwrap();
    for i in [0, 100, 200] {
        assert!((value(i) - 1.0).abs() < 1e-12);
    }
    assert!(value(50).is_nan() && value(150).is_nan());
    assert!(value(49) < 1e-3 && value(151) < 1e-3);
}

#[test]
fn two_dimensional_case_b_sweep() {
    let o = run(&[
        "sweep", "--name", "B2-", "--var", "s", "--range", "1:2", "--steps", "11", "--var2", "delta", "--range2",
        "-2:2", "--steps2", "21",
    ]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,delta,value,closed_form,abs_diff");
    assert_eq!(lines.len(), 1 + 11 * 21);
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        if f[2] != "NaN" {
            assert!(f[4].parse::<f64>().unwrap() <= 1e-10, "{l}");
        }
    }
}

#[test]
fn entropy_sweep_is_bounded() {
    let o = run(&["sweep", "--name", "W7", "--measure", "avg_entropy", "--steps", "101"]);
    let text = stdout(&o);
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    assert!(finite.iter().all(|&v| (-1e-12..=8.0 / 9.0 + 1e-12).contains(&v)));
    assert!((values[0] - 8.0 / 9.0).abs() < 1e-12);
}

#[test]
fn bad_sweeps_and_io() {
    assert_eq!(run(&["sweep", "--name", "B2-", "--steps", "1"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--name", "B2-", "--range", "2:1"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--name", "Q", "--steps", "3"]).status.code(), Some(2));
    let o = run(&["sweep", "--name", "B2-", "--steps", "3", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn verify_passes_and_detects_faults() {
    let ok = run(&["verify"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = stdout(&ok);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 9);
    assert!(text.contains("skipped alpha=1.5707963267948966"));

    let bad = run(&["verify", "--inject-fault", "G3-"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).lines().any(|l| l.starts_with("FAIL table_fidelity")));
}
