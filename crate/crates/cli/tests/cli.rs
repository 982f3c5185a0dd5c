use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lmpot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmpot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn gpd_quantiles(n: usize, xi: f64) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            let q = 1.0 - (i as f64 - 0.5) / n as f64;
            if xi == 0.0 {
                -q.ln()
            } else {
                (q.powf(-xi) - 1.0) / xi
            }
        })
        .collect()
}

fn write_csv(dir: &Path, name: &str, values: &[f64]) -> PathBuf {
    let p = dir.join(name);
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn band_selector_on_gpd_quantiles_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "x.csv", &gpd_quantiles(500, 0.0));
    let report = dir.path().join("r.json");
    let diag = dir.path().join("d.tsv");
    let out = lmpot(&[
        "--input", s(&input), "--method", "alcbsm", "--obs-per-year", "5",
        "--out-report", s(&report), "--out-diagnostics", s(&diag),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["methods"][0]["outcome"]["method"], "alcbsm");
    assert!(json["methods"][0]["outcome"]["u_star"].is_number());
    let tsv = std::fs::read_to_string(&diag).unwrap();
    assert_eq!(tsv.lines().count(), 11);
    assert!(tsv.lines().next().unwrap().starts_with("i\tu_i\tn_u"));
}

#[test]
fn report_goes_to_stdout_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "x.csv", &gpd_quantiles(300, -0.1));
    let out = lmpot(&["--input", s(&input), "--method", "alcbsm"]);
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["n"], 300);
}

#[test]
fn constant_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "c.csv", &[4.0; 50]);
    let out = lmpot(&["--input", s(&input)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn bad_rows_and_flags_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "1\n2\nthree\n").unwrap();
    let out = lmpot(&["--input", s(&p)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let input = write_csv(dir.path(), "x.csv", &gpd_quantiles(200, 0.1));
    assert_eq!(lmpot(&["--input", s(&input), "--nsim", "5"]).status.code(), Some(2));
    assert_eq!(lmpot(&["--input", s(&input), "--alpha", "0.9"]).status.code(), Some(2));
    assert_eq!(lmpot(&["--input", s(&input), "--method", "nope"]).status.code(), Some(2));
    assert_eq!(lmpot(&["--input", "/nonexistent/file.csv"]).status.code(), Some(2));
    assert_eq!(lmpot(&[]).status.code(), Some(2));
}

#[test]
fn no_selection_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // Quantiles of a GPd with ξ = 2: no candidate admits asymptotic bands.
    let input = write_csv(dir.path(), "h.csv", &gpd_quantiles(300, 2.0));
    let out = lmpot(&["--input", s(&input), "--method", "alcbsm"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no threshold selected"));
}

#[test]
fn identical_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "x.csv", &gpd_quantiles(400, -0.2));
    let run = |tag: &str, threads: &str| {
        let r = dir.path().join(format!("r{tag}.json"));
        let d = dir.path().join(format!("d{tag}.tsv"));
        let l = dir.path().join(format!("l{tag}.csv"));
        let out = lmpot(&[
            "--input", s(&input), "--nsim", "200", "--seed", "7", "--threads", threads,
            "--out-report", s(&r), "--out-diagnostics", s(&d), "--out-lmrd", s(&l),
        ]);
        assert!(matches!(out.status.code(), Some(0) | Some(3)));
        [r, d, l].map(|p| std::fs::read(p).unwrap())
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "2");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn benchmark_subcommand_emits_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(
        &cfg,
        "n = 300\nreps = 3\nnsim = 100\nseed = 1\nmethods = [\"alcbsm\"]\n[parent]\ntype = \"gpd\"\nsigma = 1.0\nxi = 0.2\n",
    )
    .unwrap();
    let out_path = dir.path().join("m.json");
    let out = lmpot(&["benchmark", "--config", s(&cfg), "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let freqs = json["metrics"]["methods"][0]["selection_frequencies"].as_array().unwrap();
    assert_eq!(freqs.len(), 10);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "n = 300\n").unwrap();
    assert_eq!(lmpot(&["benchmark", "--config", s(&bad)]).status.code(), Some(2));
}
