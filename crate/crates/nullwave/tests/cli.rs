use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nullwave(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nullwave"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(
        r.records()
            .map(|x| x.unwrap().iter().map(String::from).collect()),
    );
    rows
}

fn field(rows: &[Vec<String>], row: usize, col: &str) -> f64 {
    let i = rows[0].iter().position(|h| h == col).unwrap();
    rows[row][i].parse().unwrap()
}

#[test]
fn verify_default_passes_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = nullwave(&["verify"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("verify.csv"));
    assert_eq!(rows[0], ["check", "value", "limit", "passed"]);
    assert!(rows[1..].iter().all(|r| r[3] == "true"));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["command"], "verify");
    assert!(meta["fitted"]["beta"].is_number());
    assert!(meta["tolerances"]["interpolation"].is_number());
}

#[test]
fn tightened_tolerance_fails_only_its_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, "[tolerances]\nclosed_form = 1e-20\n").unwrap();
    let o = nullwave(
        &["verify", "--config", cfg.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert_eq!(code(&o), 1);
    let rows = csv_rows(&dir.path().join("out/verify.csv"));
    let failed: Vec<&str> = rows[1..]
        .iter()
        .filter(|r| r[3] == "false")
        .map(|r| r[0].as_str())
        .collect();
    assert_eq!(failed, ["closed_form_limit"]);
}

#[test]
fn critical_exponent_is_refused_for_synthesis() {
    let dir = tempfile::tempdir().unwrap();
    let o = nullwave(&["control", "solve", "--alpha", "0.5"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha = 1/2"));
    let o = nullwave(
        &["degeneracy", "--alpha", "0.5", "--epsilon", "0.5"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
}

#[test]
fn invalid_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, "[sweep]\nepsilon = [1e-3, 1e-1]\n").unwrap();
    assert_eq!(
        code(&nullwave(
            &["sweep", "epsilon", "--config", cfg.to_str().unwrap()],
            dir.path()
        )),
        2
    );
    fs::write(&cfg, "[sweep]\nmodes = []\n").unwrap();
    assert_eq!(
        code(&nullwave(
            &["degeneracy", "--config", cfg.to_str().unwrap()],
            dir.path()
        )),
        2
    );
    assert_eq!(
        code(&nullwave(
            &["control", "solve", "--epsilon", "1.5"],
            dir.path()
        )),
        2
    );
    assert_eq!(
        code(&nullwave(&["control", "solve", "--series"], dir.path())),
        2
    );
    assert_eq!(
        code(&nullwave(&["spectrum", "dump", "--bogus"], dir.path())),
        2
    );
    assert_eq!(
        code(&nullwave(
            &["verify", "--config", "/nonexistent/exp.toml"],
            dir.path()
        )),
        2
    );
}

#[test]
fn oracle_and_series_controls() {
    let dir = tempfile::tempdir().unwrap();
    let o = nullwave(
        &[
            "control",
            "solve",
            "--oracle",
            "--modes",
            "8",
            "--epsilon",
            "0.1",
            "--alpha",
            "0.25",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let oracle = csv_rows(&dir.path().join("control.csv"));
    assert!(field(&oracle, 1, "final_residual") <= 1e-9);
    let o = nullwave(
        &["control", "solve", "--series", "--horizon", "12"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let series = csv_rows(&dir.path().join("control.csv"));
    assert!(field(&series, 1, "final_residual") <= 1e-4);
    let o = nullwave(
        &["control", "solve", "--oracle", "--horizon", "12"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let oracle12 = csv_rows(&dir.path().join("control.csv"));
    assert!(field(&oracle12, 1, "norm") <= field(&series, 1, "norm") * (1.0 + 1e-6));
}

#[test]
fn zero_data_gives_zero_control() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, "[data]\nkind = \"zero\"\n").unwrap();
    let o = nullwave(
        &["control", "solve", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&dir.path().join("control.csv"));
    assert_eq!(field(&rows, 1, "norm"), 0.0);
    assert_eq!(field(&rows, 1, "final_residual"), 0.0);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "ingham", "run", "--modes", "6", "--trials", "20", "--seed", "5",
    ];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    assert_eq!(code(&nullwave(&args, &a)), 0);
    assert_eq!(code(&nullwave(&args, &b)), 0);
    let mut other = args;
    other[7] = "6";
    assert_eq!(code(&nullwave(&other, &c)), 0);
    let read = |d: &Path| fs::read(d.join("ingham.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(csv_rows(&a.join("ingham.csv")).len(), 1 + 20 * 3 * 4);
}

#[test]
fn sweep_reports_weak_limit_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = nullwave(&["sweep", "epsilon", "--alpha", "0.75"], dir.path());
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 1 + 4 + 1);
    assert_eq!(rows[5][4], "weak_limit");
    assert!(field(&rows, 5, "final_residual") <= 1e-2);
}

#[test]
fn simulate_and_spectrum_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&nullwave(&["simulate", "--modes", "4"], dir.path())),
        0
    );
    let rows = csv_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(
        rows[0],
        ["t", "energy", "abs_u1", "abs_u2", "abs_u3", "abs_u4"]
    );
    let last = rows.len() - 1;
    assert!(field(&rows, last, "energy") <= 1e-9 * field(&rows, 1, "energy"));
    assert_eq!(
        code(&nullwave(&["spectrum", "dump", "--modes", "3"], dir.path())),
        0
    );
    assert_eq!(csv_rows(&dir.path().join("spectrum.csv")).len(), 1 + 3 * 6);
}

#[test]
fn check_commands_pass_at_defaults() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in [
        &["weierstrass", "check"][..],
        &["multiplier", "check"],
        &["biorth", "verify", "--modes", "2"],
    ] {
        let o = nullwave(cmd, dir.path());
        assert_eq!(
            code(&o),
            0,
            "{cmd:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let rows = csv_rows(&dir.path().join("norms.csv"));
    assert_eq!(rows.len(), 1 + 4);
    assert!(dir.path().join("theta_deviation.json").exists());
}
