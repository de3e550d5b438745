use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn holdergrad(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_holdergrad"));
    cmd.args(args).env_remove("HOLDERGRAD_SEED");
    if let Some(s) = seed {
        cmd.env("HOLDERGRAD_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let text = body.replace("OUT", &format!("{:?}", dir.to_str().unwrap())).replace("NAME", name);
    std::fs::write(&path, text).unwrap();
    path
}

const QUAD: &str = r#"{
    "name": "NAME",
    "problem": {"kind": "quadratic", "a": [[1, 0], [0, 10]], "b": [0, 0]},
    "solver": {"kind": "sga", "nu": 1, "L": 10, "policy": {"kind": "interval_constant", "alpha_bar": 0.1}},
    "x0": [1, 1],
    "stop": {"grad_tol": 1e-10, "max_iter": 5000},
    "output_dir": OUT,
    "claims": ["q_linear_f", "q_linear_x"]
}"#;

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_succeeds_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "quad", QUAD);
    let out = holdergrad(&["run", p(&cfg)], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("q_linear_f") && stdout.contains("PASS"), "{stdout}");
    assert!(dir.path().join("quad.csv").exists());
    assert!(dir.path().join("quad.report.json").exists());
}

#[test]
fn wrong_constant_exits_with_claim_failure() {
    let dir = tempfile::tempdir().unwrap();
    let body = QUAD.replace(r#""claims""#, r#""constants": {"q1": 0.5}, "claims""#);
    let cfg = write_config(dir.path(), "wrong", &body);
    let out = holdergrad(&["run", p(&cfg)], None);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn invalid_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "unknown", &QUAD.replace(r#""kind": "sga""#, r#""kind": "newton""#));
    assert_eq!(code(&holdergrad(&["run", p(&unknown)], None)), 1);
    assert_eq!(code(&holdergrad(&["run", p(&dir.path().join("missing.json"))], None)), 1);
    let cfg = write_config(dir.path(), "quad", QUAD);
    assert_eq!(code(&holdergrad(&["run", p(&cfg)], Some("not-a-number"))), 1);
    assert_eq!(code(&holdergrad(&["frobnicate"], None)), 1);
    assert_eq!(code(&holdergrad(&["--help"], None)), 0);
}

#[test]
fn infeasible_start_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "poisson",
        r#"{
            "problem": {"kind": "poisson", "a": [[1, 0], [0, 1], [1, 1]], "x_true": [1, 1]},
            "solver": {"kind": "adasga"},
            "x0": [-1, -1],
            "output_dir": OUT
        }"#,
    );
    let out = holdergrad(&["run", p(&cfg)], None);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn seed_variable_overrides_random_starts() {
    let dir = tempfile::tempdir().unwrap();
    let body = QUAD.replace(r#""x0": [1, 1]"#, r#""x0": {"random": {"radius": 2}}"#);
    let cfg = write_config(dir.path(), "rand", &body);
    let csv = dir.path().join("rand.csv");
    let mut files = Vec::new();
    for seed in ["1", "1", "2"] {
        assert_eq!(code(&holdergrad(&["run", p(&cfg)], Some(seed))), 0);
        files.push(std::fs::read(&csv).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_ne!(files[0], files[2]);
}

#[test]
fn check_writes_a_clean_report_for_the_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let body = QUAD.replace(r#""claims""#, r#""check": {"radius": 2, "n_pairs": 1000}, "claims""#);
    let cfg = write_config(dir.path(), "chk", &body);
    let out = holdergrad(&["check", p(&cfg)], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("chk.check.json")).unwrap()).unwrap();
    assert!((rep["l_hat"].as_f64().unwrap() - 10.0).abs() < 1e-8);
}

#[test]
fn rates_and_plot_work_on_a_written_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "quad", QUAD);
    assert_eq!(code(&holdergrad(&["run", p(&cfg)], None)), 0);
    let csv = dir.path().join("quad.csv");

    let good = r#"{"nu": 1, "L": 10, "mu": 1, "alpha_bar": 0.1}"#;
    let out = holdergrad(&["rates", p(&csv), "--constants", good], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let out = holdergrad(&["rates", p(&csv), "--constants", good, "--json"], None);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["bound_satisfied"]["q_linear_x"], true);
    let consts = dir.path().join("c.json");
    std::fs::write(&consts, r#"{"q1": 0.5}"#).unwrap();
    let out = holdergrad(&["rates", p(&csv), "--constants", p(&consts), "--claims", r#"["q_linear_f"]"#], None);
    assert_eq!(code(&out), 3);

    let out = holdergrad(&["plot", p(&csv), "--y", "gap", "--log"], None);
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("quad.gap.svg").exists());
    assert_eq!(code(&holdergrad(&["plot", p(&csv), "--y", "lyap"], None)), 1);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "k,f,gap\n0,1,2\n").unwrap();
    assert_eq!(code(&holdergrad(&["plot", p(&bad), "--y", "f"], None)), 1);
    assert_eq!(code(&holdergrad(&["rates", p(&bad), "--constants", good], None)), 1);
}

#[test]
fn suite_passes_and_writes_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = holdergrad(&["suite", "--jobs", "4", "--out", p(dir.path())], None);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{stdout}");
    assert!(stdout.contains("determinism"), "{stdout}");
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
}
