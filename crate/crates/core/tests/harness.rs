use std::path::Path;

use holdergrad::harness::{
    emit_plot, exit_code_for, run_check, run_experiment, write_trace_file, ExperimentConfig, EXIT_CLAIM,
    EXIT_INVALID, EXIT_OK, EXIT_SOLVER,
};
use holdergrad::trace::{Status, Trace, TraceRecord, COLUMNS};

fn quad_config(dir: &Path, name: &str, x0: &str, extra: &str) -> String {
    format!(
        r#"{{
            "name": "{name}",
            "problem": {{"kind": "quadratic", "a": [[1, 0], [0, 10]], "b": [0, 0]}},
            "solver": {{"kind": "sga", "nu": 1, "L": 10, "policy": {{"kind": "constant", "alpha": 0.1}}}},
            "x0": {x0},
            "seed": 7,
            "stop": {{"grad_tol": 1e-10, "max_iter": 5000}},
            "output_dir": {:?}
            {extra}
        }}"#,
        dir.to_str().unwrap()
    )
}

#[test]
fn runs_are_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (cfg_text, dir) in [
        (quad_config(a.path(), "r", r#"{"random": {"radius": 2}}"#, ""), a.path()),
        (quad_config(b.path(), "r", r#"{"random": {"radius": 2}}"#, ""), b.path()),
    ] {
        let out = run_experiment(&ExperimentConfig::from_json(&cfg_text).unwrap()).unwrap();
        assert_eq!(out.trace_path, dir.join("r.csv"));
    }
    let fa = std::fs::read(a.path().join("r.csv")).unwrap();
    let fb = std::fs::read(b.path().join("r.csv")).unwrap();
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);
}

#[test]
fn trace_file_follows_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(&quad_config(dir.path(), "s", "[1, 1]", "")).unwrap();
    let out = run_experiment(&cfg).unwrap();
    let text = std::fs::read_to_string(&out.trace_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
    let mut n = 0;
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), COLUMNS.len(), "row {k}: {line}");
        assert_eq!(fields[0].parse::<usize>().unwrap(), k);
        for f in &fields[1..] {
            assert!(f.is_empty() || f.parse::<f64>().is_ok(), "row {k}: bad field {f:?}");
        }
        n += 1;
    }
    assert_eq!(n, out.trace.records.len());
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let ok = ExperimentConfig::from_json(&quad_config(dir.path(), "ok", "[1, 1]", r#", "claims": ["q_linear_x"]"#)).unwrap();
    assert_eq!(run_experiment(&ok).unwrap().exit_code(), EXIT_OK);

    let wrong = quad_config(dir.path(), "bad", "[1, 1]", r#", "claims": ["q_linear_f"], "constants": {"q1": 0.5}"#);
    assert_eq!(run_experiment(&ExperimentConfig::from_json(&wrong).unwrap()).unwrap().exit_code(), EXIT_CLAIM);

    let err = ExperimentConfig::from_json(r#"{"problem": {"kind": "quadratic"}}"#).unwrap_err();
    assert_eq!(exit_code_for(&err), EXIT_INVALID);
    let err = ExperimentConfig::from_json(&quad_config(dir.path(), "x", "[1, 1]", r#", "unexpected": 1"#)).unwrap_err();
    assert_eq!(exit_code_for(&err), EXIT_INVALID);

    let poisson = format!(
        r#"{{
            "problem": {{"kind": "poisson", "a": [[1, 0], [0, 1], [1, 1]], "x_true": [1, 1]}},
            "solver": {{"kind": "sga", "nu": 1, "L": 5, "policy": {{"kind": "constant", "alpha": 0.1}}}},
            "x0": [-1, 2],
            "output_dir": {:?}
        }}"#,
        dir.path().to_str().unwrap()
    );
    let err = run_experiment(&ExperimentConfig::from_json(&poisson).unwrap()).unwrap_err();
    assert_eq!(exit_code_for(&err), EXIT_SOLVER);
}

/// `(width, height)` of the plot area from the axis path `M x0 y0 V y1 H x1`.
fn plot_area(svg: &str) -> (f64, f64) {
    let d = svg.split(r#"<path d=""#).nth(1).unwrap().split('"').next().unwrap();
    let nums: Vec<f64> = d
        .split(['M', 'V', 'H', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect();
    (nums[3] - nums[0], nums[2] - nums[1])
}

fn attr_pair(svg: &str, name: &str) -> (f64, f64) {
    let v = svg.split(&format!(r#"{name}=""#)).nth(1).unwrap().split('"').next().unwrap();
    let mut it = v.split(' ').map(|s| s.parse::<f64>().unwrap());
    (it.next().unwrap(), it.next().unwrap())
}

fn polyline(svg: &str) -> Vec<(f64, f64)> {
    let p = svg.split(r#"points=""#).nth(1).unwrap().split('"').next().unwrap();
    p.split(' ')
        .map(|xy| {
            let (x, y) = xy.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[test]
fn log_plot_slope_matches_the_contraction_rate() {
    let dir = tempfile::tempdir().unwrap();
    // Along the first eigenvector the gap contracts by exactly (1 − 0.1)².
    let cfg = ExperimentConfig::from_json(&quad_config(dir.path(), "p", "[1, 0]", "")).unwrap();
    let out = run_experiment(&cfg).unwrap();
    let svg_path = emit_plot(&out.trace_path, "gap", true, None).unwrap();
    assert_eq!(svg_path, dir.path().join("p.gap.svg"));
    let svg = std::fs::read_to_string(svg_path).unwrap();

    let (w, h) = plot_area(&svg);
    let (x0, x1) = attr_pair(&svg, "data-x-range");
    let (y0, y1) = attr_pair(&svg, "data-y-range");
    let pts = polyline(&svg);
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    let pixel_slope = (b.1 - a.1) / (b.0 - a.0);
    let data_slope = -pixel_slope * (y1 - y0) / h * w / (x1 - x0);
    let want = 0.81f64.log10();
    assert!(((data_slope - want) / want).abs() <= 0.1, "slope {data_slope} vs {want}");
}

fn synthetic(gaps: &[Option<f64>]) -> Trace {
    let records = gaps
        .iter()
        .enumerate()
        .map(|(k, &gap)| TraceRecord { k, f: gap.unwrap_or(1.0), gap, grad_norm: 1.0, ..Default::default() })
        .collect();
    Trace { records, status: Status::MaxIter }
}

#[test]
fn log_plot_omits_nonpositive_values() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("z.csv");
    write_trace_file(&synthetic(&[Some(1.0), Some(0.1), Some(0.0), Some(0.01), None]), &csv).unwrap();
    let svg = std::fs::read_to_string(emit_plot(&csv, "gap", true, None).unwrap()).unwrap();
    assert_eq!(polyline(&svg).len(), 3);
    let linear = std::fs::read_to_string(emit_plot(&csv, "gap", false, Some(&dir.path().join("lin.svg"))).unwrap()).unwrap();
    assert_eq!(polyline(&linear).len(), 4);
}

#[test]
fn plotting_an_empty_column_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    write_trace_file(&synthetic(&[Some(1.0), Some(0.5)]), &csv).unwrap();
    let err = emit_plot(&csv, "lyap", false, None).unwrap_err();
    assert_eq!(exit_code_for(&err), EXIT_INVALID);
    assert!(emit_plot(&csv, "no_such_column", false, None).is_err());
    assert!(!dir.path().join("e.lyap.svg").exists());
}

#[test]
fn check_on_the_quadratic_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(&quad_config(dir.path(), "c", "[1, 1]", r#", "check": {"radius": 2, "n_pairs": 2000}"#)).unwrap();
    let rep = run_check(&cfg).unwrap();
    assert!(rep.is_clean(), "{rep:#?}");
    assert!((rep.l_hat - 10.0).abs() <= 1e-9 * 10.0, "L̂ = {}", rep.l_hat);
    assert!((rep.mu_hat.unwrap() - 1.0).abs() <= 1e-9, "μ̂ = {:?}", rep.mu_hat);
}
