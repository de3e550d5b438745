//! Acceptance criteria 1 through 12, one line per criterion.
//!
//! Run with `cargo test -p holdergrad --test acceptance -- --nocapture` to see
//! the lines.

use std::collections::BTreeMap;
use std::path::Path;

use holdergrad::harness::criteria::{Context, CRITERIA};
use holdergrad::harness::suite::{run_criterion, suite, SuiteOptions, DEFAULT_SEED};

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir.join("traces")).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "csv") {
            out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap());
        }
    }
    out
}

#[test]
fn acceptance_criteria() {
    let ctx = Context { seed: DEFAULT_SEED, inject_wrong_q1: false };
    let mut failures = Vec::new();
    for c in &CRITERIA {
        let r = run_criterion(c, &ctx, true, None);
        let budget = r.budget_ms.map_or(String::new(), |b| format!(" (budget {b} ms)"));
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {:<32} {verdict} in {:.0} ms{budget} {:?} {}", r.id, r.name, r.runtime_ms, r.metrics, r.detail);
        if !r.passed {
            failures.push(format!("{} {}: {}", r.id, r.name, r.detail));
        }
    }

    // Determinism: two full suite runs into separate directories.
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut opts = SuiteOptions::new(a.path());
    opts.enforce_budgets = false;
    suite(&opts).unwrap();
    opts.output_dir = b.path().to_path_buf();
    suite(&opts).unwrap();
    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    let identical = !fa.is_empty() && fa == fb;
    println!(
        "criterion 12 {:<32} {} ({} trace files compared)",
        "determinism",
        if identical { "PASS" } else { "FAIL" },
        fa.len()
    );
    if !identical {
        failures.push("12 determinism: traces differ between suite runs".into());
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}

#[test]
fn injected_wrong_rate_constant_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut opts = SuiteOptions::new(dir.path());
    opts.enforce_budgets = false;
    opts.inject_wrong_q1 = true;
    let summary = suite(&opts).unwrap();
    assert!(!summary.passed);
    assert_eq!(summary.failed, vec!["5 strong_convexity_q_linear".to_string()]);
    let c5 = summary.criteria.iter().find(|r| r.id == 5).unwrap();
    assert!(c5.detail.contains("q_linear_f"), "{}", c5.detail);
    assert!(dir.path().join("summary.json").exists());
}
