//! Runs every acceptance experiment, writes their traces and a summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::criteria::{Context, Criterion, Outcome, CRITERIA, DETERMINISM_ID, DETERMINISM_NAME};
use crate::harness::tracefile::{trace_to_string, write_trace_file};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub output_dir: PathBuf,
    /// Concurrent experiments; `0` uses every core.
    pub jobs: usize,
    pub seed: u64,
    /// Count a criterion as failed when it overruns its runtime budget.
    pub enforce_budgets: bool,
    /// Test hook, see [`Context::inject_wrong_q1`].
    pub inject_wrong_q1: bool,
}

impl SuiteOptions {
    pub fn new(output_dir: impl Into<PathBuf>) -> Self {
        SuiteOptions {
            output_dir: output_dir.into(),
            jobs: 0,
            seed: DEFAULT_SEED,
            enforce_budgets: true,
            inject_wrong_q1: false,
        }
    }

    fn context(&self) -> Context {
        Context { seed: self.seed, inject_wrong_q1: self.inject_wrong_q1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    /// Correct and, when budgets are enforced, within budget.
    pub passed: bool,
    pub correct: bool,
    pub runtime_ms: f64,
    pub budget_ms: Option<u64>,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
    /// Trace files written, relative to the output directory.
    pub traces: Vec<String>,
}

impl CriterionResult {
    pub fn within_budget(&self) -> bool {
        self.budget_ms.is_none_or(|b| self.runtime_ms <= b as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub passed: bool,
    pub failed: Vec<String>,
    pub criteria: Vec<CriterionResult>,
}

fn trace_rel_path(id: u8, label: &str) -> String {
    format!("traces/c{id:02}_{label}.csv")
}

fn finish(
    id: u8,
    name: &str,
    budget_ms: Option<u64>,
    enforce: bool,
    started: Instant,
    outcome: Result<Outcome>,
    output_dir: Option<&Path>,
) -> CriterionResult {
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
    let (mut correct, mut detail, metrics, mut traces) = match outcome {
        Ok(o) => (o.passed, o.detail, o.metrics, o.traces),
        Err(e) => (false, format!("error: {e}"), BTreeMap::new(), Vec::new()),
    };
    let mut written = Vec::new();
    if let Some(dir) = output_dir {
        for (label, trace) in traces.drain(..) {
            let rel = trace_rel_path(id, &label);
            if let Err(e) = write_trace_file(&trace, &dir.join(&rel)) {
                correct = false;
                detail = format!("cannot write {rel}: {e}");
                break;
            }
            written.push(rel);
        }
    }
    let mut r = CriterionResult {
        id,
        name: name.to_string(),
        passed: correct,
        correct,
        runtime_ms,
        budget_ms,
        detail,
        metrics,
        traces: written,
    };
    if enforce && !r.within_budget() {
        r.passed = false;
    }
    r
}

/// Runs one criterion, timing it and writing its traces under `output_dir`.
pub fn run_criterion(c: &Criterion, ctx: &Context, enforce_budgets: bool, output_dir: Option<&Path>) -> CriterionResult {
    let started = Instant::now();
    let outcome = (c.run)(ctx);
    finish(c.id, c.name, c.budget_ms, enforce_budgets, started, outcome, output_dir)
}

/// Reruns every trace-producing criterion and compares the serialized traces
/// byte for byte with the files already written.
pub fn determinism_check(ctx: &Context, output_dir: &Path, enforce_budgets: bool) -> CriterionResult {
    let started = Instant::now();
    let outcome = (|| -> Result<Outcome> {
        let mut out = Outcome { passed: true, ..Default::default() };
        let mut compared = 0usize;
        for c in &CRITERIA {
            let again = (c.run)(ctx)?;
            for (label, trace) in &again.traces {
                let rel = trace_rel_path(c.id, label);
                let on_disk = std::fs::read(output_dir.join(&rel)).map_err(Error::Io)?;
                compared += 1;
                if on_disk != trace_to_string(trace)?.into_bytes() {
                    out.passed = false;
                    out.detail = format!("{rel} differs between runs");
                }
            }
        }
        out.metrics.insert("files_compared".into(), compared as f64);
        if compared == 0 {
            out.passed = false;
            out.detail = "no traces to compare".into();
        }
        Ok(out)
    })();
    finish(DETERMINISM_ID, DETERMINISM_NAME, None, enforce_budgets, started, outcome, None)
}

/// Runs the whole suite, writing `traces/*.csv` and `summary.json` under the output directory.
pub fn suite(opts: &SuiteOptions) -> Result<SuiteSummary> {
    std::fs::create_dir_all(opts.output_dir.join("traces"))?;
    let ctx = opts.context();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let collected = Mutex::new(Vec::new());
    pool.install(|| {
        CRITERIA.par_iter().for_each(|c| {
            let r = run_criterion(c, &ctx, opts.enforce_budgets, Some(&opts.output_dir));
            collected.lock().expect("collector lock").push(r);
        })
    });
    let mut criteria = collected.into_inner().expect("collector lock");
    criteria.push(pool.install(|| determinism_check(&ctx, &opts.output_dir, opts.enforce_budgets)));
    criteria.sort_by_key(|r| r.id);
    let failed: Vec<String> = criteria.iter().filter(|r| !r.passed).map(|r| format!("{} {}", r.id, r.name)).collect();
    let summary = SuiteSummary { seed: opts.seed, passed: failed.is_empty(), failed, criteria };
    std::fs::write(opts.output_dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// Human-readable one-line-per-criterion table.
pub fn render_table(summary: &SuiteSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>3}  {:<32} {:<6} {:>10} {:>8}  detail", "id", "criterion", "result", "ms", "budget");
    for r in &summary.criteria {
        let budget = r.budget_ms.map_or("-".to_string(), |b| b.to_string());
        let result = match (r.correct, r.passed) {
            (true, true) => "PASS",
            (true, false) => "SLOW",
            _ => "FAIL",
        };
        let _ = writeln!(
            s,
            "{:>3}  {:<32} {:<6} {:>10.1} {:>8}  {}",
            r.id, r.name, result, r.runtime_ms, budget, r.detail
        );
    }
    let _ = writeln!(s, "{}", if summary.passed { "all criteria passed" } else { "some criteria failed" });
    s
}
