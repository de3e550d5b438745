use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use holdergrad::harness::config::seed_override;
use holdergrad::harness::suite::DEFAULT_SEED;
use holdergrad::harness::{
    emit_plot, exit_code_for, read_trace_file, render_table, run_check, run_experiment, suite, CheckReport,
    ExperimentConfig, SuiteOptions, EXIT_CLAIM, EXIT_INVALID, EXIT_OK,
};
use holdergrad::rates::{verify_bounds, Claim, RateConstants, RateReport};
use holdergrad::smoothness::ViolationReport;
use holdergrad::{Error, Result};

/// Scaled and adaptive scaled gradient experiments.
///
/// Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 failed claim or check.
#[derive(Parser)]
#[command(name = "holdergrad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and verify its claims.
    Run {
        config: PathBuf,
    },
    /// Run the acceptance suite. HOLDERGRAD_SEED replaces the default seed.
    Suite {
        /// Concurrent experiments; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, default_value = "holdergrad-suite")]
        out: PathBuf,
        /// Report runtime budget overruns without failing the criterion.
        #[arg(long)]
        ignore_budgets: bool,
    },
    /// Check the smoothness characterizations of the configured problem.
    Check {
        config: PathBuf,
    },
    /// Verify rate claims against a trace file.
    Rates {
        trace: PathBuf,
        /// Constants as inline JSON or a path to a JSON file.
        #[arg(long)]
        constants: String,
        /// Claims as an inline JSON array or a path; defaults to every claim the constants support.
        #[arg(long)]
        claims: Option<String>,
        /// Accuracy for the default count claims.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Plot one trace column as SVG.
    Plot {
        trace: PathBuf,
        #[arg(long)]
        y: String,
        #[arg(long)]
        log: bool,
        /// Output path; defaults to `<trace stem>.<column>.svg` beside the trace.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { EXIT_OK });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("holdergrad: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Run { config } => cmd_run(&config),
        Command::Suite { jobs, out, ignore_budgets } => cmd_suite(jobs, out, ignore_budgets),
        Command::Check { config } => cmd_check(&config),
        Command::Rates { trace, constants, claims, eps, json } => cmd_rates(&trace, &constants, claims.as_deref(), eps, json),
        Command::Plot { trace, y, log, out } => {
            let path = emit_plot(&trace, &y, log, out.as_deref())?;
            println!("{}", path.display());
            Ok(EXIT_OK)
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply_seed_override()?;
    Ok(cfg)
}

fn cmd_run(path: &Path) -> Result<u8> {
    let cfg = load_config(path)?;
    let out = run_experiment(&cfg)?;
    let last = out.trace.last();
    println!("{}: {:?} after {} iterations", cfg.name, out.trace.status, out.trace.iterations());
    println!("  f = {:e}  grad_norm = {:e}", last.f, last.grad_norm);
    if let Some(gap) = last.gap {
        println!("  gap = {gap:e}");
    }
    println!("  trace: {}", out.trace_path.display());
    if let (Some(report), Some(path)) = (&out.report, &out.report_path) {
        print!("{}", report_table(report));
        println!("  report: {}", path.display());
    }
    Ok(out.exit_code())
}

fn cmd_suite(jobs: usize, out: PathBuf, ignore_budgets: bool) -> Result<u8> {
    let mut opts = SuiteOptions::new(out);
    opts.jobs = jobs;
    opts.seed = seed_override()?.unwrap_or(DEFAULT_SEED);
    opts.enforce_budgets = !ignore_budgets;
    let summary = suite(&opts)?;
    print!("{}", render_table(&summary));
    println!("summary: {}", opts.output_dir.join("summary.json").display());
    Ok(if summary.passed { EXIT_OK } else { EXIT_INVALID })
}

fn violation_line(name: &str, rep: &ViolationReport) -> String {
    let checked: usize = rep.checked.values().sum();
    let mut line = format!("  {name:<14} {checked:>8} checked {:>6} violations", rep.violations.len());
    for (ineq, n) in &rep.checked {
        let bad = rep.count(ineq);
        if bad > 0 {
            line.push_str(&format!("  {ineq}: {bad}/{n}"));
        }
    }
    line
}

fn print_check(rep: &CheckReport) {
    println!("{} on ball(center {:?}, radius {}), nu = {}", rep.problem, rep.region.center, rep.region.radius, rep.nu);
    println!("  pairs evaluated {}  L_hat = {:e}", rep.pairs_evaluated, rep.l_hat);
    if let Some(l) = rep.l_smooth {
        println!("  smoothness certificate L = {l:e}");
    }
    if let Some(mu) = rep.mu_hat {
        println!("  mu_hat = {mu:e}");
    }
    println!("{}", violation_line("holder", &rep.holder));
    if let Some(s) = &rep.smooth {
        println!("{}", violation_line("smooth", s));
    }
    if let Some(s) = &rep.strong_smooth {
        println!("{}", violation_line("strong_smooth", s));
    }
}

fn cmd_check(path: &Path) -> Result<u8> {
    let cfg = load_config(path)?;
    let rep = run_check(&cfg)?;
    print_check(&rep);
    std::fs::create_dir_all(&cfg.output_dir)?;
    let out = cfg.output_dir.join(format!("{}.check.json", cfg.name));
    std::fs::write(&out, serde_json::to_string_pretty(&rep)?)?;
    println!("  report: {}", out.display());
    Ok(if rep.is_clean() { EXIT_OK } else { EXIT_CLAIM })
}

/// Inline JSON when the argument looks like JSON, otherwise a file path.
fn json_arg(arg: &str) -> Result<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(arg.to_string())
    } else {
        Ok(std::fs::read_to_string(arg)?)
    }
}

fn cmd_rates(trace: &Path, constants: &str, claims: Option<&str>, eps: f64, json: bool) -> Result<u8> {
    let trace = read_trace_file(trace)?;
    let mut c: RateConstants = serde_json::from_str(&json_arg(constants)?)?;
    c.complete()?;
    let claims: Vec<Claim> = match claims {
        Some(arg) => serde_json::from_str(&json_arg(arg)?)?,
        None => Claim::applicable(&c, eps),
    };
    if claims.is_empty() {
        return Err(Error::Config("no claim applies to the given constants".into()));
    }
    let report = verify_bounds(&trace, &c, &claims)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report_table(&report));
    }
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_CLAIM })
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.6e}"))
}

fn report_table(report: &RateReport) -> String {
    let mut s = format!("  {:<26} {:<5} {:>13} {:>13} {:>13} {:>16}\n", "claim", "ok", "worst_slack", "fit", "bound", "count/bound");
    for v in &report.verdicts {
        let count = v.count.as_ref().map_or("-".to_string(), |c| {
            format!("{}/{}", c.actual.map_or("never".to_string(), |a| a.to_string()), c.bound)
        });
        s.push_str(&format!(
            "  {:<26} {:<5} {:>13} {:>13} {:>13} {:>16}\n",
            v.claim.name(),
            if v.passed { "PASS" } else { "FAIL" },
            opt(v.worst_slack),
            opt(v.empirical_rate),
            opt(v.bound_rate),
            count
        ));
        if !v.violations.is_empty() {
            let shown: Vec<String> = v.violations.iter().take(10).map(|k| k.to_string()).collect();
            s.push_str(&format!("    violations at k = {}{}\n", shown.join(","), if v.violations.len() > 10 { ",..." } else { "" }));
        }
        if let Some(n) = &v.note {
            s.push_str(&format!("    {n}\n"));
        }
    }
    s
}
