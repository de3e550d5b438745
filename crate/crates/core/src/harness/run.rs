//! Single experiment execution and the exit-code contract.

use std::path::PathBuf;

use crate::adasga::run_adasga;
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, SolverSpec};
use crate::harness::tracefile::write_trace_file;
use crate::problems::Objective;
use crate::rates::{verify_bounds, RateConstants, RateReport};
use crate::sga::{run_sga, SgaConfig};
use crate::trace::{Status, Trace};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_CLAIM: u8 = 3;

/// Exit code for an error raised before or while running a solver.
pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::DomainViolation | Error::Numeric(_) => EXIT_SOLVER,
        _ => EXIT_INVALID,
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    pub trace_path: PathBuf,
    pub constants: RateConstants,
    /// Present when the configuration lists claims and the run finished cleanly.
    pub report: Option<RateReport>,
    pub report_path: Option<PathBuf>,
}

impl RunOutput {
    pub fn exit_code(&self) -> u8 {
        if matches!(self.trace.status, Status::DomainViolation | Status::NumericFailure) {
            return EXIT_SOLVER;
        }
        match &self.report {
            Some(r) if !r.all_passed() => EXIT_CLAIM,
            _ => EXIT_OK,
        }
    }
}

/// Runs the configured solver, writes `<output_dir>/<name>.csv`, and checks
/// the claims (writing `<name>.report.json`) when the run ended normally.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let obj = cfg.problem.build()?;
    let x0 = cfg.x0.resolve(obj.dim(), cfg.seed)?;
    let trace = solve(cfg, obj.as_ref(), &x0)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let trace_path = cfg.output_dir.join(format!("{}.csv", cfg.name));
    write_trace_file(&trace, &trace_path)?;

    let constants = derive_constants(cfg, obj.as_ref(), &trace)?;
    let failed = matches!(trace.status, Status::DomainViolation | Status::NumericFailure);
    let (report, report_path) = match &cfg.claims {
        Some(claims) if !failed => {
            let report = verify_bounds(&trace, &constants, claims)?;
            let path = cfg.output_dir.join(format!("{}.report.json", cfg.name));
            std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
            (Some(report), Some(path))
        }
        _ => (None, None),
    };
    Ok(RunOutput { trace, trace_path, constants, report, report_path })
}

fn sga_modulus(l: Option<f64>, obj: &dyn Objective) -> Result<f64> {
    l.or(obj.truth().holder_l).ok_or_else(|| {
        Error::Config(format!("solver needs L: {} has no known Hölder modulus", obj.name()))
    })
}

pub(crate) fn solve(cfg: &ExperimentConfig, obj: &dyn Objective, x0: &[f64]) -> Result<Trace> {
    match &cfg.solver {
        SolverSpec::Sga { nu, l, policy, snapshot_every } => {
            let mut sc = SgaConfig::new(*nu, sga_modulus(*l, obj)?, *policy, cfg.stop);
            sc.snapshot_every = *snapshot_every;
            run_sga(obj, x0, &sc)
        }
        SolverSpec::Adasga(a) => run_adasga(obj, x0, &a.to_config(cfg.stop, cfg.seed)),
    }
}

const DERIVED: [&str; 7] = ["q0", "q1", "q2", "q_hat", "c1_tilde", "c2_tilde", "c3_tilde"];

/// Constants from the solver parameters and ground truth, with the
/// configuration's explicit values taking precedence. Derived constants are
/// recomputed after the override so they never mix old and new inputs.
pub fn derive_constants(cfg: &ExperimentConfig, obj: &dyn Objective, trace: &Trace) -> Result<RateConstants> {
    let truth = obj.truth();
    let over = cfg.constants.clone().unwrap_or_default();
    let mu = over.mu.or(truth.mu);
    let base = match &cfg.solver {
        SolverSpec::Sga { nu, l, policy, .. } => {
            let l = over.l.or(*l).or(truth.holder_l);
            let mut c = RateConstants { nu: Some(*nu), l, alpha_bar: policy.lower_bound(), ..Default::default() };
            // Each optional family joins only when its own preconditions hold,
            // so an unrelated claim never fails on them.
            let with_mu = RateConstants { mu, ..c.clone() };
            if with_mu.clone().complete().is_ok() {
                c = with_mu;
            }
            let with_kl = RateConstants { theta_kl: truth.kl_theta, rho_kl: truth.kl_rho, ..c.clone() };
            if with_kl.clone().complete().is_ok() {
                c = with_kl;
            }
            c
        }
        SolverSpec::Adasga(a) => {
            let l = over.l.or(truth.holder_l.filter(|_| truth.nu == Some(1.0)));
            match (mu, l) {
                (Some(mu), Some(l)) => RateConstants::adasga_from_trace(trace, mu, l, a.omega, a.tau)
                    .unwrap_or_else(|_| RateConstants { omega: Some(a.omega), tau: Some(a.tau), ..Default::default() }),
                _ => RateConstants { omega: Some(a.omega), tau: Some(a.tau), mu, l, ..Default::default() },
            }
        }
    };
    let mut merged = serde_json::to_value(&base)?;
    let map = merged.as_object_mut().expect("constants serialize to an object");
    for key in DERIVED {
        map.remove(key);
    }
    if let serde_json::Value::Object(o) = serde_json::to_value(&over)? {
        map.extend(o);
    }
    let mut c: RateConstants = serde_json::from_value(merged)?;
    c.complete()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_cfg(dir: &std::path::Path, extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{
                "problem": {{"kind": "quadratic", "a": [[1, 0], [0, 10]], "b": [0, 0]}},
                "solver": {{"kind": "sga", "nu": 1, "L": 10, "policy": {{"kind": "interval_constant", "alpha_bar": 0.1}}}},
                "x0": [1, 1],
                "stop": {{"grad_tol": 1e-10, "max_iter": 2000}},
                "output_dir": {:?}
                {extra}
            }}"#,
            dir.to_str().unwrap()
        ))
        .unwrap()
    }

    #[test]
    fn strong_convexity_claims_pass_and_write_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quad_cfg(
            dir.path(),
            r#", "claims": ["q_linear_f", "q_linear_x", {"grad_count": {"eps": 1e-4}}, {"f_count": {"eps": 1e-8}}]"#,
        );
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.exit_code(), EXIT_OK, "{:#?}", out.report);
        assert!(out.trace_path.exists() && out.report_path.unwrap().exists());
        assert!((out.constants.q0.unwrap() - 2.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn wrong_constant_fails_the_claim() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quad_cfg(dir.path(), r#", "claims": ["q_linear_f"], "constants": {"q1": 0.5}"#);
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.exit_code(), EXIT_CLAIM);
    }

    #[test]
    fn override_recomputes_derived_constants() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quad_cfg(dir.path(), r#", "constants": {"mu": 0.5}"#);
        let out = run_experiment(&cfg).unwrap();
        let (q0, _) = crate::rates::sga_strong_constants(0.5, 10.0, 0.1).unwrap();
        assert_eq!(out.constants.q0, Some(q0));
    }

    #[test]
    fn infeasible_start_maps_to_solver_exit() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::from_json(&format!(
            r#"{{
                "problem": {{"kind": "poisson", "a": [[1, 0], [0, 1], [1, 1]], "x_true": [1, 1]}},
                "solver": {{"kind": "adasga"}},
                "x0": [-1, -1],
                "output_dir": {:?}
            }}"#,
            dir.path().to_str().unwrap()
        ))
        .unwrap();
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(exit_code_for(&err), EXIT_SOLVER);
    }

    #[test]
    fn claim_without_truth_is_invalid() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::from_json(&format!(
            r#"{{
                "problem": {{"kind": "poisson", "a": [[1, 0], [0, 1], [1, 1]], "b": [1, 1, 2]}},
                "solver": {{"kind": "sga", "nu": 1, "L": 5, "policy": {{"kind": "constant", "alpha": 0.1}}}},
                "x0": [1.2, 0.9],
                "stop": {{"max_iter": 50}},
                "output_dir": {:?},
                "claims": ["q_linear_x"]
            }}"#,
            dir.path().to_str().unwrap()
        ))
        .unwrap();
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(exit_code_for(&err), EXIT_INVALID);
    }
}
