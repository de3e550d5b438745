//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adasga::{AdaConfig, Alpha0, GammaPolicy};
use crate::error::{Error, Result};
use crate::problems::{LogSumExp, Objective, Poisson, PowerNorm, Quadratic, Region};
use crate::rates::{Claim, RateConstants};
use crate::rng::{seeded, uniform_in_ball};
use crate::sga::{SgaConfig, StepPolicy};
use crate::trace::StopRule;

/// Environment variable replacing every configured seed.
pub const SEED_ENV: &str = "HOLDERGRAD_SEED";

/// Objective family and parameters. Matrices are row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Quadratic {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    PowerNorm {
        nu: f64,
        dim: usize,
    },
    LogSumExp {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    /// Either observations `b` or a generating solution `x_true` (which pins the optimum).
    Poisson {
        a: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_true: Option<Vec<f64>>,
    },
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Box<dyn Objective>> {
        Ok(match self {
            ProblemSpec::Quadratic { a, b } => Box::new(Quadratic::new(a, b.clone())?),
            ProblemSpec::PowerNorm { nu, dim } => Box::new(PowerNorm::new(*nu, *dim)?),
            ProblemSpec::LogSumExp { a, b } => Box::new(LogSumExp::new(a, b.clone())?),
            ProblemSpec::Poisson { a, b, x_true } => match (b, x_true) {
                (Some(b), None) => Box::new(Poisson::new(a, b.clone())?),
                (None, Some(x)) => Box::new(Poisson::from_solution(a, x.clone())?),
                _ => return Err(Error::Config("poisson needs exactly one of b and x_true".into())),
            },
        })
    }
}

/// Solver choice. Stopping lives at the top level of the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverSpec {
    Sga {
        nu: f64,
        /// Hölder modulus; taken from the problem's ground truth when omitted.
        #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
        l: Option<f64>,
        policy: StepPolicy,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snapshot_every: Option<usize>,
    },
    Adasga(AdaSpec),
}

/// [`AdaConfig`] without the stopping rule and probe seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaSpec {
    pub omega: f64,
    pub tau: f64,
    pub gamma: GammaPolicy,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub alpha0: Alpha0,
    pub theta0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_ref: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
}

impl Default for AdaSpec {
    fn default() -> Self {
        let d = AdaConfig::default();
        AdaSpec {
            omega: d.omega,
            tau: d.tau,
            gamma: d.gamma,
            gamma_min: d.gamma_min,
            gamma_max: d.gamma_max,
            alpha0: d.alpha0,
            theta0: d.theta0,
            x_ref: None,
            snapshot_every: None,
        }
    }
}

impl AdaSpec {
    pub fn to_config(&self, stop: StopRule, probe_seed: u64) -> AdaConfig {
        AdaConfig {
            omega: self.omega,
            tau: self.tau,
            gamma: self.gamma,
            gamma_min: self.gamma_min,
            gamma_max: self.gamma_max,
            alpha0: self.alpha0,
            theta0: self.theta0,
            stop,
            x_ref: self.x_ref.clone(),
            snapshot_every: self.snapshot_every,
            probe_seed,
        }
    }
}

/// Starting point: explicit, or uniform in a ball drawn from the experiment seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum X0Spec {
    Vector(Vec<f64>),
    Random { random: RandomX0 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomX0 {
    pub radius: f64,
    /// Ball center; the origin when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

impl X0Spec {
    pub fn resolve(&self, dim: usize, seed: u64) -> Result<Vec<f64>> {
        match self {
            X0Spec::Vector(v) => Ok(v.clone()),
            X0Spec::Random { random } => {
                let center = random.center.clone().unwrap_or_else(|| vec![0.0; dim]);
                if center.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: center.len() });
                }
                let region = Region::new(center, random.radius)?;
                Ok(uniform_in_ball(&mut seeded(seed), &region))
            }
        }
    }
}

/// Sampling setup for the smoothness checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// Defaults to the known minimizer, else the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default = "default_check_radius")]
    pub radius: f64,
    #[serde(default = "default_check_pairs")]
    pub n_pairs: usize,
    /// Hölder exponent to check; defaults to the problem's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

fn default_check_radius() -> f64 {
    1.0
}

fn default_check_pairs() -> usize {
    10_000
}

impl Default for CheckSpec {
    fn default() -> Self {
        CheckSpec { center: None, radius: default_check_radius(), n_pairs: default_check_pairs(), nu: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Stem of the output files.
    #[serde(default = "default_name")]
    pub name: String,
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    pub x0: X0Spec,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claims: Option<Vec<Claim>>,
    /// Overrides for the constants derived from the solver and ground truth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<RateConstants>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSpec>,
}

fn default_name() -> String {
    "run".to_string()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Replaces the seed with `HOLDERGRAD_SEED` when that variable is set.
    pub fn apply_seed_override(&mut self) -> Result<()> {
        if let Some(seed) = seed_override()? {
            self.seed = seed;
        }
        Ok(())
    }

    /// Static checks that need no objective evaluation.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!("name {:?} is not a valid file stem", self.name)));
        }
        self.stop.validate()?;
        if let X0Spec::Random { random } = &self.x0 {
            if !(random.radius > 0.0 && random.radius.is_finite()) {
                return Err(Error::Config("random x0 radius must be positive".into()));
            }
        }
        if let Some(c) = &self.check {
            if c.n_pairs == 0 || !(c.radius > 0.0 && c.radius.is_finite()) {
                return Err(Error::Config("check needs n_pairs ≥ 1 and a positive radius".into()));
            }
        }
        match &self.solver {
            SolverSpec::Sga { nu, l, policy, .. } => {
                if let Some(l) = l {
                    SgaConfig::new(*nu, *l, *policy, self.stop).validate()?;
                }
            }
            SolverSpec::Adasga(a) => a.to_config(self.stop, self.seed).validate()?,
        }
        Ok(())
    }
}

/// Parsed value of `HOLDERGRAD_SEED`, if set.
pub fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("{SEED_ENV}: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "name": "quad",
        "problem": {"kind": "quadratic", "a": [[1, 0], [0, 10]], "b": [0, 0]},
        "solver": {"kind": "sga", "nu": 1, "L": 10, "policy": {"kind": "interval_constant", "alpha_bar": 0.1}},
        "x0": [1, 1],
        "stop": {"grad_tol": 1e-10, "max_iter": 500},
        "seed": 7,
        "output_dir": "out",
        "claims": ["q_linear_f", {"k0_count": {"eps": 1e-4}}]
    }"#;

    #[test]
    fn round_trips() {
        let cfg = ExperimentConfig::from_json(SAMPLE).unwrap();
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.claims.as_ref().unwrap()[1], Claim::K0Count { eps: 1e-4 });
    }

    #[test]
    fn rejects_unknown_fields_and_kinds() {
        let extra = SAMPLE.replace("\"seed\": 7", "\"seed\": 7, \"colour\": 1");
        assert!(ExperimentConfig::from_json(&extra).is_err());
        let kind = SAMPLE.replace("\"kind\": \"sga\"", "\"kind\": \"newton\"");
        assert!(ExperimentConfig::from_json(&kind).is_err());
        let nested = SAMPLE.replace("\"alpha_bar\": 0.1", "\"alpha_bar\": 0.1, \"x\": 2");
        assert!(ExperimentConfig::from_json(&nested).is_err());
    }

    #[test]
    fn rejects_step_above_the_cap() {
        let big = SAMPLE.replace("\"alpha_bar\": 0.1", "\"alpha_bar\": 0.5");
        assert!(matches!(ExperimentConfig::from_json(&big), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn random_start_is_seeded() {
        let spec = X0Spec::Random { random: RandomX0 { radius: 2.0, center: Some(vec![1.0, 1.0]) } };
        let a = spec.resolve(2, 3).unwrap();
        assert_eq!(a, spec.resolve(2, 3).unwrap());
        assert_ne!(a, spec.resolve(2, 4).unwrap());
        assert!(crate::linalg::dist(&a, &[1.0, 1.0]) <= 2.0);
    }

    #[test]
    fn adasga_defaults_fill_in() {
        let text = SAMPLE.replace(
            r#"{"kind": "sga", "nu": 1, "L": 10, "policy": {"kind": "interval_constant", "alpha_bar": 0.1}}"#,
            r#"{"kind": "adasga", "tau": 1.5, "gamma": {"kind": "bb1"}, "alpha0": "auto"}"#,
        );
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        let SolverSpec::Adasga(a) = &cfg.solver else { panic!("expected adasga") };
        assert_eq!(a.tau, 1.5);
        assert_eq!(a.omega, AdaSpec::default().omega);
        assert_eq!(a.gamma, GammaPolicy::Bb1);
    }

    #[test]
    fn poisson_needs_one_data_source() {
        let both = ProblemSpec::Poisson { a: vec![vec![1.0]], b: Some(vec![1.0]), x_true: Some(vec![1.0]) };
        assert!(both.build().is_err());
        let p = ProblemSpec::Poisson { a: vec![vec![1.0, 0.0], vec![0.0, 1.0]], b: None, x_true: Some(vec![1.0, 2.0]) };
        assert_eq!(p.build().unwrap().truth().x_star.as_deref(), Some(&[1.0, 2.0][..]));
    }
}
