//! Scaled gradient steps `x − α‖g‖^{(1−ν)/ν} g` for ν-Hölder gradients.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{all_finite, dist, norm};
use crate::problems::Objective;
use crate::trace::{snapshot_every, Status, StopRule, Trace, TraceRecord};

/// `x − α‖g‖^{(1−ν)/ν} g`; `x` itself when `g = 0`.
pub fn sga_step(x: &[f64], g: &[f64], alpha: f64, nu: f64) -> Result<Vec<f64>> {
    if x.len() != g.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: g.len() });
    }
    if !all_finite(x) || !all_finite(g) || !alpha.is_finite() || !nu.is_finite() {
        return Err(Error::Numeric("non-finite input to scaled step".into()));
    }
    if !(alpha > 0.0) {
        return Err(invalid("step size must be positive"));
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(invalid("Hölder exponent must lie in (0,1]"));
    }
    let gn = norm(g);
    if gn == 0.0 {
        return Ok(x.to_vec());
    }
    let factor = if nu == 1.0 {
        alpha
    } else {
        let p = (1.0 - nu) / nu;
        if !(1e-100..=1e100).contains(&gn) {
            (alpha.ln() + p * gn.ln()).exp()
        } else {
            alpha * gn.powf(p)
        }
    };
    let out: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - factor * gi).collect();
    if !all_finite(&out) {
        return Err(Error::Numeric("scaled step overflowed".into()));
    }
    Ok(out)
}

/// Largest step Algorithm 1 admits: `((1+ν)/L)^{1/ν}`.
pub fn alpha_cap(nu: f64, l: f64) -> f64 {
    ((1.0 + nu) / l).powf(1.0 / nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// Maximizes the guaranteed function decrease.
    FunctionOptimal,
    /// Maximizes the guaranteed decrease of the distance to the minimizers.
    DistanceOptimal,
}

pub fn default_alpha(nu: f64, l: f64, mode: AlphaMode) -> f64 {
    let root = l.powf(1.0 / nu);
    match mode {
        AlphaMode::FunctionOptimal => 1.0 / root,
        AlphaMode::DistanceOptimal => 2.0 * nu / ((1.0 + nu) * root),
    }
}

/// Upper endpoint used to validate an interval-constant step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalForm {
    /// `1/L^{1/ν}`
    Holder,
    /// `1/L`
    Lipschitz,
    /// `min{1/L^{1/ν}, 1/L}`
    #[default]
    Conservative,
    /// `4ν/((1+ν)L^{1/ν})`, the range of guaranteed distance decrease.
    Distance,
}

impl IntervalForm {
    pub fn upper(self, nu: f64, l: f64) -> f64 {
        let root = l.powf(1.0 / nu);
        match self {
            IntervalForm::Holder => 1.0 / root,
            IntervalForm::Lipschitz => 1.0 / l,
            IntervalForm::Conservative => (1.0 / root).min(1.0 / l),
            IntervalForm::Distance => 4.0 * nu / ((1.0 + nu) * root),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    /// `α₀/(k+1)`
    Harmonic,
    /// `α₀/√(k+1)`
    Sqrt,
    /// `α₀·rᵏ`
    Geometric { ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepPolicy {
    Constant {
        alpha: f64,
    },
    /// The constant step `alpha_bar`, required to lie in `(0, form.upper]`.
    IntervalConstant {
        alpha_bar: f64,
        #[serde(default)]
        form: IntervalForm,
    },
    Diminishing {
        alpha0: f64,
        schedule: Schedule,
    },
}

impl StepPolicy {
    pub fn validate(&self, nu: f64, l: f64) -> Result<()> {
        let cap = alpha_cap(nu, l);
        let within = |a: f64, upper: f64, what: &str| -> Result<()> {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid(format!("{what} must be positive, got {a}")));
            }
            if a > upper * (1.0 + 1e-12) {
                return Err(invalid(format!("{what} {a} exceeds the admissible bound {upper}")));
            }
            Ok(())
        };
        match *self {
            StepPolicy::Constant { alpha } => within(alpha, cap, "step size"),
            StepPolicy::IntervalConstant { alpha_bar, form } => {
                within(alpha_bar, form.upper(nu, l).min(cap), "interval step")
            }
            StepPolicy::Diminishing { alpha0, schedule } => {
                if let Schedule::Geometric { ratio } = schedule {
                    if !(ratio > 0.0 && ratio < 1.0) {
                        return Err(invalid("geometric ratio must lie in (0,1)"));
                    }
                }
                within(alpha0, cap, "initial step size")
            }
        }
    }

    pub fn alpha(&self, k: usize) -> f64 {
        match *self {
            StepPolicy::Constant { alpha } => alpha,
            StepPolicy::IntervalConstant { alpha_bar, .. } => alpha_bar,
            StepPolicy::Diminishing { alpha0, schedule } => match schedule {
                Schedule::Harmonic => alpha0 / (k as f64 + 1.0),
                Schedule::Sqrt => alpha0 / (k as f64 + 1.0).sqrt(),
                Schedule::Geometric { ratio } => alpha0 * ratio.powi(k as i32),
            },
        }
    }

    /// A positive lower bound on every emitted step, if one exists.
    pub fn lower_bound(&self) -> Option<f64> {
        match *self {
            StepPolicy::Constant { alpha } => Some(alpha),
            StepPolicy::IntervalConstant { alpha_bar, .. } => Some(alpha_bar),
            StepPolicy::Diminishing { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgaConfig {
    pub nu: f64,
    pub l: f64,
    pub policy: StepPolicy,
    pub stop: StopRule,
    pub snapshot_every: Option<usize>,
}

impl SgaConfig {
    pub fn new(nu: f64, l: f64, policy: StepPolicy, stop: StopRule) -> Self {
        SgaConfig { nu, l, policy, stop, snapshot_every: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(invalid(format!("Hölder exponent must lie in (0,1], got {}", self.nu)));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(invalid(format!("Hölder modulus must be positive, got {}", self.l)));
        }
        self.stop.validate()?;
        self.policy.validate(self.nu, self.l)
    }
}

pub(crate) enum Probe {
    Ok(f64, Vec<f64>),
    Failed(Status),
}

pub(crate) fn probe(obj: &dyn Objective, x: &[f64]) -> Probe {
    if !all_finite(x) {
        return Probe::Failed(Status::NumericFailure);
    }
    if !obj.in_domain(x) {
        return Probe::Failed(Status::DomainViolation);
    }
    match obj.eval(x) {
        Ok((f, g)) if f.is_finite() && all_finite(&g) => Probe::Ok(f, g),
        Ok(_) => Probe::Failed(Status::NumericFailure),
        Err(Error::DomainViolation) => Probe::Failed(Status::DomainViolation),
        Err(_) => Probe::Failed(Status::NumericFailure),
    }
}

pub(crate) fn check_start(obj: &dyn Objective, x0: &[f64], stop: &StopRule) -> Result<()> {
    if x0.len() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), got: x0.len() });
    }
    if !all_finite(x0) {
        return Err(Error::Numeric("starting point is not finite".into()));
    }
    if !obj.in_domain(x0) {
        return Err(Error::DomainViolation);
    }
    if stop.f_tol.is_some() && obj.truth().f_star.is_none() {
        return Err(Error::MissingTruth("f_tol stopping needs the optimal value".into()));
    }
    Ok(())
}

/// Runs the scaled gradient method from `x0`.
///
/// Errors only on invalid configuration or an infeasible start; failures
/// after the first step end the trace with the matching status.
pub fn run_sga(obj: &dyn Objective, x0: &[f64], cfg: &SgaConfig) -> Result<Trace> {
    cfg.validate()?;
    check_start(obj, x0, &cfg.stop)?;
    let every = snapshot_every(obj.dim(), cfg.snapshot_every)?;
    let x_star = obj.truth().x_star.clone();
    let mut records = Vec::new();
    let mut x = x0.to_vec();
    let mut k = 0usize;
    let status = loop {
        let (f, g) = match probe(obj, &x) {
            Probe::Ok(f, g) => (f, g),
            Probe::Failed(s) => break s,
        };
        let grad_norm = norm(&g);
        let gap = obj.gap(&x, f);
        let mut rec = TraceRecord {
            k,
            f,
            gap,
            grad_norm,
            dist_opt: x_star.as_ref().map(|xs| dist(&x, xs)),
            x: k.is_multiple_of(every).then(|| x.clone()),
            ..Default::default()
        };
        if let Some(s) = cfg.stop.check(k, grad_norm, gap) {
            rec.x = Some(x.clone());
            records.push(rec);
            break s;
        }
        let alpha = cfg.policy.alpha(k);
        rec.alpha = Some(alpha);
        records.push(rec);
        match sga_step(&x, &g, alpha, cfg.nu) {
            Ok(next) => x = next,
            Err(_) => break Status::NumericFailure,
        }
        k += 1;
    };
    Ok(Trace { records, status })
}
