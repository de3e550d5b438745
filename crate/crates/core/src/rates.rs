//! Rate constants, complexity bounds and trace-versus-bound verdicts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adasga::lyapunov_hat_scalar;
use crate::error::{invalid, Error, Result};
use crate::trace::{Trace, TraceRecord};

fn pos(v: f64, what: &str) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(format!("{what} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn ceil_count(v: f64) -> Result<u64> {
    if !v.is_finite() || v > u64::MAX as f64 {
        return Err(Error::Numeric(format!("iteration bound {v} is not representable")));
    }
    Ok(v.ceil().max(1.0) as u64)
}

/// `⌈(log(1/ε) + log x)/log(1/y) + 1⌉`, floored at 1.
pub fn mn_bound(eps: f64, x: f64, y: f64) -> Result<u64> {
    pos(eps, "eps")?;
    pos(x, "x")?;
    if !(y > 0.0 && y < 1.0) {
        return Err(invalid(format!("contraction factor must lie in (0,1), got {y}")));
    }
    ceil_count((x / eps).ln() / (1.0 / y).ln() + 1.0)
}

/// Iterations after which some gradient norm is at most `eps`:
/// `⌈(1+ν)(f⁰−f*)/(L ᾱ^{1+ν} ε^{(1+ν)/ν}) + 1⌉`. Requires `ᾱ < 1/L^{1/ν}`.
pub fn sga_grad_complexity(nu: f64, l: f64, alpha_bar: f64, f0_gap: f64, eps: f64) -> Result<u64> {
    pos(l, "L")?;
    pos(alpha_bar, "alpha_bar")?;
    pos(eps, "eps")?;
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(invalid("Hölder exponent must lie in (0,1]"));
    }
    if !(f0_gap >= 0.0 && f0_gap.is_finite()) {
        return Err(invalid("initial gap must be nonnegative"));
    }
    if alpha_bar >= 1.0 / l.powf(1.0 / nu) {
        return Err(invalid(format!(
            "alpha_bar {alpha_bar} must be below 1/L^(1/nu) = {}",
            1.0 / l.powf(1.0 / nu)
        )));
    }
    let v = (1.0 + nu) * f0_gap / (l * alpha_bar.powf(1.0 + nu) * eps.powf((1.0 + nu) / nu)) + 1.0;
    ceil_count(v)
}

/// `(q0, q1) = (2ᾱμL/(μ+L), μ²ᾱ²/4)` for `0 < μ < L` and `0 < ᾱ ≤ 1/L`.
pub fn sga_strong_constants(mu: f64, l: f64, alpha_bar: f64) -> Result<(f64, f64)> {
    pos(mu, "mu")?;
    pos(l, "L")?;
    pos(alpha_bar, "alpha_bar")?;
    if mu >= l {
        return Err(invalid(format!("need mu < L, got mu = {mu}, L = {l}")));
    }
    if alpha_bar > (1.0 / l) * (1.0 + 1e-12) {
        return Err(invalid(format!("alpha_bar {alpha_bar} exceeds 1/L = {}", 1.0 / l)));
    }
    Ok((2.0 * alpha_bar * mu * l / (mu + l), mu * mu * alpha_bar * alpha_bar / 4.0))
}

/// `(1−θ) L ᾱ^{1/(1−θ)} ρ^{−1/θ}`.
pub fn kl_rate_q2(theta: f64, rho: f64, l: f64, alpha_bar: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid(format!("KL exponent must lie in (0,1), got {theta}")));
    }
    pos(rho, "rho")?;
    pos(l, "L")?;
    pos(alpha_bar, "alpha_bar")?;
    Ok((1.0 - theta) * l * alpha_bar.powf(1.0 / (1.0 - theta)) * rho.powf(-1.0 / theta))
}

/// Contraction constant of the strong-convexity Lyapunov function.
pub fn adasga_qhat(mu: f64, l: f64, omega: f64, tau: f64, alpha0gamma0: f64) -> Result<f64> {
    pos(mu, "mu")?;
    pos(l, "L")?;
    pos(alpha0gamma0, "alpha0*gamma0")?;
    check_omega(omega)?;
    if mu > l {
        return Err(invalid(format!("need mu ≤ L, got mu = {mu}, L = {l}")));
    }
    if !(tau > 1.0 && tau.is_finite()) {
        return Err(invalid(format!("linear rate needs tau > 1, got {tau}")));
    }
    let w2 = omega * omega;
    let t1 = 0.5 * mu * alpha0gamma0.min(omega / l);
    let t2 = mu * (1.0 - w2) / (2.0 * omega * w2 * l + mu * (1.0 - w2));
    let m = (alpha0gamma0 * mu / omega).min(mu / l);
    let t3 = (tau - 1.0) * m / (tau * (2.0 * (1.0 - w2) + m));
    Ok(t1.min(t2).min(t3))
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega <= std::f64::consts::FRAC_1_SQRT_2 * (1.0 + 1e-15)) {
        return Err(invalid(format!("omega must lie in (0, 1/√2], got {omega}")));
    }
    Ok(())
}

/// `(c̃1, c̃2, c̃3)` of the R-linear rates; `r` is `R + ‖x⁰‖`.
pub fn adasga_strong_constants(
    mu: f64,
    l: f64,
    omega: f64,
    alpha0: f64,
    gamma0: f64,
    r: f64,
    eta: f64,
) -> Result<(f64, f64, f64)> {
    pos(mu, "mu")?;
    pos(l, "L")?;
    pos(alpha0, "alpha0")?;
    pos(gamma0, "gamma0")?;
    check_omega(omega)?;
    if mu > l {
        return Err(invalid(format!("need mu ≤ L, got mu = {mu}, L = {l}")));
    }
    if !(r >= 0.0 && eta >= 0.0) {
        return Err(invalid("R and eta must be nonnegative"));
    }
    let ag = alpha0 * gamma0;
    let w2 = omega * omega;
    let c1 = (r * r + eta).sqrt();
    let c2 = omega * l * l * c1 * c1 / (mu * (ag * ag * l * l).min(w2));
    let c3 = (2.0 * c1 * c1 * (1.0 - w2) * omega * l.powi(3)).sqrt()
        / ((2.0 * w2 * l + (1.0 - w2) * mu).sqrt() * (ag * l).min(omega));
    Ok((c1, c2, c3))
}

/// `(K_grad, K_fun)` sublinear iteration bounds of the adaptive method.
#[allow(clippy::too_many_arguments)]
pub fn adasga_complexity(
    l: f64,
    alpha0: f64,
    gamma0: f64,
    omega: f64,
    r: f64,
    eta: f64,
    x0_norm: f64,
    eps: f64,
) -> Result<(u64, u64)> {
    pos(l, "L")?;
    pos(alpha0, "alpha0")?;
    pos(gamma0, "gamma0")?;
    pos(eps, "eps")?;
    check_omega(omega)?;
    if !(r >= 0.0 && eta >= 0.0 && x0_norm >= 0.0) {
        return Err(invalid("R, eta and ‖x0‖ must be nonnegative"));
    }
    let m = (l * alpha0 * gamma0).min(omega);
    let k_grad = ceil_count(1.0 + l * l * eta / (eps * eps * m))?;
    let rr = r + x0_norm;
    let k_fun = ceil_count(1.0 + l * (rr * rr + eta) / (2.0 * eps * m))?;
    Ok((k_grad, k_fun))
}

/// `dist(x⁰,X*)² + 2α₀²γ₀²‖∇f(x⁰)‖² + 2α₀γ₀θ₀(f(x⁰) − f*)`.
pub fn adasga_eta(dist0: f64, alpha0gamma0: f64, grad0_norm: f64, theta0: f64, gap0: f64) -> f64 {
    dist0 * dist0
        + 2.0 * alpha0gamma0 * alpha0gamma0 * grad0_norm * grad0_norm
        + 2.0 * alpha0gamma0 * theta0 * gap0
}

/// Radius around the origin containing every adaptive iterate: `√η + dist(x⁰,X*) + ‖x⁰‖`.
pub fn adasga_iterate_radius(eta: f64, dist0: f64, x0_norm: f64) -> f64 {
    eta.sqrt() + dist0 + x0_norm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum RecursionClass {
    Finite,
    Linear { rate: f64 },
    Sublinear { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionReport {
    pub class: RecursionClass,
    /// Indices `k` where `(s^k)^θ ≤ β(s^k − s^{k+1})` fails.
    pub violations: Vec<usize>,
}

/// Checks `(s^k)^θ ≤ β(s^k − s^{k+1})` along `seq` and returns the implied convergence class.
pub fn classify_recursion(seq: &[f64], theta: f64, beta: f64) -> Result<RecursionReport> {
    pos(beta, "beta")?;
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(invalid("theta must be nonnegative"));
    }
    if seq.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
        return Err(invalid("sequence entries must be finite and nonnegative"));
    }
    let violations = seq
        .windows(2)
        .enumerate()
        .filter_map(|(k, w)| {
            let lhs = w[0].powf(theta);
            let rhs = beta * (w[0] - w[1]);
            (lhs > rhs + 1e-12 * lhs.max(rhs.abs())).then_some(k)
        })
        .collect();
    let class = if theta == 0.0 {
        RecursionClass::Finite
    } else if theta <= 1.0 {
        RecursionClass::Linear { rate: 1.0 - 1.0 / beta }
    } else {
        RecursionClass::Sublinear { exponent: 1.0 / (theta - 1.0) }
    };
    Ok(RecursionReport { class, violations })
}

/// Geometric mean of successive ratios over the last `tail_fraction` of `seq`.
pub fn fit_linear_rate(seq: &[f64], tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(invalid("tail_fraction must lie in (0,1]"));
    }
    let n = seq.len();
    let m = ((n as f64) * tail_fraction).ceil() as usize;
    let tail = &seq[n - m.min(n)..];
    if tail.len() < 3 {
        return Err(invalid(format!("rate fit needs at least 3 tail entries, got {}", tail.len())));
    }
    if tail.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(invalid("rate fit needs positive finite entries"));
    }
    let mean = tail.windows(2).map(|w| (w[1] / w[0]).ln()).sum::<f64>() / (tail.len() - 1) as f64;
    Ok(mean.exp())
}

/// Theoretical constants together with the inputs they were derived from.
///
/// `r` is the radius `R` of the region holding the adaptive iterates and
/// `x0_norm` is `‖x⁰‖`; the R-linear and sublinear bounds use `R + ‖x⁰‖`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateConstants {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c3_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_kl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_kl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha0gamma0: Option<f64>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0_norm: Option<f64>,
}

impl RateConstants {
    /// Fills every derived constant whose inputs are present and not already set.
    pub fn complete(&mut self) -> Result<()> {
        if let (Some(mu), Some(l), Some(ab)) = (self.mu, self.l, self.alpha_bar) {
            if mu < l && (self.q0.is_none() || self.q1.is_none()) {
                let (q0, q1) = sga_strong_constants(mu, l, ab)?;
                self.q0.get_or_insert(q0);
                self.q1.get_or_insert(q1);
            }
        }
        if let (None, Some(t), Some(r), Some(l), Some(ab)) = (self.q2, self.theta_kl, self.rho_kl, self.l, self.alpha_bar) {
            self.q2 = Some(kl_rate_q2(t, r, l, ab)?);
        }
        if let (Some(mu), Some(l), Some(w), Some(ag)) = (self.mu, self.l, self.omega, self.alpha0gamma0) {
            if let (None, Some(tau)) = (self.q_hat, self.tau) {
                if tau > 1.0 {
                    self.q_hat = Some(adasga_qhat(mu, l, w, tau, ag)?);
                }
            }
            if let (None, Some(r), Some(eta)) = (self.c1_tilde, self.r, self.eta) {
                let rr = r + self.x0_norm.unwrap_or(0.0);
                let (c1, c2, c3) = adasga_strong_constants(mu, l, w, ag, 1.0, rr, eta)?;
                self.c1_tilde = Some(c1);
                self.c2_tilde = Some(c2);
                self.c3_tilde = Some(c3);
            }
        }
        Ok(())
    }

    /// Scaled-gradient constants for step sizes bounded below by `alpha_bar`.
    pub fn sga(nu: f64, l: f64, alpha_bar: f64, mu: Option<f64>) -> Result<Self> {
        let mut c = RateConstants { nu: Some(nu), l: Some(l), alpha_bar: Some(alpha_bar), mu, ..Default::default() };
        c.complete()?;
        Ok(c)
    }

    /// Adaptive-method constants with `η` and `R` read off the first trace row.
    pub fn adasga_from_trace(trace: &Trace, mu: f64, l: f64, omega: f64, tau: f64) -> Result<Self> {
        let r0 = trace.records.first().ok_or_else(|| Error::Trace("empty trace".into()))?;
        let need = |v: Option<f64>, what: &str| v.ok_or_else(|| Error::MissingTruth(format!("first trace row lacks {what}")));
        let ag = need(r0.alpha, "alpha")? * need(r0.gamma, "gamma")?;
        let theta0 = need(r0.theta, "theta")?;
        let gap0 = need(r0.gap, "gap")?;
        let dist0 = need(r0.dist_opt, "dist_opt")?;
        let x0 = r0.x.as_ref().ok_or_else(|| Error::MissingTruth("first trace row lacks x".into()))?;
        let x0_norm = crate::linalg::norm(x0);
        let eta = adasga_eta(dist0, ag, r0.grad_norm, theta0, gap0);
        let mut c = RateConstants {
            mu: Some(mu),
            l: Some(l),
            omega: Some(omega),
            tau: Some(tau),
            alpha0gamma0: Some(ag),
            eta: Some(eta),
            r: Some(adasga_iterate_radius(eta, dist0, x0_norm)),
            x0_norm: Some(x0_norm),
            ..Default::default()
        };
        c.complete()?;
        Ok(c)
    }
}

/// A statement about a trace that [`verify_bounds`] can check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// Per-step gap ratio at most `1 − q1`.
    QLinearF,
    /// Per-step squared-distance ratio at most `1 − q0`.
    QLinearX,
    /// Per-step gap ratio at most `1 − q2`.
    KlQLinearF,
    /// First `k` with `‖∇f‖ ≤ eps` is at most the sublinear bound.
    K0Count { eps: f64 },
    XCount { eps: f64 },
    FCount { eps: f64 },
    GradCount { eps: f64 },
    KlFCount { eps: f64 },
    KlGradCount { eps: f64 },
    /// The Lyapunov column is nonincreasing from `k = 1`.
    LyapunovMonotone,
    /// The strong-convexity Lyapunov function contracts by `1 − q̂` per step.
    LyapunovHatContraction,
    AdaGradCount { eps: f64 },
    AdaFunCount { eps: f64 },
    AdaLinearXCount { eps: f64 },
    AdaLinearFCount { eps: f64 },
    AdaLinearGradCount { eps: f64 },
}

impl Claim {
    pub fn name(&self) -> &'static str {
        match self {
            Claim::QLinearF => "q_linear_f",
            Claim::QLinearX => "q_linear_x",
            Claim::KlQLinearF => "kl_q_linear_f",
            Claim::K0Count { .. } => "k0_count",
            Claim::XCount { .. } => "x_count",
            Claim::FCount { .. } => "f_count",
            Claim::GradCount { .. } => "grad_count",
            Claim::KlFCount { .. } => "kl_f_count",
            Claim::KlGradCount { .. } => "kl_grad_count",
            Claim::LyapunovMonotone => "lyapunov_monotone",
            Claim::LyapunovHatContraction => "lyapunov_hat_contraction",
            Claim::AdaGradCount { .. } => "ada_grad_count",
            Claim::AdaFunCount { .. } => "ada_fun_count",
            Claim::AdaLinearXCount { .. } => "ada_linear_x_count",
            Claim::AdaLinearFCount { .. } => "ada_linear_f_count",
            Claim::AdaLinearGradCount { .. } => "ada_linear_grad_count",
        }
    }

    /// Claims whose constants are all present in `c`, in a fixed order.
    pub fn applicable(c: &RateConstants, eps: f64) -> Vec<Claim> {
        let mut out = Vec::new();
        if c.q1.is_some() {
            out.push(Claim::QLinearF);
            out.push(Claim::FCount { eps });
        }
        if c.q0.is_some() {
            out.push(Claim::QLinearX);
            out.push(Claim::XCount { eps });
        }
        if c.q1.is_some() && c.mu.is_some() && c.l.is_some() {
            out.push(Claim::GradCount { eps });
        }
        if c.q2.is_some() {
            out.push(Claim::KlQLinearF);
            out.push(Claim::KlFCount { eps });
            if c.l.is_some() && c.alpha_bar.is_some() && c.theta_kl.is_some() {
                out.push(Claim::KlGradCount { eps });
            }
        }
        if let (Some(nu), Some(l), Some(ab)) = (c.nu, c.l, c.alpha_bar) {
            // The sublinear bound needs the strict step condition.
            if ab < 1.0 / l.powf(1.0 / nu) {
                out.push(Claim::K0Count { eps });
            }
        }
        if c.q_hat.is_some() && c.omega.is_some() && c.mu.is_some() && c.l.is_some() {
            out.push(Claim::LyapunovHatContraction);
        }
        if c.eta.is_some() && c.l.is_some() && c.alpha0gamma0.is_some() && c.omega.is_some() {
            out.push(Claim::AdaGradCount { eps });
            if c.r.is_some() {
                out.push(Claim::AdaFunCount { eps });
            }
        }
        if c.q_hat.is_some() && c.c1_tilde.is_some() {
            out.push(Claim::AdaLinearXCount { eps });
            out.push(Claim::AdaLinearFCount { eps });
            out.push(Claim::AdaLinearGradCount { eps });
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountCheck {
    /// First iteration meeting the accuracy; `None` if the trace never does.
    pub actual: Option<usize>,
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimVerdict {
    pub claim: Claim,
    pub passed: bool,
    /// Smallest `bound − observed` over the scan; negative means violated.
    pub worst_slack: Option<f64>,
    /// Iterations where the per-step inequality failed.
    pub violations: Vec<usize>,
    pub empirical_rate: Option<f64>,
    pub bound_rate: Option<f64>,
    pub count: Option<CountCheck>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub theoretical: RateConstants,
    /// Tail fit of the gap sequence, when available.
    pub empirical_rate: Option<f64>,
    pub verdicts: Vec<ClaimVerdict>,
    pub bound_satisfied: BTreeMap<String, bool>,
    pub iteration_counts: BTreeMap<String, (Option<usize>, u64)>,
}

impl RateReport {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

/// Per-step ratio tolerance.
const RATIO_TOL: f64 = 1e-9;
/// Tail share used for empirical rate fits.
const TAIL: f64 = 0.5;

/// Quantities below this multiple of machine epsilon (relative to the initial
/// scale) are rounding noise and end every comparison.
fn noise_floor(scale: f64) -> f64 {
    1e2 * f64::EPSILON * scale.abs()
}

fn need_const(v: Option<f64>, claim: &Claim, what: &str) -> Result<f64> {
    v.ok_or_else(|| invalid(format!("claim {} needs constant {what}", claim.name())))
}

fn need_column(trace: &Trace, name: &str, claim: &Claim) -> Result<Vec<f64>> {
    let col = trace.column(name)?;
    let mut out = Vec::with_capacity(col.len());
    for v in col {
        match v {
            Some(v) => out.push(v),
            None => break,
        }
    }
    if out.is_empty() {
        return Err(Error::MissingTruth(format!(
            "claim {} needs the {name} column, which the trace lacks",
            claim.name()
        )));
    }
    Ok(out)
}

fn ratio_verdict(claim: Claim, seq: &[f64], bound: f64, floor: f64) -> ClaimVerdict {
    let mut violations = Vec::new();
    let mut worst: Option<f64> = None;
    let mut used = vec![];
    for (k, w) in seq.windows(2).enumerate() {
        if w[0] <= floor {
            break;
        }
        used.push(w[0]);
        let slack = bound - w[1] / w[0];
        worst = Some(worst.map_or(slack, |m: f64| m.min(slack)));
        if slack < -RATIO_TOL {
            violations.push(k);
        }
        if w[1] <= floor {
            break;
        }
        if k + 2 == seq.len() {
            used.push(w[1]);
        }
    }
    if let Some(&last) = seq.get(used.len()) {
        if last > 0.0 && used.last().is_some_and(|&p| p > floor) {
            used.push(last);
        }
    }
    used.dedup();
    let empirical = fit_linear_rate(&used, TAIL).ok();
    let rate_ok = empirical.is_none_or(|e| e <= bound + RATIO_TOL);
    ClaimVerdict {
        claim,
        passed: violations.is_empty() && rate_ok && worst.is_some(),
        worst_slack: worst,
        violations,
        empirical_rate: empirical,
        bound_rate: Some(bound),
        count: None,
        note: worst.is_none().then(|| "no comparable steps above the noise floor".to_string()),
    }
}

fn count_verdict(claim: Claim, seq: &[f64], eps: f64, bound: u64) -> ClaimVerdict {
    let actual = seq.iter().position(|&v| v <= eps);
    let passed = actual.is_some_and(|a| a as u64 <= bound);
    ClaimVerdict {
        claim,
        passed,
        worst_slack: actual.map(|a| bound as f64 - a as f64),
        violations: vec![],
        empirical_rate: None,
        bound_rate: None,
        count: Some(CountCheck { actual, bound }),
        note: actual.is_none().then(|| format!("trace never reached accuracy {eps}")),
    }
}

fn first(trace: &Trace) -> &TraceRecord {
    &trace.records[0]
}

fn verify_claim(trace: &Trace, c: &RateConstants, claim: Claim) -> Result<ClaimVerdict> {
    let f0 = first(trace).f;
    Ok(match claim {
        Claim::QLinearF | Claim::KlQLinearF => {
            let q = match claim {
                Claim::QLinearF => need_const(c.q1, &claim, "q1")?,
                _ => need_const(c.q2, &claim, "q2")?,
            };
            let gap = need_column(trace, "gap", &claim)?;
            ratio_verdict(claim, &gap, 1.0 - q, noise_floor(f0.abs().max(gap[0])))
        }
        Claim::QLinearX => {
            let q0 = need_const(c.q0, &claim, "q0")?;
            let d2: Vec<f64> = need_column(trace, "dist_opt", &claim)?.iter().map(|d| d * d).collect();
            ratio_verdict(claim, &d2, 1.0 - q0, noise_floor(d2[0]))
        }
        Claim::LyapunovMonotone => {
            let lyap = need_column_from(trace, "lyap", 1, &claim)?;
            let floor = noise_floor(lyap[0]);
            let mut violations = Vec::new();
            let mut worst: Option<f64> = None;
            for (i, w) in lyap.windows(2).enumerate() {
                if w[0] <= floor {
                    break;
                }
                let slack = w[0] * (1.0 + 1e-10) - w[1];
                let rel = slack / w[0];
                worst = Some(worst.map_or(rel, |m: f64| m.min(rel)));
                if slack < 0.0 {
                    violations.push(i + 1);
                }
            }
            ClaimVerdict {
                claim,
                passed: violations.is_empty(),
                worst_slack: worst,
                violations,
                empirical_rate: None,
                bound_rate: Some(1.0),
                count: None,
                note: None,
            }
        }
        Claim::LyapunovHatContraction => {
            let q = need_const(c.q_hat, &claim, "q_hat")?;
            let omega = need_const(c.omega, &claim, "omega")?;
            let mu = need_const(c.mu, &claim, "mu")?;
            let l = need_const(c.l, &claim, "L")?;
            let seq = lyapunov_hat_series(trace, omega, mu, l, &claim)?;
            let floor = noise_floor(seq.first().copied().unwrap_or(0.0));
            ratio_verdict(claim, &seq, 1.0 - q, floor)
        }
        Claim::K0Count { eps } => {
            let nu = need_const(c.nu, &claim, "nu")?;
            let l = need_const(c.l, &claim, "L")?;
            let ab = need_const(c.alpha_bar, &claim, "alpha_bar")?;
            let gap0 = need_column(trace, "gap", &claim)?[0];
            let bound = sga_grad_complexity(nu, l, ab, gap0, eps)?;
            count_verdict(claim, &need_column(trace, "grad_norm", &claim)?, eps, bound)
        }
        Claim::XCount { eps } => {
            let q0 = need_const(c.q0, &claim, "q0")?;
            let d = need_column(trace, "dist_opt", &claim)?;
            count_verdict(claim, &d, eps, mn_or_one(eps, d[0], (1.0 - q0).sqrt())?)
        }
        Claim::FCount { eps } => {
            let q1 = need_const(c.q1, &claim, "q1")?;
            let gap = need_column(trace, "gap", &claim)?;
            count_verdict(claim, &gap, eps, mn_or_one(eps, gap[0], 1.0 - q1)?)
        }
        Claim::GradCount { eps } => {
            let q1 = need_const(c.q1, &claim, "q1")?;
            let mu = need_const(c.mu, &claim, "mu")?;
            let l = need_const(c.l, &claim, "L")?;
            let gap0 = need_column(trace, "gap", &claim)?[0];
            let x = (2.0 * l * l * gap0 / mu).sqrt();
            let g = need_column(trace, "grad_norm", &claim)?;
            count_verdict(claim, &g, eps, mn_or_one(eps, x, (1.0 - q1).sqrt())?)
        }
        Claim::KlFCount { eps } => {
            let q2 = need_const(c.q2, &claim, "q2")?;
            let gap = need_column(trace, "gap", &claim)?;
            count_verdict(claim, &gap, eps, mn_or_one(eps, gap[0], 1.0 - q2)?)
        }
        Claim::KlGradCount { eps } => {
            let q2 = need_const(c.q2, &claim, "q2")?;
            let th = need_const(c.theta_kl, &claim, "theta_kl")?;
            let l = need_const(c.l, &claim, "L")?;
            let ab = need_const(c.alpha_bar, &claim, "alpha_bar")?;
            let gap0 = need_column(trace, "gap", &claim)?[0];
            let x = (gap0 / ((1.0 - th) * l * ab.powf(1.0 / (1.0 - th)))).powf(th);
            let g = need_column(trace, "grad_norm", &claim)?;
            count_verdict(claim, &g, eps, mn_or_one(eps, x, (1.0 - q2).powf(th))?)
        }
        Claim::AdaGradCount { eps } | Claim::AdaFunCount { eps } => {
            let l = need_const(c.l, &claim, "L")?;
            let ag = need_const(c.alpha0gamma0, &claim, "alpha0gamma0")?;
            let omega = need_const(c.omega, &claim, "omega")?;
            let eta = need_const(c.eta, &claim, "eta")?;
            let r = c.r.unwrap_or(0.0);
            let x0n = c.x0_norm.unwrap_or(0.0);
            let (kg, kf) = adasga_complexity(l, ag, 1.0, omega, r, eta, x0n, eps)?;
            if matches!(claim, Claim::AdaGradCount { .. }) {
                count_verdict(claim, &need_column(trace, "grad_norm", &claim)?, eps, kg)
            } else {
                need_const(c.r, &claim, "R")?;
                count_verdict(claim, &need_column(trace, "gap", &claim)?, eps, kf)
            }
        }
        Claim::AdaLinearXCount { eps } => {
            let q = need_const(c.q_hat, &claim, "q_hat")?;
            let c1 = need_const(c.c1_tilde, &claim, "c1_tilde")?;
            let d = need_column(trace, "dist_opt", &claim)?;
            count_verdict(claim, &d, eps, mn_or_one(eps, c1, (1.0 - q).sqrt())?)
        }
        Claim::AdaLinearFCount { eps } => {
            let q = need_const(c.q_hat, &claim, "q_hat")?;
            let c2 = need_const(c.c2_tilde, &claim, "c2_tilde")?;
            let gap = need_column(trace, "gap", &claim)?;
            count_verdict(claim, &gap, eps, mn_or_one(eps, c2, 1.0 - q)?)
        }
        Claim::AdaLinearGradCount { eps } => {
            let q = need_const(c.q_hat, &claim, "q_hat")?;
            let c3 = need_const(c.c3_tilde, &claim, "c3_tilde")?;
            let g = need_column(trace, "grad_norm", &claim)?;
            count_verdict(claim, &g, eps, mn_or_one(eps, c3, (1.0 - q).sqrt())?)
        }
    })
}

/// Like [`mn_bound`], but a start already within `eps` needs no iterations.
fn mn_or_one(eps: f64, x: f64, y: f64) -> Result<u64> {
    if x <= 0.0 {
        return Ok(1);
    }
    mn_bound(eps, x, y)
}

fn need_column_from(trace: &Trace, name: &str, from: usize, claim: &Claim) -> Result<Vec<f64>> {
    let col = trace.column(name)?;
    let vals: Vec<f64> = col.iter().skip(from).map_while(|v| *v).collect();
    if vals.is_empty() {
        return Err(Error::MissingTruth(format!(
            "claim {} needs the {name} column, which the trace lacks",
            claim.name()
        )));
    }
    Ok(vals)
}

/// Strong-convexity Lyapunov values `𝓛̂(x^{k+1}, x^k)` rebuilt from scalar trace columns.
pub fn lyapunov_hat_series(trace: &Trace, omega: f64, mu: f64, l: f64, claim: &Claim) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for w in trace.records.windows(2) {
        let (r, next) = (&w[0], &w[1]);
        let (Some(a), Some(g), Some(th), Some(gap), Some(d)) = (r.alpha, r.gamma, r.theta, r.gap, next.dist_opt) else {
            if out.is_empty() {
                return Err(Error::MissingTruth(format!(
                    "claim {} needs alpha, gamma, theta, gap and dist_opt columns",
                    claim.name()
                )));
            }
            break;
        };
        let ag = a * g;
        out.push(lyapunov_hat_scalar(d, ag * r.grad_norm, gap, ag, th, omega, mu, l)?);
    }
    if out.is_empty() {
        return Err(Error::Trace("trace too short for Lyapunov contraction".into()));
    }
    Ok(out)
}

/// Checks each claim against the trace.
///
/// Ratio claims scan every step until the sequence reaches the noise floor
/// and additionally require the tail fit to respect the bound. Count claims
/// compare the first iteration reaching the accuracy with the bound.
pub fn verify_bounds(trace: &Trace, constants: &RateConstants, claims: &[Claim]) -> Result<RateReport> {
    if trace.records.is_empty() {
        return Err(Error::Trace("empty trace".into()));
    }
    if trace.status == crate::trace::Status::NumericFailure {
        return Err(Error::Trace("cannot verify bounds on a numerically failed run".into()));
    }
    let mut c = constants.clone();
    c.complete()?;
    let mut verdicts = Vec::new();
    for &claim in claims {
        verdicts.push(verify_claim(trace, &c, claim)?);
    }
    let empirical_rate = trace
        .column("gap")
        .ok()
        .map(|g| g.iter().map_while(|v| *v).collect::<Vec<_>>())
        .and_then(|g| {
            let floor = noise_floor(first(trace).f.abs().max(*g.first()?));
            let upto: Vec<f64> = g.into_iter().take_while(|&v| v > floor).collect();
            fit_linear_rate(&upto, TAIL).ok()
        });
    let bound_satisfied = verdicts.iter().map(|v| (v.claim.name().to_string(), v.passed)).collect();
    let iteration_counts = verdicts
        .iter()
        .filter_map(|v| v.count.as_ref().map(|cc| (v.claim.name().to_string(), (cc.actual, cc.bound))))
        .collect();
    Ok(RateReport { theoretical: c, empirical_rate, verdicts, bound_satisfied, iteration_counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mn_bound_examples() {
        assert_eq!(mn_bound(1e-3, 1.0, 0.9).unwrap(), 67);
        assert_eq!(mn_bound(0.25, 0.25, 0.3).unwrap(), 1);
        assert!(mn_bound(1e-3, 1.0, 0.5).unwrap() <= mn_bound(1e-3, 1.0, 0.9).unwrap());
        assert!(mn_bound(1e-3, 1.0, 1.0).is_err());
    }

    #[test]
    fn k0_examples() {
        assert_eq!(sga_grad_complexity(1.0, 1.0, 0.99, 1.0, 0.1).unwrap(), 206);
        assert_eq!(sga_grad_complexity(1.0, 1.0, 0.5, 1.0, 0.1).unwrap(), 801);
        assert_eq!(sga_grad_complexity(1.0, 1.0, 0.5, 0.0, 0.1).unwrap(), 1);
        assert!(sga_grad_complexity(1.0, 1.0, 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn strong_constants_examples() {
        let (q0, q1) = sga_strong_constants(1.0, 10.0, 0.1).unwrap();
        assert!((q0 - 2.0 / 11.0).abs() < 1e-15);
        assert!((q1 - 0.0025).abs() < 1e-15);
        let (q0, q1) = sga_strong_constants(1.0, 10.0, 1e-9).unwrap();
        assert!(q0 < 1e-8 && q1 < 1e-17);
        assert!(sga_strong_constants(10.0, 10.0, 0.05).is_err());
    }

    #[test]
    fn q2_examples() {
        assert!((kl_rate_q2(0.5, 1.0, 1.0, 0.5).unwrap() - 0.125).abs() < 1e-15);
        assert!(kl_rate_q2(0.5, 1e6, 1.0, 0.5).unwrap() < 1e-12);
        assert!((kl_rate_q2(0.5, 1.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn qhat_example() {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        let q = adasga_qhat(1.0, 10.0, w, 2.0, 0.1).unwrap();
        assert!((q - 0.5 * w / 10.0).abs() < 1e-15);
        assert!(adasga_qhat(1.0, 10.0, w, 1.0, 0.1).is_err());
        assert!(adasga_qhat(1.0, 10.0, w, 1.0 + 1e-9, 0.1).unwrap() < 1e-9);
        let q = adasga_qhat(1.0, 1.0, w, 2.0, 1.0).unwrap();
        assert!(q > 0.0 && q < 1.0);
    }

    #[test]
    fn complexity_examples() {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        let (kg, _) = adasga_complexity(1.0, 1.0, 1.0, w, 0.0, 1.0, 0.0, 0.1).unwrap();
        assert_eq!(kg, 143);
        let (kg, _) = adasga_complexity(1.0, 1.0, 1.0, w, 0.0, 0.0, 0.0, 0.1).unwrap();
        assert_eq!(kg, 1);
        let (_, kf) = adasga_complexity(1.0, 1.0, 1.0, w, 1.0, 0.0, 1.0, 0.1).unwrap();
        assert_eq!(kf, 30);
    }

    #[test]
    fn classify_examples() {
        let s: Vec<f64> = (0..30).map(|k| 0.5f64.powi(k)).collect();
        let rep = classify_recursion(&s, 1.0, 2.0).unwrap();
        assert_eq!(rep.class, RecursionClass::Linear { rate: 0.5 });
        assert!(rep.violations.is_empty());

        let rep = classify_recursion(&[3.0, 2.0, 1.0, 0.0], 0.0, 1.0).unwrap();
        assert_eq!(rep.class, RecursionClass::Finite);
        assert!(rep.violations.is_empty());

        let s: Vec<f64> = (1..200).map(|k| 1.0 / k as f64).collect();
        let rep = classify_recursion(&s, 2.0, 2.0).unwrap();
        assert_eq!(rep.class, RecursionClass::Sublinear { exponent: 1.0 });
        assert!(rep.violations.is_empty());

        assert!(classify_recursion(&s, 2.0, 0.0).is_err());
        let rep = classify_recursion(&[1.0, 0.5, 0.5, 0.25], 1.0, 2.0).unwrap();
        assert_eq!(rep.violations, vec![1]);
    }

    #[test]
    fn fit_examples() {
        assert!((fit_linear_rate(&[1.0, 0.5, 0.25, 0.125], 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(fit_linear_rate(&[2.0; 10], 0.5).unwrap(), 1.0);
        assert!(fit_linear_rate(&[1.0, 0.0, 1.0], 1.0).is_err());
        assert!(fit_linear_rate(&[1.0, 0.5], 1.0).is_err());
    }
}
