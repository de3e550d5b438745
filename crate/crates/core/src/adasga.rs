//! Adaptive scaled gradient method driven by a local Lipschitz probe.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dist, dot, norm, norm_sq, sub};
use crate::problems::Objective;
use crate::rng::{seeded, unit_vector};
use crate::sga::{check_start, probe, Probe};
use crate::trace::{snapshot_every, Status, StopRule, Trace, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BbVariant {
    Bb1,
    Bb2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaPolicy {
    Constant { value: f64 },
    Bb1,
    Bb2,
}

/// Initial step: a fixed value or a finite-difference probe of the local modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha0 {
    Auto,
    Value(f64),
}

impl Serialize for Alpha0 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Alpha0::Auto => s.serialize_str("auto"),
            Alpha0::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Alpha0 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Alpha0::Value(v)),
            Raw::Text(t) if t == "auto" => Ok(Alpha0::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "alpha0 must be a number or \"auto\", got {t:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaConfig {
    pub omega: f64,
    pub tau: f64,
    pub gamma: GammaPolicy,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub alpha0: Alpha0,
    pub theta0: f64,
    pub stop: StopRule,
    /// Reference point for the Lyapunov column; defaults to the known minimizer.
    pub x_ref: Option<Vec<f64>>,
    pub snapshot_every: Option<usize>,
    /// Seeds the probe direction of [`Alpha0::Auto`].
    pub probe_seed: u64,
}

impl Default for AdaConfig {
    fn default() -> Self {
        AdaConfig {
            omega: std::f64::consts::FRAC_1_SQRT_2,
            tau: 1.2,
            gamma: GammaPolicy::Constant { value: 1.0 },
            gamma_min: 1e-6,
            gamma_max: 1e6,
            alpha0: Alpha0::Auto,
            theta0: 1.0,
            stop: StopRule::default(),
            x_ref: None,
            snapshot_every: None,
            probe_seed: 0,
        }
    }
}

impl AdaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega <= std::f64::consts::FRAC_1_SQRT_2 * (1.0 + 1e-15)) {
            return Err(invalid(format!("omega must lie in (0, 1/√2], got {}", self.omega)));
        }
        if !(self.tau >= 1.0 && self.tau.is_finite()) {
            return Err(invalid(format!("tau must be at least 1, got {}", self.tau)));
        }
        if !(self.gamma_min > 0.0 && self.gamma_min <= self.gamma_max && self.gamma_max.is_finite()) {
            return Err(invalid("need 0 < gamma_min ≤ gamma_max < ∞"));
        }
        if let GammaPolicy::Constant { value } = self.gamma {
            if !(value >= self.gamma_min && value <= self.gamma_max) {
                return Err(invalid(format!("constant gamma {value} outside [gamma_min, gamma_max]")));
            }
        }
        if let Alpha0::Value(a) = self.alpha0 {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid(format!("alpha0 must be positive, got {a}")));
            }
        }
        if !(self.theta0 > 0.0 && self.theta0.is_finite()) {
            return Err(invalid(format!("theta0 must be positive, got {}", self.theta0)));
        }
        self.stop.validate()
    }

    fn gamma0(&self) -> f64 {
        match self.gamma {
            GammaPolicy::Constant { value } => value,
            GammaPolicy::Bb1 | GammaPolicy::Bb2 => 1f64.clamp(self.gamma_min, self.gamma_max),
        }
    }
}

/// `‖g − g_prev‖ / ‖x − x_prev‖`.
pub fn local_lipschitz(x_prev: &[f64], x: &[f64], g_prev: &[f64], g: &[f64]) -> Result<f64> {
    let dx = dist(x, x_prev);
    if dx == 0.0 {
        return Err(invalid("local modulus undefined for coincident points"));
    }
    Ok(dist(g, g_prev) / dx)
}

/// Clamped Barzilai–Borwein scaling from the secant pair `s = Δx`, `y = Δg`:
/// `‖y‖²/⟨y,s⟩` for BB1 and `⟨y,s⟩/‖s‖²` for BB2.
pub fn gamma_bb(
    x_prev: &[f64],
    x: &[f64],
    g_prev: &[f64],
    g: &[f64],
    variant: BbVariant,
    gamma_min: f64,
    gamma_max: f64,
) -> Result<f64> {
    let s = sub(x, x_prev);
    let ss = norm_sq(&s);
    if ss == 0.0 {
        return Err(invalid("BB scaling undefined for coincident points"));
    }
    let y = sub(g, g_prev);
    let ys = dot(&y, &s);
    let raw = match variant {
        BbVariant::Bb1 if ys <= 0.0 => return Ok(gamma_max),
        BbVariant::Bb2 if ys <= 0.0 => return Ok(gamma_min),
        BbVariant::Bb1 => norm_sq(&y) / ys,
        BbVariant::Bb2 => ys / ss,
    };
    Ok(raw.clamp(gamma_min, gamma_max))
}

/// `min{ α_{k−1}γ_{k−1}/γ_k · √(2(1−ω²) + θ_{k−1}/τ), ω/(γ_k L_k) }`; the
/// second branch is dropped when `L_k = 0`.
pub fn adasga_alpha(
    alpha_prev: f64,
    gamma_prev: f64,
    theta_prev: f64,
    gamma_k: f64,
    l_k: f64,
    omega: f64,
    tau: f64,
) -> Result<f64> {
    let inputs = [alpha_prev, gamma_prev, theta_prev, gamma_k, l_k, omega, tau];
    if inputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite input to step-size recurrence".into()));
    }
    let growth = (2.0 * (1.0 - omega * omega) + theta_prev / tau).sqrt();
    let first = alpha_prev * gamma_prev / gamma_k * growth;
    let alpha = if l_k > 0.0 { first.min(omega / (gamma_k * l_k)) } else { first };
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Numeric(format!("step-size recurrence produced {alpha}")));
    }
    Ok(alpha)
}

/// Step quantities after iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaState {
    pub k: usize,
    pub x_prev: Vec<f64>,
    pub x: Vec<f64>,
    pub g_prev: Vec<f64>,
    pub g: Vec<f64>,
    pub alpha_prev: f64,
    pub alpha: f64,
    pub gamma_prev: f64,
    pub gamma: f64,
    pub theta_prev: f64,
    pub theta: f64,
}

/// `‖x^k−x‖² + ω²/(1−ω²)‖x^k−x^{k−1}‖² + α_kγ_kθ_k/(1−ω²)·(f(x^{k−1}) − f(x))`.
#[allow(clippy::too_many_arguments)]
pub fn lyapunov_el(
    x_k: &[f64],
    x_km1: &[f64],
    f_km1: f64,
    alpha_k: f64,
    gamma_k: f64,
    theta_k: f64,
    omega: f64,
    x_ref: &[f64],
    f_ref: f64,
) -> f64 {
    let w2 = omega * omega;
    norm_sq(&sub(x_k, x_ref))
        + w2 / (1.0 - w2) * norm_sq(&sub(x_k, x_km1))
        + alpha_k * gamma_k * theta_k / (1.0 - w2) * (f_km1 - f_ref)
}

/// Coefficient of `‖x^{k+1} − x^k‖²` in [`lyapunov_hat`].
pub fn lyapunov_hat_inertia(omega: f64, mu: f64, l: f64) -> f64 {
    let w2 = omega * omega;
    w2 / (1.0 - w2) + mu / (2.0 * omega * l)
}

/// `‖x^{k+1}−x*‖² + (ω²/(1−ω²) + μ/(2ωL))‖x^{k+1}−x^k‖² + 2α_kγ_k(1 + θ_k/(2(1−ω²)))(f(x^k)−f*)`.
#[allow(clippy::too_many_arguments)]
pub fn lyapunov_hat(
    x_k1: &[f64],
    x_k: &[f64],
    f_k: f64,
    alpha_k: f64,
    gamma_k: f64,
    theta_k: f64,
    omega: f64,
    mu: f64,
    l: f64,
    x_star: &[f64],
    f_star: f64,
) -> Result<f64> {
    let d_star = norm(&sub(x_k1, x_star));
    let step = norm(&sub(x_k1, x_k));
    lyapunov_hat_scalar(d_star, step, f_k - f_star, alpha_k * gamma_k, theta_k, omega, mu, l)
}

/// [`lyapunov_hat`] from scalar ingredients: distance of `x^{k+1}` to `x*`,
/// step length, gap at `x^k` and the product `α_kγ_k`.
#[allow(clippy::too_many_arguments)]
pub fn lyapunov_hat_scalar(
    dist_next: f64,
    step_len: f64,
    gap_k: f64,
    alpha_gamma: f64,
    theta_k: f64,
    omega: f64,
    mu: f64,
    l: f64,
) -> Result<f64> {
    if !(mu > 0.0 && l > 0.0) {
        return Err(invalid("moduli must be positive"));
    }
    if mu > l {
        return Err(invalid(format!("strong-convexity modulus {mu} exceeds smoothness modulus {l}")));
    }
    let w2 = omega * omega;
    Ok(dist_next * dist_next
        + lyapunov_hat_inertia(omega, mu, l) * step_len * step_len
        + 2.0 * alpha_gamma * (1.0 + theta_k / (2.0 * (1.0 - w2))) * gap_k)
}

fn auto_alpha0(
    obj: &dyn Objective,
    x0: &[f64],
    g0: &[f64],
    gamma0: f64,
    omega: f64,
    seed: u64,
) -> Result<f64> {
    let u = unit_vector(&mut seeded(seed), x0.len());
    let mut delta = 1e-6 * (1.0 + norm(x0));
    for _ in 0..60 {
        let xp = axpy(x0, delta, &u);
        if xp != x0 && obj.in_domain(&xp) {
            let gp = obj.gradient(&xp)?;
            let l = local_lipschitz(x0, &xp, g0, &gp)?;
            return Ok(if l > 0.0 { omega / (gamma0 * l) } else { 1.0 / gamma0 });
        }
        delta *= 0.5;
    }
    Err(Error::DomainViolation)
}

/// Runs the adaptive method from `x0`.
pub fn run_adasga(obj: &dyn Objective, x0: &[f64], cfg: &AdaConfig) -> Result<Trace> {
    cfg.validate()?;
    check_start(obj, x0, &cfg.stop)?;
    let every = snapshot_every(obj.dim(), cfg.snapshot_every)?;
    let truth = obj.truth();
    let x_star = truth.x_star.clone();

    // Lyapunov reference: an explicit point uses raw values, the minimizer uses gaps.
    let reference: Option<(Vec<f64>, Option<f64>)> = match (&cfg.x_ref, &x_star) {
        (Some(xr), _) => {
            if xr.len() != obj.dim() {
                return Err(Error::DimensionMismatch { expected: obj.dim(), got: xr.len() });
            }
            Some((xr.clone(), Some(obj.value(xr)?)))
        }
        (None, Some(xs)) if truth.f_star.is_some() => Some((xs.clone(), None)),
        _ => None,
    };

    let omega = cfg.omega;
    let mut records: Vec<TraceRecord> = Vec::new();
    let (f0, g0) = match probe(obj, x0) {
        Probe::Ok(f, g) => (f, g),
        Probe::Failed(s) => return Ok(Trace { records, status: s }),
    };
    let gamma0 = cfg.gamma0();
    let alpha0 = match cfg.alpha0 {
        Alpha0::Value(a) => a,
        Alpha0::Auto => auto_alpha0(obj, x0, &g0, gamma0, omega, cfg.probe_seed)?,
    };

    let mut x_prev = x0.to_vec();
    let mut f_prev = f0;
    let mut gap_prev = obj.gap(x0, f0);
    let mut g_prev = g0.clone();
    let mut ag_prev = (alpha0, gamma0, cfg.theta0);

    let grad_norm = norm(&g0);
    let mut rec = TraceRecord {
        k: 0,
        f: f0,
        gap: gap_prev,
        grad_norm,
        dist_opt: x_star.as_ref().map(|xs| dist(x0, xs)),
        x: Some(x0.to_vec()),
        ..Default::default()
    };
    if let Some(s) = cfg.stop.check(0, grad_norm, gap_prev) {
        records.push(rec);
        return Ok(Trace { records, status: s });
    }
    rec.alpha = Some(alpha0);
    rec.gamma = Some(gamma0);
    rec.theta = Some(cfg.theta0);
    records.push(rec);
    let mut x = axpy(x0, -alpha0 * gamma0, &g0);
    let mut k = 1usize;

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
        if x == x_prev {
            rec.x = Some(x.clone());
            records.push(rec);
            break Status::Converged;
        }
        let step = (|| -> Result<(f64, f64, f64, f64)> {
            let l_k = local_lipschitz(&x_prev, &x, &g_prev, &g)?;
            let gamma = match cfg.gamma {
                GammaPolicy::Constant { value } => value,
                GammaPolicy::Bb1 => gamma_bb(&x_prev, &x, &g_prev, &g, BbVariant::Bb1, cfg.gamma_min, cfg.gamma_max)?,
                GammaPolicy::Bb2 => gamma_bb(&x_prev, &x, &g_prev, &g, BbVariant::Bb2, cfg.gamma_min, cfg.gamma_max)?,
            };
            let (a_prev, g_prev_s, t_prev) = ag_prev;
            let alpha = adasga_alpha(a_prev, g_prev_s, t_prev, gamma, l_k, omega, cfg.tau)?;
            let theta = alpha * gamma / (a_prev * g_prev_s);
            Ok((l_k, gamma, alpha, theta))
        })();
        let (l_k, gamma, alpha, theta) = match step {
            Ok(v) => v,
            Err(_) => {
                records.push(rec);
                break Status::NumericFailure;
            }
        };
        rec.l_k = Some(l_k);
        rec.alpha = Some(alpha);
        rec.gamma = Some(gamma);
        rec.theta = Some(theta);
        if let Some((xr, f_ref)) = &reference {
            let (fk1, fr) = match f_ref {
                Some(fr) => (f_prev, *fr),
                None => (gap_prev.unwrap_or(f64::NAN), 0.0),
            };
            rec.lyap = Some(lyapunov_el(&x, &x_prev, fk1, alpha, gamma, theta, omega, xr, fr));
        }
        if let Some(s) = cfg.stop.check(k, grad_norm, gap) {
            rec.x = Some(x.clone());
            records.push(rec);
            break s;
        }
        records.push(rec);
        let next = axpy(&x, -alpha * gamma, &g);
        x_prev = std::mem::replace(&mut x, next);
        g_prev = g;
        f_prev = f;
        gap_prev = gap;
        ag_prev = (alpha, gamma, theta);
        k += 1;
    };
    Ok(Trace { records, status })
}
