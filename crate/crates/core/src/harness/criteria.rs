//! The acceptance experiments. Each returns a verdict, scalar metrics, and the
//! traces it produced; the suite driver times them and writes the traces.

use std::collections::BTreeMap;

use crate::adasga::{run_adasga, AdaConfig, Alpha0, GammaPolicy};
use crate::error::Result;
use crate::linalg::{dist, norm, sub};
use crate::problems::{finite_diff_gradient, shipped, Objective, PowerNorm, Quadratic, Region};
use crate::rates::{verify_bounds, Claim, RateConstants};
use crate::rng::{seeded, uniform_in_ball};
use crate::sga::{default_alpha, run_sga, AlphaMode, SgaConfig, StepPolicy};
use crate::smoothness::{
    check_holder_inequalities, check_smooth_characterizations, check_strong_smooth_bound, estimate_holder_modulus,
    estimate_kl, holder_modulus_over_pairs, sampled_and_refined, smoothness_certificate_over_pairs,
    strong_convexity_over_pairs, Pair,
};
use crate::trace::{StopRule, Trace};

/// Inputs shared by every criterion.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub seed: u64,
    /// Test hook: replaces the gap-rate constant with a value the traces violate.
    pub inject_wrong_q1: bool,
}

impl Context {
    fn sub_seed(&self, id: u8, i: u64) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(u64::from(id) * 1_000_003 + i)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
    pub traces: Vec<(String, Trace)>,
}

impl Outcome {
    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.to_string(), v);
    }

    fn fail(&mut self, why: impl Into<String>) {
        self.passed = false;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(&why.into());
    }
}

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    /// Runtime budget in milliseconds.
    pub budget_ms: Option<u64>,
    pub run: fn(&Context) -> Result<Outcome>,
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, name: "power_norm_closed_form", budget_ms: Some(1_000), run: c1_closed_form },
    Criterion { id: 2, name: "sufficient_decrease", budget_ms: Some(5_000), run: c2_sufficient_decrease },
    Criterion { id: 3, name: "distance_monotone", budget_ms: Some(5_000), run: c3_distance_monotone },
    Criterion { id: 4, name: "k0_complexity", budget_ms: Some(1_000), run: c4_k0 },
    Criterion { id: 5, name: "strong_convexity_q_linear", budget_ms: Some(2_000), run: c5_q_linear },
    Criterion { id: 6, name: "kl_exponent", budget_ms: Some(5_000), run: c6_kl },
    Criterion { id: 7, name: "adaptive_lyapunov_monotone", budget_ms: Some(10_000), run: c7_lyapunov },
    Criterion { id: 8, name: "adaptive_step_floor_ceiling", budget_ms: Some(5_000), run: c8_step_bounds },
    Criterion { id: 9, name: "adaptive_lyapunov_contraction", budget_ms: Some(2_000), run: c9_contraction },
    Criterion { id: 10, name: "characterization_inequalities", budget_ms: Some(10_000), run: c10_characterizations },
    Criterion { id: 11, name: "gradient_oracle", budget_ms: Some(2_000), run: c11_gradient_oracle },
];

pub const DETERMINISM_ID: u8 = 12;
pub const DETERMINISM_NAME: &str = "determinism";

const STARTS: u64 = 10;

fn quadratic() -> Quadratic {
    Quadratic::diagonal(&[1.0, 10.0], vec![0.0, 0.0]).expect("static")
}

fn power_norm() -> PowerNorm {
    PowerNorm::new(0.5, 2).expect("static")
}

fn starts(region: &Region, n: u64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded(seed);
    (0..n).map(|_| uniform_in_ball(&mut rng, region)).collect()
}

fn sga(obj: &dyn Objective, x0: &[f64], nu: f64, l: f64, policy: StepPolicy, stop: StopRule) -> Result<Trace> {
    run_sga(obj, x0, &SgaConfig::new(nu, l, policy, stop))
}

fn fmt_worst(v: f64) -> String {
    format!("{v:.3e}")
}

fn c1_closed_form(_: &Context) -> Result<Outcome> {
    let obj = power_norm();
    let x0 = [1.0, 1.0];
    let l = obj.truth().holder_l.expect("power norm modulus");
    let trace = sga(&obj, &x0, 0.5, l, StepPolicy::Constant { alpha: 0.5 }, StopRule::new(0.0, 40))?;
    let mut out = Outcome { passed: true, ..Default::default() };
    if trace.iterations() != 40 {
        out.fail(format!("expected 40 iterations, got {}", trace.iterations()));
    }
    let mut worst_x: f64 = 0.0;
    for (k, x) in trace.snapshots() {
        let s = 0.5f64.powi(k as i32);
        for (xi, x0i) in x.iter().zip(x0) {
            worst_x = worst_x.max((xi - s * x0i).abs() / (s * x0i).abs());
        }
    }
    let gap: Vec<f64> = trace.column("gap")?.into_iter().map(|g| g.unwrap_or(f64::NAN)).collect();
    let target = 0.5f64.powf(1.5);
    let worst_ratio = gap.windows(2).map(|w| (w[1] / w[0] - target).abs()).fold(0.0, f64::max);
    out.metric("max_rel_iterate_error", worst_x);
    out.metric("max_gap_ratio_error", worst_ratio);
    if !(worst_x <= 1e-12) {
        out.fail(format!("iterate error {}", fmt_worst(worst_x)));
    }
    if !(worst_ratio <= 1e-10) {
        out.fail(format!("gap ratio error {}", fmt_worst(worst_ratio)));
    }
    out.traces.push(("power_norm".into(), trace));
    Ok(out)
}

/// `(label, objective, ν, L, region)`.
type HolderProblem = (&'static str, Box<dyn Objective>, f64, f64, Region);

/// Quadratic `diag(1,10)` and the ν = 1/2 power norm, with `(ν, L)` and region.
fn decrease_problems() -> Vec<HolderProblem> {
    let pn = power_norm();
    let l_pn = pn.truth().holder_l.expect("power norm modulus");
    vec![
        ("quadratic", Box::new(quadratic()), 1.0, 10.0, Region::ball(2, 2.0).expect("static")),
        ("power_norm", Box::new(pn), 0.5, l_pn, Region::ball(2, 1.0).expect("static")),
    ]
}

fn c2_sufficient_decrease(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome { passed: true, ..Default::default() };
    let mut worst = f64::INFINITY;
    let mut checked = 0usize;
    for (pi, (label, obj, nu, l, region)) in decrease_problems().into_iter().enumerate() {
        let cap = ((1.0 + nu) / l).powf(1.0 / nu);
        let steps = [("fopt", default_alpha(nu, l, AlphaMode::FunctionOptimal)), ("near_cap", 0.9 * cap)];
        for (si, x0) in starts(&region, STARTS, ctx.sub_seed(2, pi as u64)).iter().enumerate() {
            for (step_label, alpha) in steps {
                let trace = sga(obj.as_ref(), x0, nu, l, StepPolicy::Constant { alpha }, StopRule::new(0.0, 1000))?;
                for w in trace.records.windows(2) {
                    let (r, next) = (&w[0], &w[1]);
                    let a = r.alpha.expect("non-terminal rows carry the step");
                    let coef = a - l / (1.0 + nu) * a.powf(1.0 + nu);
                    let rhs = r.f - coef * r.grad_norm.powf((1.0 + nu) / nu);
                    let slack = (rhs - next.f) / (1.0 + r.f.abs());
                    worst = worst.min(slack);
                    checked += 1;
                    if slack < -1e-10 {
                        out.fail(format!("{label} start {si} {step_label}: k={} slack {}", r.k, fmt_worst(slack)));
                    }
                }
                out.traces.push((format!("{label}_s{si}_{step_label}"), trace));
            }
        }
    }
    out.metric("worst_relative_slack", worst);
    out.metric("steps_checked", checked as f64);
    Ok(out)
}

fn c3_distance_monotone(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome { passed: true, ..Default::default() };
    let mut worst: f64 = 0.0;
    for (pi, (label, obj, nu, l, region)) in decrease_problems().into_iter().enumerate() {
        let alpha = default_alpha(nu, l, AlphaMode::DistanceOptimal);
        for (si, x0) in starts(&region, STARTS, ctx.sub_seed(3, pi as u64)).iter().enumerate() {
            let trace = sga(obj.as_ref(), x0, nu, l, StepPolicy::Constant { alpha }, StopRule::new(0.0, 1000))?;
            let d: Vec<f64> = trace.column("dist_opt")?.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
            for (k, w) in d.windows(2).enumerate() {
                let rise = (w[1] - w[0]) / w[0].max(f64::MIN_POSITIVE);
                worst = worst.max(rise);
                if !(w[1] <= w[0] * (1.0 + 1e-12)) {
                    out.fail(format!("{label} start {si}: distance rose at k={k} by {}", fmt_worst(rise)));
                }
            }
            out.traces.push((format!("{label}_s{si}"), trace));
        }
    }
    out.metric("worst_relative_rise", worst);
    Ok(out)
}

fn c4_k0(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome { passed: true, ..Default::default() };
    let obj = quadratic();
    let eps = 1e-4;
    let policy = StepPolicy::IntervalConstant { alpha_bar: 0.099, form: Default::default() };
    let constants = RateConstants::sga(1.0, 10.0, 0.099, None)?;
    let mut x0s = vec![vec![1.0, 1.0]];
    x0s.extend(starts(&Region::ball(2, 2.0)?, STARTS - 1, ctx.sub_seed(4, 0)));
    let mut max_use: f64 = 0.0;
    for (si, x0) in x0s.iter().enumerate() {
        let trace = sga(&obj, x0, 1.0, 10.0, policy, StopRule::new(eps, 100_000))?;
        let rep = verify_bounds(&trace, &constants, &[Claim::K0Count { eps }])?;
        let v = &rep.verdicts[0];
        let count = v.count.as_ref().expect("count claim");
        if let Some(a) = count.actual {
            max_use = max_use.max(a as f64 / count.bound as f64);
        }
        if !v.passed {
            out.fail(format!("start {si}: reached accuracy at {:?}, bound {}", count.actual, count.bound));
        }
        if si == 0 {
            out.metric("iterations_from_ones", count.actual.map_or(f64::NAN, |a| a as f64));
            out.metric("bound_from_ones", count.bound as f64);
        }
        out.traces.push((format!("quadratic_s{si}"), trace));
    }
    out.metric("max_count_over_bound", max_use);
    Ok(out)
}

fn c5_q_linear(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome { passed: true, ..Default::default() };
    let obj = quadratic();
    let mut constants = RateConstants::sga(1.0, 10.0, 0.1, Some(1.0))?;
    let (q0, q1) = (constants.q0.expect("q0"), constants.q1.expect("q1"));
    if (1.0 - q0 - 9.0 / 11.0).abs() > 1e-15 || (1.0 - q1 - 0.9975).abs() > 1e-15 {
        out.fail(format!("constants 1−q0={} 1−q1={}", 1.0 - q0, 1.0 - q1));
    }
    if ctx.inject_wrong_q1 {
        constants.q1 = Some(0.5);
    }
    let policy = StepPolicy::IntervalConstant { alpha_bar: 0.1, form: Default::default() };
    let mut fit_x: f64 = 0.0;
    let mut fit_f: f64 = 0.0;
    let mut x0s = vec![vec![1.0, 1.0]];
    x0s.extend(starts(&Region::ball(2, 2.0)?, STARTS - 1, ctx.sub_seed(5, 0)));
    for (si, x0) in x0s.iter().enumerate() {
        let trace = sga(&obj, x0, 1.0, 10.0, policy, StopRule::new(1e-13, 5000))?;
        let rep = verify_bounds(&trace, &constants, &[Claim::QLinearX, Claim::QLinearF])?;
        for v in &rep.verdicts {
            let e = v.empirical_rate.unwrap_or(f64::NAN);
            match v.claim {
                Claim::QLinearX => fit_x = fit_x.max(e),
                _ => fit_f = fit_f.max(e),
            }
            if !v.passed {
                out.fail(format!(
                    "start {si}: {} fit {e:.6} vs bound {:.6}, {} per-step violations",
                    v.claim.name(),
                    v.bound_rate.unwrap_or(f64::NAN),
                    v.violations.len()
                ));
            }
        }
        out.traces.push((format!("quadratic_s{si}"), trace));
    }
    out.metric("max_fit_dist_sq_rate", fit_x);
    out.metric("max_fit_gap_rate", fit_f);
    out.metric("bound_dist_sq_rate", 1.0 - q0);
    out.metric("bound_gap_rate", 1.0 - constants.q1.expect("q1"));
    Ok(out)
}

/// `(gap, grad_norm)` samples of a trace above the rounding floor.
fn kl_points(trace: &Trace) -> Vec<(f64, f64)> {
    let f0 = trace.records[0].f.abs();
    let floor = 1e2 * f64::EPSILON * f0.max(trace.records[0].gap.unwrap_or(0.0));
    trace
        .records
        .iter()
        .filter_map(|r| Some((r.gap?, r.grad_norm)))
        .take_while(|&(g, _)| g > floor)
        .filter(|&(_, n)| n > 0.0)
        .collect()
}

fn c6_kl(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome { passed: true, ..Default::default() };
    for (pi, s) in shipped().into_iter().enumerate() {
        let obj = s.objective.as_ref();
        let nu = obj.truth().nu.unwrap_or(1.0);
        let l = match obj.truth().holder_l {
            Some(l) => l,
            None => estimate_holder_modulus(obj, &s.region, nu, 2000, ctx.sub_seed(6, 100 + pi as u64))?.l_hat,
        };
        // Half the function-optimal step keeps the decay linear everywhere;
        // the full step is nearly a Newton step on log-sum-exp.
        let alpha = 0.5 * default_alpha(nu, l, AlphaMode::FunctionOptimal);
        let x0 = starts(&s.region, 1, ctx.sub_seed(6, pi as u64)).remove(0);
        let trace = sga(obj, &x0, nu, l, StepPolicy::Constant { alpha }, StopRule::new(1e-12, 5000))?;
        let est = estimate_kl(&kl_points(&trace))?;
        let floor = nu / (1.0 + nu) - 0.05;
        out.metric(&format!("theta_hat_{}", obj.name()), est.theta_hat);
        if est.theta_hat < floor {
            out.fail(format!("{}: theta_hat {:.4} below {floor:.4}", obj.name(), est.theta_hat));
        }
        if obj.name() == "power_norm" && (est.theta_hat - 1.0 / 3.0).abs() > 0.02 {
            out.fail(format!("power_norm: theta_hat {:.4} not within 0.02 of 1/3", est.theta_hat));
        }
        out.traces.push((obj.name().to_string(), trace));
    }
    Ok(out)
}

const OMEGA: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Quadratic `diag(1,10)` and the symmetric log-sum-exp, both on the radius-2 ball.
fn adaptive_problems() -> Vec<(&'static str, Box<dyn Objective>, Region)> {
    vec![
        ("quadratic", Box::new(quadratic()), Region::ball(2, 2.0).expect("static")),
        ("log_sum_exp", Box::new(crate::problems::LogSumExp::symmetric_2d()), Region::ball(2, 2.0).expect("static")),
    ]
}

const GAMMAS: [(&str, GammaPolicy); 3] = [
    ("const", GammaPolicy::Constant { value: 1.0 }),
    ("bb1", GammaPolicy::Bb1),
    ("bb2", GammaPolicy::Bb2),
];

fn ada_cfg(tau: f64, gamma: GammaPolicy, seed: u64) -> AdaConfig {
    AdaConfig {
        omega: OMEGA,
        tau,
        gamma,
        alpha0: Alpha0::Auto,
        stop: StopRule::new(1e-10, 2000),
        probe_seed: seed,
        ..AdaConfig::default()
    }
}

/// Every adaptive run of the grid: `(label, problem index, trace)`.
fn adaptive_grid(ctx: &Context, id: u8) -> Result<Vec<(String, usize, Trace)>> {
    let mut runs = Vec::new();
    for (pi, (label, obj, region)) in adaptive_problems().iter().enumerate() {
        for (si, x0) in starts(region, STARTS, ctx.sub_seed(id, pi as u64)).iter().enumerate() {
            for tau in [1.0, 1.2] {
                for (gl, gamma) in GAMMAS {
                    let cfg = ada_cfg(tau, gamma, ctx.sub_seed(id, 100 + si as u64));
                    let trace = run_adasga(obj.as_ref(), x0, &cfg)?;
                    runs.push((format!("{label}_s{si}_tau{tau}_{gl}"), pi, trace));
                }
            }
        }
    }
    Ok(runs)
}

fn c7_lyapunov(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome { passed: true, ..Default::default() };
    let mut worst = f64::INFINITY;
    let runs = adaptive_grid(ctx, 7)?;
    out.metric("runs", runs.len() as f64);
    for (label, _, trace) in runs {
        let rep = verify_bounds(&trace, &RateConstants::default(), &[Claim::LyapunovMonotone])?;
        let v = &rep.verdicts[0];
        if let Some(w) = v.worst_slack {
            worst = worst.min(w);
        }
        if !v.passed {
            out.fail(format!("{label}: increases at {:?}", v.violations));
        }
        out.traces.push((label, trace));
    }
    out.metric("worst_relative_slack", worst);
    Ok(out)
}

/// Sampled `(L̂, μ̂)` over the smallest ball around `x*` holding the trace,
/// with the trace's consecutive pairs added to the sample.
fn trace_moduli(obj: &dyn Objective, trace: &Trace, seed: u64) -> Result<(f64, f64)> {
    let xs = obj.truth().x_star.clone().expect("adaptive problems have known minimizers");
    let snaps: Vec<&[f64]> = trace.snapshots().map(|(_, x)| x).collect();
    let radius = snaps.iter().map(|x| dist(x, &xs)).fold(0.0, f64::max).max(1e-12) * (1.0 + 1e-9);
    let region = Region::new(xs, radius)?;
    let mut pairs: Vec<Pair> = sampled_and_refined(obj, &region, 1.0, 1000, seed)?;
    pairs.extend(snaps.windows(2).filter(|w| w[0] != w[1]).map(|w| (w[0].to_vec(), w[1].to_vec())));
    let (l, _) = holder_modulus_over_pairs(obj, 1.0, &pairs)?;
    let (mu, _) = strong_convexity_over_pairs(obj, &pairs)?;
    Ok((l, mu))
}

fn c8_step_bounds(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome { passed: true, ..Default::default() };
    let problems = adaptive_problems();
    let mut worst_floor = f64::INFINITY;
    let mut worst_ceiling = f64::INFINITY;
    for (i, (label, pi, trace)) in adaptive_grid(ctx, 8)?.into_iter().enumerate() {
        let obj = problems[pi].1.as_ref();
        let (l_hat, mu_hat) = trace_moduli(obj, &trace, ctx.sub_seed(8, 1000 + i as u64))?;
        let r0 = &trace.records[0];
        let ag0 = r0.alpha.unwrap_or(f64::NAN) * r0.gamma.unwrap_or(f64::NAN);
        let floor = ag0.min(OMEGA / l_hat);
        let strongly_convex = obj.truth().mu.is_some();
        for r in &trace.records {
            let (Some(a), Some(g)) = (r.alpha, r.gamma) else { continue };
            let ag = a * g;
            let s = (ag - floor + 1e-12) / floor;
            worst_floor = worst_floor.min(s);
            if ag < floor - 1e-12 {
                out.fail(format!("{label}: k={} step {ag:.6e} below floor {floor:.6e}", r.k));
            }
            if strongly_convex && r.k >= 1 {
                let ceiling = OMEGA / mu_hat;
                let s = (ceiling + 1e-12 - ag) / ceiling;
                worst_ceiling = worst_ceiling.min(s);
                if ag > ceiling + 1e-12 {
                    out.fail(format!("{label}: k={} step {ag:.6e} above ceiling {ceiling:.6e}", r.k));
                }
            }
        }
        out.traces.push((label, trace));
    }
    out.metric("worst_relative_floor_slack", worst_floor);
    out.metric("worst_relative_ceiling_slack", worst_ceiling);
    Ok(out)
}

fn c9_contraction(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome { passed: true, ..Default::default() };
    let obj = quadratic();
    let tau = 1.2;
    let mut worst = f64::INFINITY;
    let mut q_min = f64::INFINITY;
    let x0s = starts(&Region::ball(2, 2.0)?, STARTS, ctx.sub_seed(9, 0));
    for (si, x0) in x0s.iter().enumerate() {
        for (gl, gamma) in GAMMAS {
            let trace = run_adasga(&obj, x0, &ada_cfg(tau, gamma, ctx.sub_seed(9, 100 + si as u64)))?;
            let c = RateConstants::adasga_from_trace(&trace, 1.0, 10.0, OMEGA, tau)?;
            q_min = q_min.min(c.q_hat.unwrap_or(f64::NAN));
            let rep = verify_bounds(&trace, &c, &[Claim::LyapunovHatContraction])?;
            let v = &rep.verdicts[0];
            if let Some(w) = v.worst_slack {
                worst = worst.min(w);
            }
            if !v.passed {
                out.fail(format!("start {si} {gl}: contraction fails at {:?}", v.violations));
            }
            out.traces.push((format!("quadratic_s{si}_{gl}"), trace));
        }
    }
    out.metric("worst_slack", worst);
    out.metric("min_q_hat", q_min);
    Ok(out)
}

fn c10_characterizations(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome { passed: true, ..Default::default() };
    const PAIRS: usize = 10_000;
    for (pi, s) in shipped().into_iter().enumerate() {
        let obj = s.objective.as_ref();
        let name = obj.name().to_string();
        let nu = obj.truth().nu.unwrap_or(1.0);
        let pairs = sampled_and_refined(obj, &s.region, nu, PAIRS, ctx.sub_seed(10, pi as u64))?;
        if nu < 1.0 {
            let (l, _) = holder_modulus_over_pairs(obj, nu, &pairs)?;
            out.metric(&format!("{name}_holder_L"), l);
            let rep = check_holder_inequalities(obj, &s.region, nu, l, &pairs)?;
            if !rep.is_clean() {
                out.fail(format!("{name}: {} Hölder violations", rep.violations.len()));
            }
            if check_holder_inequalities(obj, &s.region, nu, 0.5 * l, &pairs)?.is_clean() {
                out.fail(format!("{name}: halved Hölder modulus raised no violation"));
            }
            continue;
        }
        let l = smoothness_certificate_over_pairs(obj, &pairs)?;
        out.metric(&format!("{name}_L"), l);
        let rep = check_smooth_characterizations(obj, &s.region, l, &pairs)?;
        if !rep.is_clean() {
            out.fail(format!("{name}: {} smoothness violations", rep.violations.len()));
        }
        if check_smooth_characterizations(obj, &s.region, 0.5 * l, &pairs)?.is_clean() {
            out.fail(format!("{name}: halved modulus raised no violation"));
        }
        // The two-sided bound needs strong convexity and smoothness globally;
        // local sampled moduli do not imply it elsewhere.
        if obj.truth().mu.is_some() {
            let (mu, _) = strong_convexity_over_pairs(obj, &pairs)?;
            out.metric(&format!("{name}_mu"), mu);
            let rep = check_strong_smooth_bound(obj, &s.region, mu, l, &pairs)?;
            if !rep.is_clean() {
                out.fail(format!("{name}: {} strong-smooth violations", rep.violations.len()));
            }
            if check_strong_smooth_bound(obj, &s.region, 2.0 * mu, l, &pairs)?.is_clean() {
                out.fail(format!("{name}: doubled strong-convexity modulus raised no violation"));
            }
        }
    }
    Ok(out)
}

fn c11_gradient_oracle(ctx: &Context) -> Result<Outcome> {
    let mut out = Outcome { passed: true, ..Default::default() };
    for (pi, s) in shipped().into_iter().enumerate() {
        let obj = s.objective.as_ref();
        let mut worst: f64 = 0.0;
        for x in starts(&s.region, 100, ctx.sub_seed(11, pi as u64)) {
            let g = obj.gradient(&x)?;
            let h = 1e-5 * (1.0 + norm(&x));
            let fd = finite_diff_gradient(obj, &x, h)?;
            let err = norm(&sub(&g, &fd)) / norm(&g).max(1e-12);
            worst = worst.max(err);
        }
        out.metric(&format!("{}_max_rel_error", obj.name()), worst);
        if !(worst <= 1e-6) {
            out.fail(format!("{}: relative gradient error {}", obj.name(), fmt_worst(worst)));
        }
    }
    Ok(out)
}
