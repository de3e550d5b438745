//! Sampled moduli, characterization checks and KL fitting on compact regions.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dist, dot, norm, norm_sq, sub};
use crate::problems::{Objective, Region};
use crate::rng::{seeded, uniform_in_ball};

pub type Pair = (Vec<f64>, Vec<f64>);

/// `n_pairs` uniform pairs in `region`, each followed by the reflections of
/// its endpoints through the center: `(x, y), (x, 2c−x), (y, 2c−y)`.
pub fn sample_pairs(region: &Region, n_pairs: usize, seed: u64) -> Vec<Pair> {
    let mut rng = seeded(seed);
    let mut out = Vec::with_capacity(3 * n_pairs);
    let reflect = |p: &[f64]| -> Vec<f64> {
        p.iter().zip(&region.center).map(|(v, c)| 2.0 * c - v).collect()
    };
    for _ in 0..n_pairs {
        let x = uniform_in_ball(&mut rng, region);
        let y = uniform_in_ball(&mut rng, region);
        let xr = reflect(&x);
        let yr = reflect(&y);
        out.push((x.clone(), y.clone()));
        out.push((x, xr));
        out.push((y, yr));
    }
    out
}

/// Extra pairs obtained by refining the most extreme sampled pairs with a
/// secant power iteration.
///
/// Each refined pair keeps the midpoint and half-length of its seed pair and
/// rotates its direction toward `Δg` (largest ratio) or toward `cΔx − Δg`
/// with `c` the largest sampled secant ratio (smallest ratio). On a quadratic
/// both iterations converge to the extreme eigenvectors, so the sampled moduli
/// become exact. Pairs leaving the region or domain are shortened or dropped;
/// every returned pair lies in `region`.
pub fn refine_extremal_pairs(obj: &dyn Objective, region: &Region, nu: f64, pairs: &[Pair]) -> Result<Vec<Pair>> {
    check_nu(nu)?;
    const SEEDS: usize = 8;
    const STEPS: usize = 100;
    let evals = eval_pairs(obj, pairs)?;
    let mut upper: Vec<(f64, usize)> = Vec::new();
    let mut lower: Vec<(f64, usize)> = Vec::new();
    let mut c: f64 = 0.0;
    for (i, e) in evals.iter().enumerate() {
        let d = norm(&e.dx);
        if d == 0.0 {
            continue;
        }
        upper.push((norm(&e.dg) / d.powf(nu), i));
        lower.push((e.inner() / (d * d), i));
        c = c.max(norm(&e.dg) / d);
    }
    upper.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    lower.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let seeds: Vec<(usize, bool)> = upper
        .iter()
        .take(SEEDS)
        .map(|&(_, i)| (i, true))
        .chain(lower.iter().take(SEEDS).map(|&(_, i)| (i, false)))
        .collect();
    let chains: Vec<Result<Vec<Pair>>> = seeds
        .par_iter()
        .map(|&(i, towards_max)| refine_one(obj, region, &pairs[i], towards_max, c, STEPS))
        .collect();
    let mut out = Vec::new();
    for ch in chains {
        out.extend(ch?);
    }
    Ok(out)
}

fn refine_one(
    obj: &dyn Objective,
    region: &Region,
    pair: &Pair,
    towards_max: bool,
    c: f64,
    steps: usize,
) -> Result<Vec<Pair>> {
    let (x, y) = pair;
    let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
    let dx = sub(y, x);
    let mut half = 0.5 * norm(&dx);
    if half == 0.0 {
        return Ok(vec![]);
    }
    let mut u: Vec<f64> = dx.iter().map(|v| v / (2.0 * half)).collect();
    let mut out = Vec::new();
    for _ in 0..steps {
        let mut placed = None;
        for _ in 0..40 {
            let a = axpy(&mid, -half, &u);
            let b = axpy(&mid, half, &u);
            if region.contains(&a) && region.contains(&b) && obj.in_domain(&a) && obj.in_domain(&b) {
                placed = Some((a, b));
                break;
            }
            half *= 0.5;
        }
        let Some((a, b)) = placed else { break };
        let e = PairEval::new(obj, &a, &b)?;
        out.push((a, b));
        let d = norm(&e.dx);
        let w: Vec<f64> = e.dg.iter().map(|v| v / d).collect();
        let next: Vec<f64> = if towards_max {
            w
        } else {
            u.iter().zip(&w).map(|(ui, wi)| c * ui - wi).collect()
        };
        let n = norm(&next);
        if n == 0.0 || !n.is_finite() {
            break;
        }
        let next: Vec<f64> = next.iter().map(|v| v / n).collect();
        let next = if dot(&next, &u) < 0.0 { next.iter().map(|v| -v).collect() } else { next };
        if dist(&next, &u) <= 1e-15 {
            break;
        }
        u = next;
    }
    Ok(out)
}

/// Oracle data for one pair.
#[derive(Debug, Clone)]
struct PairEval {
    fx: f64,
    fy: f64,
    gx: Vec<f64>,
    dx: Vec<f64>,
    dg: Vec<f64>,
}

impl PairEval {
    fn new(obj: &dyn Objective, x: &[f64], y: &[f64]) -> Result<Self> {
        if !obj.in_domain(x) || !obj.in_domain(y) {
            return Err(Error::DomainViolation);
        }
        let (fx, gx) = obj.eval(x)?;
        let (fy, gy) = obj.eval(y)?;
        Ok(PairEval { fx, fy, dx: sub(y, x), dg: sub(&gy, &gx), gx })
    }

    fn inner(&self) -> f64 {
        dot(&self.dg, &self.dx)
    }

    fn bregman(&self) -> f64 {
        self.fy - self.fx - dot(&self.gx, &self.dx)
    }
}

fn eval_pairs(obj: &dyn Objective, pairs: &[Pair]) -> Result<Vec<PairEval>> {
    pairs
        .par_iter()
        .map(|(x, y)| PairEval::new(obj, x, y))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub nu: f64,
    pub l_hat: f64,
    pub region: Region,
    pub n_pairs: usize,
    /// Pairs actually evaluated, antipodal augmentation included.
    pub pairs_evaluated: usize,
    /// `None` when every pair was coincident.
    pub argmax_pair: Option<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongConvexityEstimate {
    pub mu_hat: f64,
    pub region: Region,
    pub n_pairs: usize,
    pub pairs_evaluated: usize,
    pub argmin_pair: Option<Pair>,
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(invalid(format!("Hölder exponent must lie in (0,1], got {nu}")));
    }
    Ok(())
}

/// Maximum of `‖Δg‖/‖Δx‖^ν` over the pairs and the index attaining it.
/// Coincident pairs are skipped.
pub fn holder_modulus_over_pairs(
    obj: &dyn Objective,
    nu: f64,
    pairs: &[Pair],
) -> Result<(f64, Option<usize>)> {
    check_nu(nu)?;
    let evals = eval_pairs(obj, pairs)?;
    let mut best = (0.0, None);
    for (i, e) in evals.iter().enumerate() {
        let d = norm(&e.dx);
        if d == 0.0 {
            continue;
        }
        let ratio = norm(&e.dg) / d.powf(nu);
        if best.1.is_none() || ratio > best.0 {
            best = (ratio, Some(i));
        }
    }
    Ok(best)
}

/// Minimum of `⟨Δg,Δx⟩/‖Δx‖²` (floored at 0) and the index attaining it.
pub fn strong_convexity_over_pairs(obj: &dyn Objective, pairs: &[Pair]) -> Result<(f64, Option<usize>)> {
    let evals = eval_pairs(obj, pairs)?;
    let mut best = (f64::INFINITY, None);
    for (i, e) in evals.iter().enumerate() {
        let d2 = norm_sq(&e.dx);
        if d2 == 0.0 {
            continue;
        }
        let ratio = (e.inner() / d2).max(0.0);
        if best.1.is_none() || ratio < best.0 {
            best = (ratio, Some(i));
        }
    }
    if best.1.is_none() {
        best.0 = 0.0;
    }
    Ok(best)
}

/// Supremum of `‖Δg‖²/⟨Δg,Δx⟩`: the smallest `L` making cocoercivity hold on
/// every pair. Infinite if some pair has `Δg ≠ 0` and `⟨Δg,Δx⟩ ≤ 0`.
pub fn cocoercivity_modulus_over_pairs(obj: &dyn Objective, pairs: &[Pair]) -> Result<f64> {
    let evals = eval_pairs(obj, pairs)?;
    let mut best: f64 = 0.0;
    for e in &evals {
        let g2 = norm_sq(&e.dg);
        if g2 == 0.0 {
            continue;
        }
        let ip = e.inner();
        if ip <= 0.0 {
            return Ok(f64::INFINITY);
        }
        best = best.max(g2 / ip);
    }
    Ok(best)
}

/// Supremum over the pairs of every ratio that lower-bounds a Lipschitz
/// modulus of a convex `h`: `‖Δg‖/‖Δx‖`, `‖Δg‖²/⟨Δg,Δx⟩` and the Bregman
/// ratios `2D_h(y,x)/‖Δx‖²` in both orders. With `L` at least this value the
/// cocoercivity, curvature and Bregman upper bounds hold on every pair.
pub fn smoothness_certificate_over_pairs(obj: &dyn Objective, pairs: &[Pair]) -> Result<f64> {
    let evals = eval_pairs(obj, pairs)?;
    let mut best: f64 = 0.0;
    for e in &evals {
        let d2 = norm_sq(&e.dx);
        if d2 == 0.0 {
            continue;
        }
        let g2 = norm_sq(&e.dg);
        let ip = e.inner();
        best = best.max((g2 / d2).sqrt());
        if g2 > 0.0 {
            if ip <= 0.0 {
                return Ok(f64::INFINITY);
            }
            best = best.max(g2 / ip);
        }
        let gy: Vec<f64> = e.gx.iter().zip(&e.dg).map(|(a, b)| a + b).collect();
        let rev = e.fx - e.fy + dot(&gy, &e.dx);
        best = best.max(2.0 * e.bregman() / d2).max(2.0 * rev / d2);
    }
    Ok(best)
}

/// Largest `μ ∈ [0, L]` for which the strong-convexity/smoothness lower bound
/// `⟨Δg,Δx⟩ ≥ μL/(μ+L)‖Δx‖² + ‖Δg‖²/(μ+L)` holds on every pair.
///
/// `L` should dominate the cocoercivity modulus of the pairs; the bound is then
/// a sampled counterpart of the strong-convexity modulus compatible with `L`.
pub fn strong_smooth_mu_over_pairs(obj: &dyn Objective, l: f64, pairs: &[Pair]) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(invalid("smoothness modulus must be positive and finite"));
    }
    let evals = eval_pairs(obj, pairs)?;
    let mut mu = l;
    for e in &evals {
        let d2 = norm_sq(&e.dx);
        if d2 == 0.0 {
            continue;
        }
        let a = e.inner() / d2;
        let b = norm_sq(&e.dg) / d2;
        if a < l {
            mu = mu.min((l * a - b) / (l - a));
        } else if b > l * a {
            return Ok(0.0);
        }
    }
    Ok(mu.max(0.0))
}

/// [`sample_pairs`] followed by [`refine_extremal_pairs`].
pub fn sampled_and_refined(obj: &dyn Objective, region: &Region, nu: f64, n_pairs: usize, seed: u64) -> Result<Vec<Pair>> {
    let mut pairs = sample_pairs(region, n_pairs, seed);
    let extra = refine_extremal_pairs(obj, region, nu, &pairs)?;
    pairs.extend(extra);
    Ok(pairs)
}

/// Sampled supremum of the Hölder ratio over `region`, taken over
/// [`sampled_and_refined`] pairs.
pub fn estimate_holder_modulus(
    obj: &dyn Objective,
    region: &Region,
    nu: f64,
    n_pairs: usize,
    seed: u64,
) -> Result<HolderEstimate> {
    if n_pairs == 0 {
        return Err(invalid("n_pairs must be at least 1"));
    }
    check_region(obj, region)?;
    let pairs = sampled_and_refined(obj, region, nu, n_pairs, seed)?;
    let (l_hat, idx) = holder_modulus_over_pairs(obj, nu, &pairs)?;
    Ok(HolderEstimate {
        nu,
        l_hat,
        region: region.clone(),
        n_pairs,
        pairs_evaluated: pairs.len(),
        argmax_pair: idx.map(|i| pairs[i].clone()),
    })
}

/// Sampled infimum of the strong-convexity ratio over `region`, taken over
/// [`sampled_and_refined`] pairs.
pub fn estimate_strong_convexity(
    obj: &dyn Objective,
    region: &Region,
    n_pairs: usize,
    seed: u64,
) -> Result<StrongConvexityEstimate> {
    if n_pairs == 0 {
        return Err(invalid("n_pairs must be at least 1"));
    }
    check_region(obj, region)?;
    let pairs = sampled_and_refined(obj, region, 1.0, n_pairs, seed)?;
    let (mu_hat, idx) = strong_convexity_over_pairs(obj, &pairs)?;
    Ok(StrongConvexityEstimate {
        mu_hat,
        region: region.clone(),
        n_pairs,
        pairs_evaluated: pairs.len(),
        argmin_pair: idx.map(|i| pairs[i].clone()),
    })
}

fn check_region(obj: &dyn Objective, region: &Region) -> Result<()> {
    if region.dim() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), got: region.dim() });
    }
    Ok(())
}

/// One failed inequality `lhs ≤ rhs`; `slack = rhs − lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub inequality: String,
    pub pair_index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
    /// Pairs on which each inequality was evaluated.
    pub checked: BTreeMap<String, usize>,
    /// Pairs skipped per inequality (membership conditions, pairs outside the region).
    pub skipped: BTreeMap<String, usize>,
    /// Pairs holding with equality up to tolerance.
    pub tight: BTreeMap<String, usize>,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, inequality: &str) -> usize {
        self.violations.iter().filter(|v| v.inequality == inequality).count()
    }

    /// Record `lhs ≤ rhs`; `scale` is the magnitude of the operands feeding the comparison.
    fn record(&mut self, id: &str, pair_index: usize, lhs: f64, rhs: f64, scale: f64) {
        *self.checked.entry(id.to_string()).or_default() += 1;
        let slack = rhs - lhs;
        let tol = 1e-9 * scale.max(lhs.abs()).max(rhs.abs()) + 1e-12;
        if slack < -tol || !slack.is_finite() {
            self.violations.push(Violation {
                inequality: id.to_string(),
                pair_index,
                lhs,
                rhs,
                slack,
            });
        } else if slack.abs() <= tol {
            *self.tight.entry(id.to_string()).or_default() += 1;
        }
    }

    fn skip(&mut self, id: &str) {
        *self.skipped.entry(id.to_string()).or_default() += 1;
    }
}

fn check_modulus(l: f64) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(invalid(format!("modulus must be positive and finite, got {l}")));
    }
    Ok(())
}

/// Lipschitz-gradient characterizations for convex `h`: cocoercivity,
/// two-sided curvature bound and two-sided Bregman bound.
pub fn check_smooth_characterizations(
    obj: &dyn Objective,
    region: &Region,
    l: f64,
    pairs: &[Pair],
) -> Result<ViolationReport> {
    check_modulus(l)?;
    let mut rep = ViolationReport::default();
    let evals = eval_pairs(obj, pairs)?;
    for (i, (e, (x, y))) in evals.iter().zip(pairs).enumerate() {
        if !region.contains(x) || !region.contains(y) {
            rep.skip("outside_region");
            continue;
        }
        let ip = e.inner();
        let d2 = norm_sq(&e.dx);
        let g2 = norm_sq(&e.dg);
        let fscale = e.fx.abs().max(e.fy.abs());
        rep.record("cocoercivity", i, g2 / l, ip, 0.0);
        rep.record("curvature_lower", i, 0.0, ip, 0.0);
        rep.record("curvature_upper", i, ip, l * d2, 0.0);
        let br = e.bregman();
        rep.record("bregman_lower", i, 0.0, br, fscale);
        rep.record("bregman_upper", i, br, 0.5 * l * d2, fscale);
    }
    Ok(rep)
}

/// Constants of the four Hölder-smoothness characterizations implied by modulus `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderConstants {
    pub curvature: f64,
    pub bregman: f64,
    pub gradient_gap: f64,
    pub coercive: f64,
}

impl HolderConstants {
    pub fn from_modulus(nu: f64, l: f64) -> Self {
        let root = l.powf(1.0 / nu);
        HolderConstants {
            curvature: l,
            bregman: l / (1.0 + nu),
            gradient_gap: nu / ((1.0 + nu) * root),
            coercive: 2.0 * nu / ((1.0 + nu) * root),
        }
    }
}

/// Hölder modulus implied by the coercive inequality with constant `c`:
/// `⟨Δg,Δx⟩ ≥ c‖Δg‖^{(1+ν)/ν}` gives `‖Δg‖ ≤ c^{−ν}‖Δx‖^ν`.
pub fn modulus_from_coercive(nu: f64, c: f64) -> f64 {
    c.powf(-nu)
}

/// The four Hölder-smoothness characterizations. The gradient-gap and coercive
/// forms are evaluated only when their auxiliary points `y − d/L^{1/ν}` (and
/// `x + d/L^{1/ν}`) lie in the region and domain; other pairs count as skipped.
pub fn check_holder_inequalities(
    obj: &dyn Objective,
    region: &Region,
    nu: f64,
    l: f64,
    pairs: &[Pair],
) -> Result<ViolationReport> {
    check_nu(nu)?;
    check_modulus(l)?;
    let c = HolderConstants::from_modulus(nu, l);
    let root = l.powf(1.0 / nu);
    let expo = (1.0 + nu) / nu;
    let mut rep = ViolationReport::default();
    let evals = eval_pairs(obj, pairs)?;
    for (i, (e, (x, y))) in evals.iter().zip(pairs).enumerate() {
        if !region.contains(x) || !region.contains(y) {
            rep.skip("outside_region");
            continue;
        }
        let ip = e.inner();
        let dn = norm(&e.dx);
        let gn = norm(&e.dg);
        let dpow = dn.powf(1.0 + nu);
        let fscale = e.fx.abs().max(e.fy.abs());
        rep.record("holder_monotone", i, 0.0, ip, 0.0);
        rep.record("holder_curvature", i, ip, c.curvature * dpow, 0.0);
        let br = e.bregman();
        rep.record("holder_bregman_lower", i, 0.0, br, fscale);
        rep.record("holder_bregman_upper", i, br, c.bregman * dpow, fscale);

        let scale = if gn == 0.0 { 0.0 } else { gn.powf((1.0 - nu) / nu) };
        let shift = scale / root;
        let y_aux = axpy(y, -shift, &e.dg);
        let x_aux = axpy(x, shift, &e.dg);
        let y_ok = region.contains(&y_aux) && obj.in_domain(&y_aux);
        let x_ok = region.contains(&x_aux) && obj.in_domain(&x_aux);
        let gpow = gn.powf(expo);
        if y_ok {
            let lower = e.fx + dot(&e.gx, &e.dx) + c.gradient_gap * gpow;
            rep.record("holder_gradient_gap", i, lower, e.fy, fscale);
        } else {
            rep.skip("holder_gradient_gap");
        }
        if y_ok && x_ok {
            rep.record("holder_coercive", i, c.coercive * gpow, ip, 0.0);
        } else {
            rep.skip("holder_coercive");
        }
    }
    Ok(rep)
}

/// `⟨Δg,Δx⟩ ≥ μL/(μ+L)‖Δx‖² + ‖Δg‖²/(μ+L)`.
pub fn check_strong_smooth_bound(
    obj: &dyn Objective,
    region: &Region,
    mu: f64,
    l: f64,
    pairs: &[Pair],
) -> Result<ViolationReport> {
    check_modulus(l)?;
    if !(mu > 0.0) {
        return Err(invalid(format!("strong-convexity modulus must be positive, got {mu}")));
    }
    if mu > l {
        return Err(invalid(format!(
            "strong-convexity modulus {mu} exceeds smoothness modulus {l}"
        )));
    }
    let mut rep = ViolationReport::default();
    let evals = eval_pairs(obj, pairs)?;
    for (i, (e, (x, y))) in evals.iter().zip(pairs).enumerate() {
        if !region.contains(x) || !region.contains(y) {
            rep.skip("outside_region");
            continue;
        }
        let lower = mu * l / (mu + l) * norm_sq(&e.dx) + norm_sq(&e.dg) / (mu + l);
        rep.record("strong_smooth", i, lower, e.inner(), 0.0);
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlEstimate {
    pub theta_hat: f64,
    pub rho_hat: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Fit `(f − f*)^θ ≤ ρ‖∇f‖` from `(gap, grad_norm)` samples.
///
/// `θ̂` is the reciprocal slope of the least-squares line of `log gap` on
/// `log grad_norm`; `ρ̂` is the smallest constant covering every sample.
pub fn estimate_kl(points: &[(f64, f64)]) -> Result<KlEstimate> {
    if points.len() < 8 {
        return Err(invalid(format!("KL fit needs at least 8 points, got {}", points.len())));
    }
    if points
        .iter()
        .any(|&(f, g)| !(f > 0.0 && g > 0.0 && f.is_finite() && g.is_finite()))
    {
        return Err(invalid("KL fit needs positive finite gaps and gradient norms"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 1e-12 * n || syy <= 1e-12 * n {
        return Err(invalid("KL fit needs spread in both gaps and gradient norms"));
    }
    let slope = sxy / sxx;
    let theta_hat = 1.0 / slope;
    if !(theta_hat > 0.0 && theta_hat < 1.0) {
        return Err(invalid(format!("fitted KL exponent {theta_hat} lies outside (0,1)")));
    }
    let r_squared = ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0);
    let rho_hat = points
        .iter()
        .map(|&(f, g)| f.powf(theta_hat) / g)
        .fold(0.0, f64::max);
    Ok(KlEstimate { theta_hat, rho_hat, r_squared, n_points: points.len() })
}
