//! Smoothness characterization checks for a configured problem.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::problems::Region;
use crate::smoothness::{
    check_holder_inequalities, check_smooth_characterizations, check_strong_smooth_bound,
    holder_modulus_over_pairs, sampled_and_refined, smoothness_certificate_over_pairs,
    strong_convexity_over_pairs, ViolationReport,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub problem: String,
    pub region: Region,
    pub nu: f64,
    pub pairs_evaluated: usize,
    /// Sampled Hölder modulus for `nu`.
    pub l_hat: f64,
    /// Largest per-pair smoothness certificate; `nu = 1` only.
    pub l_smooth: Option<f64>,
    /// Sampled strong-convexity modulus; `nu = 1` only.
    pub mu_hat: Option<f64>,
    pub holder: ViolationReport,
    pub smooth: Option<ViolationReport>,
    /// Only for problems with a known global strong-convexity modulus.
    pub strong_smooth: Option<ViolationReport>,
}

impl CheckReport {
    pub fn is_clean(&self) -> bool {
        self.holder.is_clean()
            && self.smooth.as_ref().is_none_or(ViolationReport::is_clean)
            && self.strong_smooth.as_ref().is_none_or(ViolationReport::is_clean)
    }
}

/// Samples the configured check region, sets every modulus to its sampled
/// extreme, and reports violations of the characterizations.
pub fn run_check(cfg: &ExperimentConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let obj = cfg.problem.build()?;
    let truth = obj.truth();
    let spec = cfg.check.clone().unwrap_or_default();
    let center = spec
        .center
        .clone()
        .or_else(|| truth.x_star.clone())
        .unwrap_or_else(|| vec![0.0; obj.dim()]);
    let region = Region::new(center, spec.radius)?;
    let nu = spec.nu.or(truth.nu).unwrap_or(1.0);
    let pairs = sampled_and_refined(obj.as_ref(), &region, nu, spec.n_pairs, cfg.seed)?;
    let (l_hat, _) = holder_modulus_over_pairs(obj.as_ref(), nu, &pairs)?;
    let holder = check_holder_inequalities(obj.as_ref(), &region, nu, l_hat, &pairs)?;
    let (mut l_smooth, mut mu_hat, mut smooth, mut strong_smooth) = (None, None, None, None);
    if nu == 1.0 {
        let l = smoothness_certificate_over_pairs(obj.as_ref(), &pairs)?;
        let (mu, _) = strong_convexity_over_pairs(obj.as_ref(), &pairs)?;
        smooth = Some(check_smooth_characterizations(obj.as_ref(), &region, l, &pairs)?);
        if truth.mu.is_some() && mu > 0.0 && mu <= l {
            strong_smooth = Some(check_strong_smooth_bound(obj.as_ref(), &region, mu, l, &pairs)?);
        }
        l_smooth = Some(l);
        mu_hat = Some(mu);
    }
    Ok(CheckReport {
        problem: obj.name().to_string(),
        region,
        nu,
        pairs_evaluated: pairs.len(),
        l_hat,
        l_smooth,
        mu_hat,
        holder,
        smooth,
        strong_smooth,
    })
}
