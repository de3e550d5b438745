use holdergrad::linalg::norm;
use holdergrad::problems::{shipped, Objective, PowerNorm, Quadratic, Region};
use holdergrad::rates::{
    classify_recursion, mn_bound, sga_strong_constants, verify_bounds, Claim, RateConstants,
};
use holdergrad::rng::{seeded, uniform_in_ball};
use holdergrad::sga::{run_sga, SgaConfig, StepPolicy};
use holdergrad::smoothness::{
    check_holder_inequalities, estimate_kl, holder_modulus_over_pairs, sample_pairs,
    strong_convexity_over_pairs,
};
use holdergrad::StopRule;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn more_pairs_never_shrink_the_moduli_range(which in 0usize..4, seed in any::<u64>(), split in 10usize..90) {
        let s = shipped().swap_remove(which);
        let obj = s.objective.as_ref();
        let nu = obj.truth().nu.unwrap_or(1.0);
        let pairs = sample_pairs(&s.region, 100, seed);
        let cut = split * 3;
        let (l_sub, _) = holder_modulus_over_pairs(obj, nu, &pairs[..cut]).unwrap();
        let (l_all, _) = holder_modulus_over_pairs(obj, nu, &pairs).unwrap();
        let (mu_sub, _) = strong_convexity_over_pairs(obj, &pairs[..cut]).unwrap();
        let (mu_all, _) = strong_convexity_over_pairs(obj, &pairs).unwrap();
        prop_assert!(l_all >= l_sub);
        prop_assert!(mu_all <= mu_sub);
    }

    #[test]
    fn sampled_moduli_are_ordered_and_curvature_clean(which in 0usize..4, seed in any::<u64>()) {
        let s = shipped().swap_remove(which);
        let obj = s.objective.as_ref();
        let pairs = sample_pairs(&s.region, 200, seed);
        let (l1, _) = holder_modulus_over_pairs(obj, 1.0, &pairs).unwrap();
        let (mu, _) = strong_convexity_over_pairs(obj, &pairs).unwrap();
        prop_assert!(mu <= l1 * (1.0 + 1e-12), "mu {mu} above L {l1}");

        let nu = obj.truth().nu.unwrap_or(1.0);
        let (l, _) = holder_modulus_over_pairs(obj, nu, &pairs).unwrap();
        let rep = check_holder_inequalities(obj, &s.region, nu, l, &pairs).unwrap();
        prop_assert_eq!(rep.count("holder_curvature"), 0);
        prop_assert_eq!(rep.count("holder_monotone"), 0);
    }

    #[test]
    fn kl_exponent_of_power_norm(nu in 0.2f64..1.0, seed in any::<u64>()) {
        let p = PowerNorm::new(nu, 3).unwrap();
        let mut rng = seeded(seed);
        let region = Region::ball(3, 1.0).unwrap();
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|_| uniform_in_ball(&mut rng, &region))
            .filter(|x| norm(x) > 1e-3)
            .map(|x| {
                let f = p.value(&x).unwrap();
                (p.gap(&x, f).unwrap(), norm(&p.gradient(&x).unwrap()))
            })
            .collect();
        prop_assume!(pts.len() >= 8);
        let kl = estimate_kl(&pts).unwrap();
        prop_assert!(kl.theta_hat >= nu / (1.0 + nu) - 0.05, "theta {} for nu {nu}", kl.theta_hat);
    }

    #[test]
    fn strong_constants_are_scale_invariant(mu in 0.1f64..5.0, ratio in 1.01f64..100.0, frac in 0.05f64..1.0, c in 0.01f64..100.0) {
        let l = mu * ratio;
        let ab = frac / l;
        let (q0, q1) = sga_strong_constants(mu, l, ab).unwrap();
        let (r0, r1) = sga_strong_constants(c * mu, c * l, ab / c).unwrap();
        prop_assert!((q0 - r0).abs() <= 1e-12 * q0);
        prop_assert!((q1 - r1).abs() <= 1e-12 * q1);
    }

    #[test]
    fn mn_bound_is_monotone(eps in 1e-12f64..1.0, x in 1e-3f64..1e6, y in 0.01f64..0.98, grow in 1.0f64..10.0) {
        let base = mn_bound(eps, x, y).unwrap();
        prop_assert!(mn_bound(eps * grow, x, y).unwrap() <= base);
        prop_assert!(mn_bound(eps, x * grow, y).unwrap() >= base);
        let y2 = (y + 0.01 * grow).min(0.99);
        prop_assert!(mn_bound(eps, x, y2).unwrap() >= base);
    }

    #[test]
    fn passing_rate_verdict_fits_under_the_bound(d1 in 0.5f64..2.0, ratio in 2.0f64..20.0, frac in 0.1f64..1.0, seed in any::<u64>()) {
        let l = d1 * ratio;
        let q = Quadratic::diagonal(&[d1, l], vec![0.0, 0.0]).unwrap();
        let x0 = uniform_in_ball(&mut seeded(seed), &Region::ball(2, 2.0).unwrap());
        prop_assume!(norm(&x0) > 1e-3);
        let ab = frac / l;
        let trace = run_sga(&q, &x0, &SgaConfig::new(1.0, l, StepPolicy::Constant { alpha: ab }, StopRule::new(1e-12, 3000))).unwrap();
        let c = RateConstants::sga(1.0, l, ab, Some(d1)).unwrap();
        let rep = verify_bounds(&trace, &c, &[Claim::QLinearF, Claim::QLinearX]).unwrap();
        for v in &rep.verdicts {
            if v.passed {
                if let (Some(e), Some(b)) = (v.empirical_rate, v.bound_rate) {
                    prop_assert!(e <= b + 1e-9, "{:?}: fit {e} above bound {b}", v.claim);
                }
            }
        }
    }

    #[test]
    fn recursion_violations_match_direct_evaluation(
        seq in prop::collection::vec(0.0f64..10.0, 2..40),
        theta in 0.0f64..2.0,
        beta in 0.1f64..10.0,
    ) {
        let rep = classify_recursion(&seq, theta, beta).unwrap();
        let mut expected = Vec::new();
        for k in 0..seq.len() - 1 {
            let lhs = seq[k].powf(theta);
            let rhs = beta * (seq[k] - seq[k + 1]);
            let tol = 1e-12 * lhs.max(rhs.abs());
            if lhs > rhs + tol {
                expected.push(k);
            }
        }
        prop_assert_eq!(rep.violations, expected);
    }
}
