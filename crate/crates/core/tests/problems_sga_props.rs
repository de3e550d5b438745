use holdergrad::linalg::{dist, norm, sub};
use holdergrad::problems::{finite_diff_gradient, shipped, Objective, PowerNorm, Quadratic, Region};
use holdergrad::rng::{seeded, uniform_in_ball};
use holdergrad::sga::{alpha_cap, run_sga, sga_step, SgaConfig, StepPolicy};
use holdergrad::StopRule;
use proptest::prelude::*;

fn points(region: &Region, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded(seed);
    (0..n).map(|_| uniform_in_ball(&mut rng, region)).collect()
}

/// Shipped problems with the parameters their runs use: `(ν, L)` when known.
fn holder_params(obj: &dyn Objective) -> Option<(f64, f64)> {
    Some((obj.truth().nu?, obj.truth().holder_l?))
}

#[test]
fn gradients_match_finite_differences() {
    for s in shipped() {
        let obj = s.objective.as_ref();
        // Shrunk so every point keeps at least 1e-3 clearance from the region
        // boundary; the shipped regions sit inside the domains.
        let inner = Region::new(s.region.center.clone(), s.region.radius - 1e-3).unwrap();
        for x in points(&inner, 100, 17) {
            let g = obj.gradient(&x).unwrap();
            let fd = finite_diff_gradient(obj, &x, 1e-5 * (1.0 + norm(&x))).unwrap();
            let err = norm(&sub(&g, &fd)) / norm(&g).max(1e-12);
            assert!(err <= 1e-6, "{} at {x:?}: relative error {err}", obj.name());
        }
    }
}

#[test]
fn convexity_spot_check() {
    for s in shipped() {
        let obj = s.objective.as_ref();
        let pts = points(&s.region, 200, 23);
        for pair in pts.chunks(2) {
            let (x, y) = (&pair[0], &pair[1]);
            let (fx, fy) = (obj.value(x).unwrap(), obj.value(y).unwrap());
            for t in [0.25, 0.5, 0.75] {
                let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
                let fz = obj.value(&z).unwrap();
                let rhs = t * fx + (1.0 - t) * fy + 1e-9 * (1.0 + fx.abs() + fy.abs());
                assert!(fz <= rhs, "{}: convexity fails at t={t}", obj.name());
            }
        }
    }
}

fn gd_reference(q: &Quadratic, x0: &[f64], alpha: f64, n: usize) -> Vec<Vec<f64>> {
    let mut xs = vec![x0.to_vec()];
    for _ in 0..n {
        let x = xs.last().unwrap();
        let g = q.gradient(x).unwrap();
        xs.push(x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect());
    }
    xs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_norm_step_scales_the_point(
        alpha in 0.001f64..0.999,
        nu in prop::sample::select(vec![0.25, 0.5, 0.75, 1.0]),
        x in prop::collection::vec(-10.0f64..10.0, 3),
    ) {
        prop_assume!(norm(&x) > 1e-6);
        let p = PowerNorm::new(nu, 3).unwrap();
        let next = sga_step(&x, &p.gradient(&x).unwrap(), alpha, nu).unwrap();
        for (n, xi) in next.iter().zip(&x) {
            let want = (1.0 - alpha) * xi;
            prop_assert!((n - want).abs() <= 1e-12 * want.abs().max(1e-300), "{n} vs {want}");
        }
    }

    #[test]
    fn unit_exponent_matches_gradient_descent_bitwise(
        d1 in 0.5f64..3.0, d2 in 3.0f64..20.0,
        x0 in prop::collection::vec(-3.0f64..3.0, 2),
        frac in 0.05f64..1.0,
    ) {
        let q = Quadratic::diagonal(&[d1, d2], vec![0.3, -0.2]).unwrap();
        let alpha = frac * alpha_cap(1.0, d2);
        let cfg = SgaConfig::new(1.0, d2, StepPolicy::Constant { alpha }, StopRule::new(0.0, 60));
        let trace = run_sga(&q, &x0, &cfg).unwrap();
        let reference = gd_reference(&q, &x0, alpha, trace.iterations());
        for (k, x) in trace.snapshots() {
            prop_assert_eq!(x, &reference[k][..]);
        }
    }

    #[test]
    fn descent_and_level_set_containment(
        which in 0usize..4,
        seed in any::<u64>(),
        frac in 0.05f64..1.0,
    ) {
        let s = shipped().swap_remove(which);
        let obj = s.objective.as_ref();
        let (nu, l) = match holder_params(obj) {
            Some(p) => p,
            None => {
                let est = holdergrad::smoothness::estimate_holder_modulus(obj, &s.region, 1.0, 300, 5).unwrap();
                (1.0, est.l_hat)
            }
        };
        let x0 = points(&s.region, 1, seed).remove(0);
        let alpha = frac * alpha_cap(nu, l);
        let trace = run_sga(obj, &x0, &SgaConfig::new(nu, l, StepPolicy::Constant { alpha }, StopRule::new(1e-12, 300))).unwrap();
        let f0 = trace.records[0].f;
        if obj.truth().holder_l.is_some() {
            for w in trace.records.windows(2) {
                prop_assert!(w[1].f <= w[0].f + 1e-12 * (1.0 + w[0].f.abs()), "{} rose at k={}", obj.name(), w[0].k);
            }
        }
        // Containment holds for sampled moduli too: the level set never grows.
        for r in &trace.records {
            prop_assert!(r.f <= f0 + 1e-12 * (1.0 + f0.abs()), "{} left the level set at k={}", obj.name(), r.k);
        }
    }

    #[test]
    fn quantitative_decrease_and_distance(
        seed in any::<u64>(),
        frac in 0.05f64..1.0,
        use_power in any::<bool>(),
    ) {
        let (obj, nu, l): (Box<dyn Objective>, f64, f64) = if use_power {
            (Box::new(PowerNorm::new(0.5, 2).unwrap()), 0.5, 2f64.sqrt())
        } else {
            (Box::new(Quadratic::diagonal(&[1.0, 10.0], vec![0.0, 0.0]).unwrap()), 1.0, 10.0)
        };
        let x0 = points(&Region::ball(2, 2.0).unwrap(), 1, seed).remove(0);
        // The distance bound needs α ≤ 4ν/((1+ν)L^{1/ν}), tighter than the cap.
        let alpha = frac * (4.0 * nu / ((1.0 + nu) * l.powf(1.0 / nu))).min(alpha_cap(nu, l));
        let trace = run_sga(obj.as_ref(), &x0, &SgaConfig::new(nu, l, StepPolicy::Constant { alpha }, StopRule::new(0.0, 300))).unwrap();
        let xs = obj.truth().x_star.clone().unwrap();
        let snaps: Vec<(usize, &[f64])> = trace.snapshots().collect();
        for w in trace.records.windows(2) {
            let (r, n) = (&w[0], &w[1]);
            let coef = alpha - l / (1.0 + nu) * alpha.powf(1.0 + nu);
            let drop = r.f - n.f;
            let need = coef * r.grad_norm.powf((1.0 + nu) / nu);
            prop_assert!(drop >= need - 1e-10 * (1.0 + r.f.abs()), "k={} drop {drop} need {need}", r.k);
        }
        for w in snaps.windows(2) {
            prop_assert!(dist(w[1].1, &xs) <= dist(w[0].1, &xs) + 1e-12);
        }
    }
}
