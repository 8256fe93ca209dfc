use proptest::prelude::*;
use zerotwo::resolvent::{sinh_factor, sinh_majorant};
use zerotwo::sample::{random_with_norm, rng};
use zerotwo::{
    cosine_laplace_bound_check, growth_bound_estimate, op_norm, resolvent_via_s, s_norm_bound_check, s_operator,
    singular_values, Complex, CosineFamily, QuadratureRule,
};

fn random_family(seed: u64, dim: usize, norm: f64) -> CosineFamily<f64> {
    CosineFamily::new(random_with_norm(&mut rng(seed), dim, norm)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn panel_doubling_changes_s_little(
        seed in any::<u64>(),
        norm in 0.1f64..4.0,
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
        s in -3.0f64..3.0,
    ) {
        let lambda = Complex::new(re, im);
        prop_assume!(lambda.norm() > 1e-3 && lambda.norm() * s.abs() <= 10.0);
        let fam = random_family(seed, 6, norm);
        let q = s_operator(&fam, lambda, s, None).unwrap();
        prop_assert!(q.converged);
        prop_assert!(q.refinement_change <= 1e-9, "change {}", q.refinement_change);
    }

    #[test]
    fn s_norm_bound(seed in any::<u64>(), norm in 0.1f64..4.0, re in 0.05f64..3.0, im in -3.0f64..3.0, s in -2.0f64..2.0) {
        let fam = random_family(seed, 6, norm);
        let b = s_norm_bound_check(&fam, Complex::new(re, im), s, None).unwrap();
        prop_assert!(b.lhs <= b.rhs + 1e-8, "{b:?}");
    }

    #[test]
    fn elementary_sinh_inequality(re in 1e-6f64..20.0, im in -20.0f64..20.0, s in -5.0f64..5.0) {
        let l = Complex::new(re, im);
        prop_assert!(sinh_factor(l, s) <= sinh_majorant(l, s) * (1.0 + 1e-12) + 1e-8);
    }

    #[test]
    fn resolvent_via_s_matches_direct_solve(seed in any::<u64>(), norm in 0.5f64..4.0) {
        let fam = random_family(seed, 6, norm);
        let mut r = rng(seed ^ 0x5eed);
        let mut checked = 0;
        while checked < 20 {
            use rand::Rng;
            let lambda = Complex::new(r.gen_range(0.2..3.0), r.gen_range(-3.0..3.0));
            let s = r.gen_range(0.2..1.5);
            // Only points where cosh(λs) is well separated from the spectrum of C(s).
            let z = (lambda * s).cosh();
            let shifted = fam.cosine_at(s).unwrap().shift(-z);
            if *singular_values(&shifted).unwrap().last().unwrap() < 0.1 {
                continue;
            }
            let rep = resolvent_via_s(&fam, lambda, s, None).unwrap();
            prop_assert!(rep.direct_solve_gap(fam.generator().matrix()).unwrap() <= 1e-6);
            prop_assert!(rep.identity_residual <= 1e-6);
            prop_assert!(rep.bound_slack >= -1e-8);
            checked += 1;
        }
    }

    #[test]
    fn cosine_laplace_bound(seed in any::<u64>(), norm in 0.1f64..4.0) {
        let fam = random_family(seed, 6, norm);
        let g = growth_bound_estimate(&fam, 10.0, 201).unwrap();
        let mut r = rng(seed);
        for _ in 0..50 {
            use rand::Rng;
            let lambda = Complex::new(g.omega + r.gen_range(0.5..5.0), r.gen_range(-5.0..5.0));
            let b = cosine_laplace_bound_check(&fam, &g, lambda).unwrap();
            prop_assert!(b.lhs <= b.rhs + 1e-6, "{b:?} at {lambda}");
        }
    }

    #[test]
    fn quadrature_integrates_its_degree(n in 1usize..12, panels in 1usize..6, k in 0usize..24) {
        let q = QuadratureRule::new(panels, n).unwrap();
        prop_assume!(k <= q.exact_degree());
        let got = q.integrate(-0.5f64, 1.5, |x| x.powi(k as i32));
        let exact = (1.5f64.powi(k as i32 + 1) - (-0.5f64).powi(k as i32 + 1)) / (k as f64 + 1.0);
        prop_assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0));
    }
}

#[test]
fn laplace_resolvent_on_random_stable() {
    use zerotwo::sample::random_stable;
    use zerotwo::{laplace_resolvent, resolvent, Semigroup};
    let a = random_stable(&mut rng(9), 8, 2.0, 0.5);
    let sg = Semigroup::new(a.clone()).unwrap();
    let g = growth_bound_estimate(&sg, 10.0, 201).unwrap();
    let lambda = Complex::new(1.0, 0.0);
    let lr = laplace_resolvent(&sg, lambda, &g, None).unwrap();
    let direct = resolvent(&a, lambda).unwrap();
    assert!(op_norm(&(&lr.value - &direct)).unwrap() <= 1e-6 * op_norm(&direct).unwrap());
}
