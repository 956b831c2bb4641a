use levywalk::jump_first::pdf_jump_first_half;
use levywalk::montecarlo::{empirical_density, sample_positive_stable, simulate_path, uniform_edges};
use levywalk::quadrature::{integrate_finite, QuadConfig, SingularityHint};
use levywalk::stable::{r_alpha, StableIndex};
use levywalk::wait_first::{pdf_wait_first, pdf_wait_first_half};
use levywalk::{EvalPoint, ModelParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_is_linear(c in -3.0f64..3.0, k in 0.5f64..4.0, a in -2.0f64..0.0, len in 0.1f64..3.0) {
        let cfg = QuadConfig { abs_tol: 1e-13, rel_tol: 1e-12, ..QuadConfig::default() };
        let b = a + len;
        let f = |x: f64| (k * x).sin();
        let g = |x: f64| (-x * x).exp();
        let lhs = integrate_finite(|x| c * f(x) + g(x), a, b, SingularityHint::None, &cfg).unwrap().value;
        let rf = integrate_finite(f, a, b, SingularityHint::None, &cfg).unwrap().value;
        let rg = integrate_finite(g, a, b, SingularityHint::None, &cfg).unwrap().value;
        prop_assert!((lhs - (c * rf + rg)).abs() < 1e-10);
    }

    #[test]
    fn quadrature_is_additive_over_singular_splits(s in -0.9f64..-0.05, m in 0.1f64..0.9) {
        let cfg = QuadConfig::relative(1e-11);
        let f = |x: f64| x.powf(s) * (1.0 + x).ln_1p();
        let whole = integrate_finite(f, 0.0, 1.0, SingularityHint::Lower(s), &cfg).unwrap().value;
        let left = integrate_finite(f, 0.0, m, SingularityHint::Lower(s), &cfg).unwrap().value;
        let right = integrate_finite(f, m, 1.0, SingularityHint::None, &cfg).unwrap().value;
        prop_assert!(close(whole, left + right, 1e-9));
    }

    #[test]
    fn wait_first_half_mirror(p in 0.01f64..0.99, x in -0.999f64..0.999, t in 0.1f64..10.0) {
        prop_assume!(x.abs() > 1e-6);
        let a = pdf_wait_first_half(p, t, t * x).unwrap();
        let b = pdf_wait_first_half(1.0 - p, t, -t * x).unwrap();
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn wait_first_half_self_similar(p in 0.01f64..0.99, x in -0.999f64..0.999, t in 0.1f64..10.0) {
        prop_assume!(x.abs() > 1e-6);
        let a = pdf_wait_first_half(p, t, t * x).unwrap();
        let b = pdf_wait_first_half(p, 1.0, x).unwrap() / t;
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn jump_first_half_mirror_and_scaling(p in 0.01f64..0.99, y in -6.0f64..6.0, t in 0.1f64..10.0) {
        prop_assume!(y.abs() > 1e-6);
        let a = pdf_jump_first_half(p, t, t * y).unwrap();
        prop_assert!(a >= 0.0 && a.is_finite());
        prop_assert!(close(a, pdf_jump_first_half(1.0 - p, t, -t * y).unwrap(), 1e-12));
        prop_assert!(close(a, pdf_jump_first_half(p, 1.0, y).unwrap() / t, 1e-12));
    }

    #[test]
    fn wait_first_vanishes_off_support(alpha in 0.05f64..0.95, p in 0.01f64..0.99, t in 0.1f64..10.0, k in 1.0f64..5.0, neg: bool) {
        let x = if neg { -k * t } else { k * t };
        let v = pdf_wait_first(ModelParams::new(alpha, p).unwrap(), EvalPoint::new(t, x).unwrap(), &QuadConfig::default()).unwrap();
        prop_assert_eq!(v.value, 0.0);
    }

    #[test]
    fn stable_density_is_nonnegative(alpha in 0.05f64..0.95, x in 1e-3f64..1e3) {
        let v = r_alpha(StableIndex::new(alpha).unwrap(), x).unwrap();
        prop_assert!(v >= 0.0 && v.is_finite());
    }

    #[test]
    fn stable_samples_are_positive(alpha in 0.05f64..0.95, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = StableIndex::new(alpha).unwrap();
        for _ in 0..100 {
            let z = sample_positive_stable(idx, &mut rng);
            prop_assert!(z > 0.0 && z.is_finite());
        }
    }

    #[test]
    fn walk_endpoints_respect_speed_limit(alpha in 0.05f64..0.95, p in 0.01f64..0.99, t in 0.1f64..5.0, n in 1u64..2000, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ModelParams::new(alpha, p).unwrap();
        for _ in 0..20 {
            let e = simulate_path(params, t, n, &mut rng);
            prop_assert!(e.wait_first.abs() <= t);
            prop_assert!(e.up_jumps <= e.jumps);
            prop_assert!(e.jump_first.is_finite());
        }
    }

    #[test]
    fn histogram_masses_account_for_every_sample(values in prop::collection::vec(-3.0f64..3.0, 1..300), bins in 1usize..40) {
        let h = empirical_density(&values, &uniform_edges(-1.0, 1.0, bins).unwrap()).unwrap();
        let inside: f64 = h.masses.iter().sum();
        prop_assert!((inside + h.clipped_fraction - 1.0).abs() < 1e-12);
        prop_assert!(h.masses.iter().all(|&m| m >= 0.0));
    }
}
