use std::collections::BTreeMap;

use proptest::prelude::*;

use stable_rates::chaos::{coeff_c, enumerate_a, hermite, partitions};
use stable_rates::config::{parse_ladder, ConfigPatch, ExperimentConfig, ExperimentKind};
use stable_rates::distances::{default_smooth_bank, kolmogorov, rate_fit, smooth_metric, wasserstein1};
use stable_rates::fbm::{indicator_inner, rho_h, Hurst};
use stable_rates::malliavin::{
    assemble_theorem51_bound, delta_bound, kolmogorov_transfer, theorem51_terms, tv_transfer, BoundIngredients,
};
use stable_rates::mc::derive_seed;

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, 1..60)
}

fn ingredients() -> impl Strategy<Value = [f64; 4]> {
    [0.0f64..5.0, 0.0f64..5.0, 0.0f64..5.0, 0.0f64..5.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn wasserstein_is_a_metric(xs in sample(), ys in sample(), zs in sample()) {
        let xy = wasserstein1(&xs, &ys).unwrap();
        prop_assert!(xy >= 0.0);
        prop_assert!((xy - wasserstein1(&ys, &xs).unwrap()).abs() <= 1e-9 * (1.0 + xy));
        prop_assert_eq!(wasserstein1(&xs, &xs).unwrap(), 0.0);
        let tri = wasserstein1(&xs, &zs).unwrap() + wasserstein1(&zs, &ys).unwrap();
        prop_assert!(xy <= tri + 1e-9 * (1.0 + tri));
    }

    #[test]
    fn wasserstein_of_a_shift(xs in sample(), c in -10.0f64..10.0) {
        let ys: Vec<f64> = xs.iter().map(|x| x + c).collect();
        prop_assert!((wasserstein1(&xs, &ys).unwrap() - c.abs()).abs() < 1e-9);
    }

    #[test]
    fn kolmogorov_bounded_symmetric(xs in sample(), ys in sample()) {
        let k = kolmogorov(&xs, &ys).unwrap();
        prop_assert!((0.0..=1.0).contains(&k));
        prop_assert_eq!(k, kolmogorov(&ys, &xs).unwrap());
    }

    #[test]
    fn smooth_metric_symmetric_and_below_w1(xs in sample(), ys in sample()) {
        let bank = default_smooth_bank();
        let s = smooth_metric(&xs, &ys, &bank).unwrap();
        prop_assert!((s - smooth_metric(&ys, &xs, &bank).unwrap()).abs() < 1e-12);
        // every bank member is 1-Lipschitz
        prop_assert!(s <= wasserstein1(&xs, &ys).unwrap() + 1e-9);
    }

    #[test]
    fn delta_monotone_in_each_ingredient(base in ingredients(), which in 0usize..4, bump in 0.0f64..3.0) {
        let ing = BoundIngredients::new(base[0], base[1], base[2], base[3]).unwrap();
        let mut up = base;
        up[which] += bump;
        let ing_up = BoundIngredients::new(up[0], up[1], up[2], up[3]).unwrap();
        prop_assert!(delta_bound(&ing_up) >= delta_bound(&ing) * (1.0 - 1e-12));
    }

    #[test]
    fn transfers_monotone(d in 0.0f64..2.0, bump in 0.0f64..2.0, alpha in 0.05f64..1.0, p in 1u32..5) {
        let k0 = kolmogorov_transfer(d, alpha, 1.7).unwrap();
        let k1 = kolmogorov_transfer(d + bump, alpha, 1.7).unwrap();
        prop_assert!(k1 >= k0);
        prop_assert!(tv_transfer(d + bump, p, 1.0).unwrap() >= tv_transfer(d, p, 1.0).unwrap());
    }

    #[test]
    fn theorem51_bound_is_linear(q in 1usize..4, c in 0.0f64..10.0, seed in any::<u64>()) {
        let terms = theorem51_terms(&[q], 1, 0).unwrap();
        let mut rng = seed;
        let mut next = || {
            rng = derive_seed(rng, &[1]);
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut norms = BTreeMap::new();
        let mut est = BTreeMap::new();
        for t in &terms {
            norms.entry(t.derivative.clone()).or_insert_with(&mut next);
            est.entry(t.key.clone()).or_insert_with(&mut next);
        }
        let base = assemble_theorem51_bound(&[q], 1, 0, &norms, &est).unwrap();
        prop_assert!(base >= 0.0);
        let scaled: BTreeMap<_, _> = est.iter().map(|(k, v)| (k.clone(), c * v)).collect();
        let b2 = assemble_theorem51_bound(&[q], 1, 0, &norms, &scaled).unwrap();
        prop_assert!((b2 - c * base).abs() <= 1e-10 * (1.0 + c * base));
    }

    #[test]
    fn rho_symmetric_and_bounded(p in -5000i64..5000, h in 0.01f64..0.99) {
        let h = Hurst::new(h).unwrap();
        let r = rho_h(p, h);
        prop_assert_eq!(r, rho_h(-p, h));
        prop_assert!(r.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn indicator_inner_additive(mut pts in prop::collection::vec(0.0f64..1.0, 5), h in 0.05f64..0.95) {
        pts.sort_by(f64::total_cmp);
        let h = Hurst::new(h).unwrap();
        let (a, b, e, c, d) = (pts[0], pts[1], pts[2], pts[3], pts[4]);
        let split = indicator_inner(a, b, c, d, h).unwrap() + indicator_inner(b, e, c, d, h).unwrap();
        let whole = indicator_inner(a, e, c, d, h).unwrap();
        prop_assert!((split - whole).abs() < 1e-12);
    }

    #[test]
    fn hermite_recurrence(q in 1usize..20, x in -5.0f64..5.0) {
        let lhs = hermite(q + 1, x);
        let rhs = x * hermite(q, x) - q as f64 * hermite(q - 1, x);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn rate_fit_recovers_power_laws(c in 0.01f64..100.0, theta in -2.0f64..1.0) {
        let ns = [4.0, 8.0, 16.0, 32.0, 64.0];
        let ds: Vec<f64> = ns.iter().map(|n: &f64| c * n.powf(theta)).collect();
        let fit = rate_fit(&ns, &ds).unwrap();
        prop_assert!((fit.slope - theta).abs() < 1e-9);
        prop_assert!((fit.r_squared - 1.0).abs() < 1e-9 || theta.abs() < 1e-9);
    }

    #[test]
    fn seeds_deterministic_and_tag_sensitive(master in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        prop_assert_eq!(derive_seed(master, &[a, b]), derive_seed(master, &[a, b]));
        prop_assume!(a != b);
        prop_assert_ne!(derive_seed(master, &[a]), derive_seed(master, &[b]));
    }

    #[test]
    fn ladder_text_round_trip(mut ladder in prop::collection::btree_set(1usize..100_000, 1..12)) {
        let v: Vec<usize> = std::mem::take(&mut ladder).into_iter().collect();
        let text = v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        prop_assert_eq!(parse_ladder(&text).unwrap(), v);
    }

    #[test]
    fn config_json_round_trip(seed in any::<u64>(), replicas in 100usize..100_000, threads in 0usize..16) {
        let cfg = ExperimentConfig::resolve(None, ConfigPatch {
            experiment: Some(ExperimentKind::QuadraticFbm),
            seed: Some(seed),
            replicas: Some(replicas),
            threads: Some(threads),
            ..Default::default()
        }).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn faa_di_bruno_coefficients_positive() {
    for q in 1..=6 {
        for a in enumerate_a(q, 1, 2).unwrap() {
            assert!(coeff_c(&a) > num_rational::BigRational::from_integer(0.into()));
        }
        // one multi-index per partition when there is a single x-coordinate and no y
        assert_eq!(enumerate_a(q, 0, 1).unwrap().len(), partitions(q).len());
    }
}
