use num_complex::Complex64;
use proptest::prelude::*;

use thicknet::geometry::{classify, displacement, dist, exp, log, Isometry, Kind, Model, Point};
use thicknet::lattice::{bundled, Word};
use thicknet::lemma_lab::{
    commuting_trial, min_power_trial, projection_trial, random_conjugator, ray_trial, trial_rng,
    Tally, TrialConfig,
};
use thicknet::morse::{psi, MorseConfig};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn model() -> impl Strategy<Value = Model> {
    prop_oneof![Just(Model::H2), Just(Model::H3)]
}

fn point(model: Model) -> impl Strategy<Value = Point> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(move |(x, y, lh)| {
        let y = if model == Model::H3 { y } else { 0.0 };
        Point::new(model, Complex64::new(x, y), lh.exp()).unwrap()
    })
}

fn isometry(model: Model) -> impl Strategy<Value = Isometry> {
    any::<u64>().prop_map(move |s| random_conjugator(&mut trial_rng(s, 0), model))
}

fn two_points() -> impl Strategy<Value = (Point, Point)> {
    model().prop_flat_map(|m| (point(m), point(m)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_symmetric_and_invariant(m in model(), s in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        let g = random_conjugator(&mut trial_rng(s, 1), m);
        let p = random_conjugator(&mut trial_rng(a, 2), m).apply(&Point::origin(m));
        let q = random_conjugator(&mut trial_rng(b, 3), m).apply(&Point::origin(m));
        let d = dist(&p, &q);
        prop_assert!(d >= 0.0);
        prop_assert!(rel(d, dist(&q, &p)) < 1e-12);
        prop_assert!(rel(d, dist(&g.apply(&p), &g.apply(&q))) < 1e-9);
    }

    #[test]
    fn triangle_inequality((p, q) in two_points(), lh in -3.0..3.0f64) {
        let r = Point::new(p.model(), p.w() * 0.5, lh.exp()).unwrap();
        prop_assert!(dist(&p, &q) <= dist(&p, &r) + dist(&r, &q) + 1e-9);
    }

    #[test]
    fn exp_inverts_log((p, q) in two_points()) {
        let back = exp(&p, &log(&p, &q));
        prop_assert!(dist(&back, &q) < 1e-8 * (1.0 + dist(&p, &q)));
    }

    #[test]
    fn displacement_is_conjugation_invariant(m in model(), s in any::<u64>(), t in any::<u64>()) {
        let g = random_conjugator(&mut trial_rng(s, 4), m);
        let h = random_conjugator(&mut trial_rng(t, 5), m);
        let x = random_conjugator(&mut trial_rng(t, 6), m).apply(&Point::origin(m));
        let lhs = displacement(&g.conjugate_by(&h), &h.apply(&x));
        prop_assert!(rel(lhs, displacement(&g, &x)) < 1e-8);
    }

    #[test]
    fn classification_is_conjugation_invariant(m in model(), k in 1i64..4, h in isometry(Model::H2)) {
        let base = Isometry::real(2.0, 1.0, 1.0, 1.0).unwrap();
        let h = if m == Model::H3 {
            Isometry::from_entries(Model::H3, h.entries()).unwrap()
        } else {
            h
        };
        let g = Isometry::from_entries(m, base.pow(k).entries()).unwrap();
        let (c0, c1) = (classify(&g), classify(&g.conjugate_by(&h)));
        prop_assert_eq!(c0.kind, Kind::Hyperbolic);
        prop_assert_eq!(c1.kind, Kind::Hyperbolic);
        prop_assert!(rel(c0.translation_length, c1.translation_length) < 1e-9);
    }

    #[test]
    fn cutoff_inverse_round_trips(t in 1e-3..0.1f64) {
        let cfg = MorseConfig::defaults(Model::H2);
        let a = cfg.cutoff_f(t).unwrap();
        prop_assert!(rel(cfg.cutoff_f_inv(a), t) < 1e-9);
        prop_assert!(cfg.cutoff_f_prime(t).unwrap() <= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn psi_is_lattice_invariant(
        x in -2.0..2.0f64,
        lh in 0.2f64.ln()..40f64.ln(),
        word in proptest::collection::vec(prop_oneof![Just(1), Just(-1), Just(2), Just(-2)], 1..4),
    ) {
        let l = bundled("modular").unwrap();
        let cfg = MorseConfig::defaults(Model::H2);
        let p = Point::h2(x, lh.exp()).unwrap();
        let q = l.evaluate(&Word(word)).apply(&p);
        let (a, b) = (psi(&l, &p, &cfg).unwrap(), psi(&l, &q, &cfg).unwrap());
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn lemma_trials_hold_for_any_seed(m in model(), seed in any::<u64>(), trial in any::<u64>()) {
        let cfg = TrialConfig::with_model(m);
        let mut tally = Tally::new(cfg.tau);
        let mut rng = trial_rng(seed, trial);
        projection_trial(&mut rng, m, &mut tally).unwrap();
        ray_trial(&mut rng, &cfg, &mut tally).unwrap();
        commuting_trial(&mut rng, &cfg, &mut tally).unwrap();
        min_power_trial(&mut rng, &cfg, &mut tally).unwrap();
        prop_assert!(tally.assertions() > 0);
        prop_assert_eq!(tally.violations(), 0, "max excess {:.2e}", tally.max_violation());
    }
}
