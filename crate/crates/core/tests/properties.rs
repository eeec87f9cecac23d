use css_lab::adaptive::{dynamic_threshold, FusionState};
use css_lab::fusion::{cfar_threshold, mrc_weights, CombinerKind, FusionConfig};
use css_lab::harness::{simulate_pair, Scenario};
use css_lab::theory::*;
use css_lab::Hypothesis;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = CombinerKind> {
    prop::sample::select(CombinerKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn rho_at_least_one(
        cap in 2usize..40,
        vars in prop::collection::vec(1e-3f64..1e3, 2..80),
    ) {
        let mut st = FusionState::new(cap).unwrap();
        for v in vars {
            st.push_event(1.0, v);
            if st.is_full() {
                let rho = st.estimate_rho().unwrap();
                prop_assert!(rho >= 1.0 && rho.is_finite());
            }
        }
    }

    #[test]
    fn mrc_weights_on_simplex(snrs in prop::collection::vec(0f64..1e4, 1..32)) {
        prop_assume!(snrs.iter().any(|&s| s > 0.0));
        let w = mrc_weights(&snrs).unwrap();
        prop_assert_eq!(w.len(), snrs.len());
        prop_assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

fn params() -> impl Strategy<Value = TheoryParams> {
    (kind(), 1usize..10, 50usize..1500, 0.3f64..3.0, -25f64..-5.0, 1.0f64..2.0, 2usize..30)
        .prop_flat_map(|(k, n, u, s2, snr, rho, l)| {
            (0..=l).prop_map(move |m| {
                TheoryParams::new(k, n, 2 * u, s2, 10f64.powf(snr / 10.0), rho, l, m).unwrap()
            })
        })
}

fn check_grid(name: &str, vals: &[f64]) -> std::result::Result<(), TestCaseError> {
    for v in vals {
        prop_assert!((0.0..=1.0).contains(v), "{name}: {v} outside [0,1]");
    }
    for w in vals.windows(2) {
        prop_assert!(w[1] <= w[0] + 1e-9, "{name}: not monotone {:?}", w);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn awgn_probabilities_bounded_and_monotone(
        p in params(),
        mut fracs in prop::collection::vec(0.3f64..3.0, 2..12),
    ) {
        fracs.sort_by(f64::total_cmp);
        let g = p.awgn_gamma();
        let base = p.n as f64 * p.k as f64 * p.sigma_sq;
        let ls: Vec<f64> = fracs.iter().map(|f| f * base).collect();
        let eval = |f: &dyn Fn(f64) -> f64| ls.iter().map(|&l| f(l)).collect::<Vec<_>>();
        check_grid("qfa_exact", &eval(&|l| qfa_exact(&p, l).unwrap()))?;
        check_grid("qfa_approx", &eval(&|l| qfa_approx(&p, l)))?;
        check_grid("qd_awgn_exact", &eval(&|l| qd_awgn_exact(&p, l, g).unwrap()))?;
        check_grid("qd_awgn_approx", &eval(&|l| qd_awgn_approx(&p, l, g)))?;
        check_grid("predictor_prob", &eval(&|l| predictor_prob(&p, l, g).unwrap()))?;
        check_grid("qfa_proposed", &eval(&|l| qfa_proposed(&p, l, g).unwrap()))?;
        check_grid("qd_proposed_awgn", &eval(&|l| qd_proposed_awgn(&p, l, g).unwrap()))?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rayleigh_probabilities_bounded_and_monotone(
        p in params(),
        mut fracs in prop::collection::vec(0.5f64..2.0, 2..5),
    ) {
        fracs.sort_by(f64::total_cmp);
        let base = p.n as f64 * p.k as f64 * p.sigma_sq;
        let ls: Vec<f64> = fracs.iter().map(|f| f * base).collect();
        let d: Vec<f64> = ls.iter().map(|&l| qd_rayleigh(&p, l).unwrap()).collect();
        check_grid("qd_rayleigh", &d)?;
        let d: Vec<f64> = ls.iter().map(|&l| qd_proposed_rayleigh(&p, l).unwrap()).collect();
        check_grid("qd_proposed_rayleigh", &d)?;
    }

    #[test]
    fn thresholds_ordered_by_target(k in kind(), crs in 1usize..12, a in 0.001f64..0.99, b in 0.001f64..0.99) {
        let cfg = FusionConfig::new(k, crs, 1000, 1.0).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(cfar_threshold(&cfg, lo).unwrap() >= cfar_threshold(&cfg, hi).unwrap());
        let l = cfar_threshold(&cfg, hi).unwrap();
        prop_assert!(dynamic_threshold(l, 1.3, Hypothesis::H1).unwrap() <= l);
        prop_assert!(dynamic_threshold(l, 1.3, Hypothesis::H0).unwrap() >= l);
    }
}

#[test]
fn harness_output_independent_of_thread_count() {
    let sc = Scenario {
        trials: 3000,
        chain_len: 250,
        pfa_grid: vec![0.05, 0.2, 0.5],
        ..Scenario::default()
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_pair(&sc, true).unwrap())
    };
    let one = run(1);
    for threads in [2, 4, 7] {
        assert_eq!(run(threads), one, "{threads} threads");
    }
}
