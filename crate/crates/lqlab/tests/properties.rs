//! Randomized invariants over the channel, dataset, and metrics layers.

use proptest::prelude::*;

use lqlab::channel::{erf, ChannelParams};
use lqlab::dataset::{
    assemble, generate_trace, split, window, EnvSpec, Scheme, DEFAULT_SENTINEL_DBM,
};
use lqlab::metrics::{binary_entropy, label_entropy};
use lqlab::rng::derive_stream;

fn arb_params() -> impl Strategy<Value = ChannelParams> {
    (1.5f64..5.0, 1.0f64..10.0, 60.0f64..110.0).prop_map(|(alpha, sigma, beta_th)| {
        ChannelParams::new(alpha, sigma, 16.9897, beta_th).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delivery_rate_stays_in_unit_interval(p in arb_params(), d in 1.0f64..50_000.0) {
        let rate = p.delivery_rate(d).unwrap();
        prop_assert!((0.0..=1.0).contains(&rate));
    }

    #[test]
    fn delivery_rate_never_increases(p in arb_params(), a in 1.0f64..20_000.0, b in 1.0f64..20_000.0) {
        let (near, far) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(p.delivery_rate(near).unwrap() >= p.delivery_rate(far).unwrap());
    }

    #[test]
    fn rssi_plus_attenuation_is_transmit_power(
        p in arb_params(),
        d in 10.0f64..5_000.0,
        seed in any::<u64>(),
    ) {
        let mut rng = derive_stream(seed, 0);
        let draw = p.draw_link(d, &mut rng).unwrap();
        prop_assert_eq!(draw.rssi_dbm + draw.beta_db, p.pt_dbm);
        prop_assert_eq!(draw.received, draw.beta_db < p.beta_th_db);
    }

    #[test]
    fn erf_is_odd_and_bounded(x in -6.0f64..6.0) {
        prop_assert!(erf(x).abs() <= 1.0);
        prop_assert_eq!(erf(-x), -erf(x));
    }

    #[test]
    fn erf_never_decreases(a in -6.0f64..6.0, b in -6.0f64..6.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(erf(lo) <= erf(hi));
    }

    #[test]
    fn window_counts_match_trace_length(
        n in 5usize..60,
        k in 1usize..4,
        seed in any::<u64>(),
    ) {
        let p = ChannelParams::default();
        let mut rng = derive_stream(seed, 1);
        let trace = generate_trace(900.0, n, &p, DEFAULT_SENTINEL_DBM, &mut rng).unwrap();
        for scheme in [Scheme::TwoClass, Scheme::FourClass] {
            let expected = (n + 1).saturating_sub(k + scheme.lookahead());
            prop_assume!(expected > 0);
            let samples = window(&trace, k, scheme).unwrap();
            prop_assert_eq!(samples.len(), expected);
            for s in &samples {
                prop_assert_eq!(s.features.len(), 2 * k);
                prop_assert!((s.label as usize) < scheme.n_labels());
            }
        }
    }

    #[test]
    fn split_preserves_sample_count(
        count in 4usize..40,
        frac in 0.2f64..0.8,
        seed in any::<u64>(),
    ) {
        let p = ChannelParams::default();
        let spec = [
            EnvSpec { distance_m: 700.0, count },
            EnvSpec { distance_m: 1_300.0, count },
        ];
        let set = assemble(&spec, Scheme::TwoClass, 3, &p, DEFAULT_SENTINEL_DBM, seed).unwrap();
        let (train, test) = split(&set, frac, seed ^ 0x9).unwrap();
        prop_assert_eq!(train.len() + test.len(), set.len());
        prop_assert!(!train.is_empty());
    }

    #[test]
    fn entropy_is_bounded_by_log_support(weights in proptest::collection::vec(0.01f64..1.0, 2..6)) {
        let total: f64 = weights.iter().sum();
        let dist: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let h = label_entropy(&dist).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (dist.len() as f64).log2() + 1e-12);
    }

    #[test]
    fn binary_entropy_is_symmetric(p in 0.0f64..=1.0) {
        prop_assert!((binary_entropy(p) - binary_entropy(1.0 - p)).abs() < 1e-12);
    }
}
