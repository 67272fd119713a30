mod common;

use evogame::config::{parse_config, to_config_string};
use evogame::dynamics::{
    environment_rhs, imitation_rate, opinion_rhs, opinion_weighted_payoff, replicator_rhs,
};
use evogame::{
    average_payoff, classify_2x2, expected_payoff, hawk_dove_matrix, interpolate, ClampMode,
    EnvParams, GamePair, Model, Opinion, Payoff2x2, ProtocolMatrix, Strategy, SystemState,
    TrustMatrix,
};
use proptest::prelude::{
    prop, prop_assert, prop_assert_eq, prop_oneof, proptest, Just, ProptestConfig,
};
use proptest::strategy::Strategy as _;
use rand::{Rng, SeedableRng};

fn payoff() -> impl prop::strategy::Strategy<Value = Payoff2x2> {
    prop::array::uniform4(-10.0f64..10.0)
        .prop_map(|e| Payoff2x2::new(e[0], e[1], e[2], e[3]).unwrap())
}

fn pair() -> impl prop::strategy::Strategy<Value = GamePair> {
    (payoff(), payoff()).prop_map(|(a0, a1)| GamePair::new(a0, a1))
}

fn trust() -> impl prop::strategy::Strategy<Value = TrustMatrix> {
    prop::array::uniform4(0.0f64..=1.0)
        .prop_map(|b| TrustMatrix::new(b[0], b[1], b[2], b[3]).unwrap())
}

fn state() -> impl prop::strategy::Strategy<Value = SystemState> {
    (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0)
        .prop_map(|(x, n, y)| SystemState::new(x, n, y).unwrap())
}

fn env() -> impl prop::strategy::Strategy<Value = EnvParams> {
    (0.01f64..5.0, -5.0f64..=0.0).prop_map(|(t, p)| EnvParams::new(t, p).unwrap())
}

fn protocol() -> impl prop::strategy::Strategy<Value = ProtocolMatrix> {
    prop_oneof![Just(ProtocolMatrix::Env), Just(ProtocolMatrix::Opinion)]
}

/// Pure-profile Nash check written directly against the 2×2 array.
fn brute_force_pure(a: &Payoff2x2) -> Vec<(usize, usize)> {
    let m = a.rows();
    let mut out = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let row_ok = m[i][j] >= m[1 - i][j] - 1e-12;
            let col_ok = m[j][i] >= m[1 - j][i] - 1e-12;
            if row_ok && col_ok {
                out.push((i + 1, j + 1));
            }
        }
    }
    out
}

#[test]
fn classify_matches_brute_force_on_random_matrices() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    for _ in 0..1000 {
        let e: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
        let a = Payoff2x2::new(e[0], e[1], e[2], e[3]).unwrap();
        let report = classify_2x2(&a).unwrap();
        let got: Vec<(usize, usize)> = report
            .pure_profiles()
            .iter()
            .map(|(r, c)| (r.index(), c.index()))
            .collect();
        assert_eq!(got, brute_force_pure(&a), "{a:?}");
        if let Some(x) = report.mixed_interior {
            assert!(x > 0.0 && x < 1.0);
            let u1 = e[0] * x + e[1] * (1.0 - x);
            let u2 = e[2] * x + e[3] * (1.0 - x);
            assert!((u1 - u2).abs() <= 1e-12);
        }
    }
}

#[test]
fn average_payoff_consistency_on_grid() {
    let a = Payoff2x2::new(-2.5, 3.0, 1.25, -0.5).unwrap();
    for k in 0..=10 {
        let x = k as f64 / 10.0;
        let lhs = average_payoff(&a, x).unwrap();
        let rhs = x * expected_payoff(&a, Strategy::First, x).unwrap()
            + (1.0 - x) * expected_payoff(&a, Strategy::Second, x).unwrap();
        assert!((lhs - rhs).abs() <= 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn interpolation_is_affine(p in pair(), w in 0.0f64..=1.0) {
        let m = interpolate(&p, w).unwrap();
        let hi = interpolate(&p, 1.0).unwrap();
        let lo = interpolate(&p, 0.0).unwrap();
        for (got, (h, l)) in m.entries().iter().zip(hi.entries().iter().zip(lo.entries())) {
            prop_assert!((got - (w * h + (1.0 - w) * l)).abs() <= 1e-14);
        }
    }

    #[test]
    fn expected_payoff_is_affine(a in payoff(), x1 in 0.0f64..=1.0, x2 in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        for s in Strategy::BOTH {
            let mixed = expected_payoff(&a, s, t * x1 + (1.0 - t) * x2).unwrap();
            let split = t * expected_payoff(&a, s, x1).unwrap()
                + (1.0 - t) * expected_payoff(&a, s, x2).unwrap();
            prop_assert!((mixed - split).abs() <= 1e-13);
        }
    }

    #[test]
    fn hawk_dove_classification(v in 0.01f64..50.0, gap in 0.01f64..50.0) {
        let c = v + gap;
        let r = classify_2x2(&hawk_dove_matrix(v, c).unwrap()).unwrap();
        prop_assert!((r.mixed_interior.unwrap() - v / c).abs() <= 1e-12);
        prop_assert!(r.pure_symmetric.is_empty());
        prop_assert_eq!(
            r.pure_asymmetric,
            vec![(Strategy::First, Strategy::Second), (Strategy::Second, Strategy::First)]
        );
    }

    #[test]
    fn protocol_rates_stay_in_unit_interval(s in state(), a in payoff(), b in trust()) {
        for (from, to) in [(Opinion::M1, Opinion::M2), (Opinion::M2, Opinion::M1)] {
            let p = imitation_rate(from, to, &s, &a, &b, ClampMode::UnitInterval).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn boundary_invariance(a in payoff(), e in env(), x in 0.0f64..=1.0, n in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        for edge in [0.0, 1.0] {
            prop_assert_eq!(replicator_rhs(&SystemState { x: edge, n, y }, &a), 0.0);
            prop_assert_eq!(environment_rhs(&SystemState { x, n: edge, y }, &e), 0.0);
        }
    }

    #[test]
    fn replicator_sign_follows_payoff_gap(a in payoff(), x in 1e-6f64..(1.0 - 1e-6)) {
        let s = SystemState { x, n: 0.5, y: 0.5 };
        let gap = a.payoff(Strategy::First, x) - a.payoff(Strategy::Second, x);
        let d = replicator_rhs(&s, &a);
        if gap != 0.0 {
            prop_assert_eq!(d.signum(), gap.signum());
        } else {
            prop_assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn equal_games_decouple_the_replicator(
        g in payoff(), e in env(), b in trust(), mode in protocol(), x in 0.0f64..=1.0,
        ny in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 100),
    ) {
        let m = Model::new(GamePair::new(g, g), e, b, mode);
        let first = m.coupled_rhs(&SystemState { x, n: ny[0].0, y: ny[0].1 }).unwrap().dx;
        for (n, y) in ny {
            prop_assert_eq!(m.coupled_rhs(&SystemState { x, n, y }).unwrap().dx, first);
        }
    }

    #[test]
    fn opinion_rhs_matches_scalar_recomputation(s in state(), a in payoff(), b in trust()) {
        let s1 = opinion_weighted_payoff(Opinion::M1, &s, &a, &b);
        let s2 = opinion_weighted_payoff(Opinion::M2, &s, &a, &b);
        let g1 = s.y * s1;
        let g2 = (1.0 - s.y) * s2;
        let p21 = (g1 - g2).clamp(0.0, 1.0);
        let p12 = (g2 - g1).clamp(0.0, 1.0);
        let want = (1.0 - s.y) * p21 - s.y * p12;
        let got = opinion_rhs(&s, &a, &b, ClampMode::UnitInterval);
        prop_assert!((got - want).abs() <= 1e-14);
    }

    #[test]
    fn config_round_trip(
        p in pair(), e in env(), b in trust(), init in state(), mode in protocol(),
        clamp in prop_oneof![Just(ClampMode::UnitInterval), Just(ClampMode::PositivePart)],
        dt in 1e-4f64..0.1, record_every in 1usize..100, hold in 0.0f64..5.0,
    ) {
        let mut sc = common::hawk_dove();
        sc.label = "round trip".into();
        sc.pair = p;
        sc.env = e;
        sc.trust = b;
        sc.initial = init;
        sc.protocol = mode;
        sc.clamp = clamp;
        sc.settings.dt = dt;
        sc.settings.record_every = record_every;
        sc.settings.hold_time = hold;
        let back = parse_config(&to_config_string(&sc), &[]).unwrap();
        prop_assert_eq!(back, sc);
    }
}
