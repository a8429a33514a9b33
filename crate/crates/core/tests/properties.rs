use std::collections::HashSet;

use cojam::bounds::{
    compute_phi, gdof_no_helper, gdof_theorem1, gdof_upper_general, gdof_upper_symmetric, ChannelParams,
};
use cojam::channel::{rx_coefficients, transmit, IndexCoefficients, RngStream};
use cojam::decode::{min_distance, min_distance_exhaustive, Decoder, LayerTable, Stage, SumContext, SumTerm};
use cojam::fixed::Fixed;
use cojam::scheme::{
    build_constellations, encode_tx1, scheme_params, Constellations, Regime, SchemeParams, Signal,
    SymbolTuple, DEFAULT_GAMMA,
};
use cojam::sim::{run_trials, SimConfig};
use cojam::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAINS: [f64; 4] = [1.9372, 1.0843, 1.0517, 1.9618];

fn gain() -> impl Strategy<Value = f64> {
    (0.0..1.0f64).prop_map(|u| 2.0 - u)
}

#[test]
fn phi_invariants_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100_000 {
        let a: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..3.0));
        let p = ChannelParams::new(a, [1.5; 4], 1.0).unwrap();
        let phi = compute_phi(&p);
        let phi1 = (a[1] - (a[3] - a[2]).max(0.0)).max(0.0);
        assert_eq!(phi.phi1, phi1);
        assert_eq!(phi.phi2, (a[0] - phi1).max(0.0));
        assert_eq!(phi.phi3, a[2].min(a[1]).min(phi.phi2));
        assert!(phi.phi1 >= 0.0 && phi.phi2 >= 0.0 && phi.phi3 >= 0.0);
        assert!(phi.phi3 <= a[1] && phi.phi3 <= a[2]);
    }
}

/// Exponents and their expected values at `epsilon`, written out per regime.
fn golden(alpha: f64, eps: f64) -> (Regime, [Option<f64>; 3], [f64; 3]) {
    let a = alpha;
    if a <= 0.5 {
        (Regime::R1, [None, Some(0.0), Some(a)], [0.0, a - eps, 1.0 - a - eps])
    } else if a <= 0.75 {
        (Regime::R2, [None, Some(2.0 * a - 1.0), Some(a)], [0.0, 1.0 - a - eps, 1.0 - a - eps])
    } else if a <= 5.0 / 6.0 {
        (
            Regime::R3,
            [Some(0.0), Some(2.0 * a - 1.0), Some(a)],
            [4.0 * a - 3.0 - eps, 1.0 - a - eps, 1.0 - a - eps],
        )
    } else if a <= 1.0 {
        (
            Regime::R4,
            [Some(0.0), Some(2.0 * a - 1.0), Some(a)],
            [a - 0.5 - eps, 1.0 - a - eps, 1.0 - a - eps],
        )
    } else if a <= 4.0 / 3.0 {
        (Regime::R5, [Some(a - 1.0), None, None], [a / 2.0 - eps, 0.0, 0.0])
    } else {
        (Regime::R6, [Some(a - 1.0), None, None], [2.0 - a - eps, 0.0, 0.0])
    }
}

fn largest_small_snr(sp: &SchemeParams) -> Option<(f64, Constellations)> {
    let mut chosen = None;
    for k in 0..200 {
        let p = 10f64.powf(k as f64 / 2.0);
        let consts = build_constellations(sp, p).ok()?;
        if Signal::ALL.iter().any(|&s| consts.q_max(s).unwrap_or(0) > 2) {
            break;
        }
        chosen = Some((p, consts));
    }
    chosen
}

fn tuples(consts: &Constellations, signals: &[Signal]) -> Vec<SymbolTuple> {
    let mut out = vec![SymbolTuple::default()];
    for &s in signals {
        let Some(q) = consts.q_max(s) else { continue };
        out = out
            .into_iter()
            .flat_map(|t| {
                (-q..=q).map(move |x| {
                    let mut t = t;
                    t.set(s, Some(x));
                    t
                })
            })
            .collect();
    }
    out
}

#[test]
fn composite_message_is_injective() {
    for (alpha, eps) in [(0.25, 0.2), (0.6, 0.3), (0.8, 0.15), (0.9, 0.09), (1.2, 0.5), (1.6, 0.3)] {
        let sp = scheme_params(alpha, eps, DEFAULT_GAMMA).unwrap();
        let (p, consts) = largest_small_snr(&sp).unwrap();
        let params = ChannelParams::symmetric(alpha, GAINS, p).unwrap();
        let all = tuples(&consts, &Signal::TX1);
        let distinct: HashSet<u64> = all
            .iter()
            .map(|t| encode_tx1(t, &sp, &consts, &params).to_bits())
            .collect();
        assert_eq!(distinct.len(), all.len(), "{} at P = {p:e}", sp.regime);
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let mut cfg = SimConfig::new(0.9, vec![1e40, 1e41], 300, 12);
    cfg.epsilon = Some(0.05);
    cfg.h_override = Some(GAINS);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_trials(&cfg).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(3));
    for r in &a.records {
        assert!(r.rate_lb_bits <= r.entropy_bits);
    }
}

#[test]
fn rate_guard_rejects_negative_exponents() {
    assert!(matches!(
        scheme_params(0.8, 0.21, DEFAULT_GAMMA),
        Err(Error::NegativeRateExponent { signal: Signal::Vc, .. })
    ));
    assert!(scheme_params(0.8, 0.19, DEFAULT_GAMMA).is_ok());
}

/// Regime decoder at a small-constellation SNR with its leading joint stage.
fn joint_decoder(alpha: f64, eps: f64) -> (Decoder, IndexCoefficients, Constellations, Vec<Signal>) {
    let sp = scheme_params(alpha, eps, DEFAULT_GAMMA).unwrap();
    let (p, consts) = largest_small_snr(&sp).unwrap();
    let params = ChannelParams::symmetric(alpha, GAINS, p).unwrap();
    let idx = IndexCoefficients::new(&rx_coefficients(&params, &sp), &consts).unwrap();
    let layers = LayerTable::from_parts(&params, &sp, &consts, &idx);
    let dec = Decoder::for_regime(layers, sp.regime, 1_000_000).unwrap();
    let Stage::Joint(v) = dec.stages()[0].clone() else { panic!("first stage is joint") };
    (dec, idx, consts, v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn curve_is_continuous(a in 0.0..3.0f64) {
        let d0 = gdof_theorem1(a).unwrap();
        let d1 = gdof_theorem1(a + 1e-9).unwrap();
        prop_assert!((d1 - d0).abs() <= 3e-9);
    }

    #[test]
    fn symmetric_converse_forms_agree(a in 0.0..3.0f64, h in prop::array::uniform4(gain())) {
        let params = ChannelParams::symmetric(a, h, 1.0).unwrap();
        prop_assert!((gdof_upper_symmetric(a).unwrap() - gdof_upper_general(&params)).abs() <= 1e-12);
        prop_assert!(gdof_theorem1(a).unwrap() >= gdof_no_helper(&params) - 1e-12);
    }

    #[test]
    fn table_matches_golden(a in 0.0..2.0f64, t in 0.01..0.99f64) {
        let (regime, beta, lambda0) = golden(a, 0.0);
        let slack = (0..3).filter(|&i| beta[i].is_some()).map(|i| lambda0[i]).fold(f64::INFINITY, f64::min);
        prop_assume!(slack > 1e-6);
        let eps = slack * t;
        let sp = scheme_params(a, eps, DEFAULT_GAMMA).unwrap();
        let (_, beta, lambda) = golden(a, eps);
        prop_assert_eq!(sp.regime, regime);
        let got_beta = [sp.beta_c, sp.beta_m, sp.beta_p];
        let got_lambda = [sp.lambda_c, sp.lambda_m, sp.lambda_p];
        for i in 0..3 {
            prop_assert_eq!(got_beta[i].is_some(), beta[i].is_some());
            if let (Some(g), Some(w)) = (got_beta[i], beta[i]) {
                prop_assert!((g - w).abs() <= 1e-12);
            }
            prop_assert!((got_lambda[i] - lambda[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn noise_is_deterministic(seed in any::<u64>(), stream in any::<u64>(), x1 in -1.0..1.0f64, x2 in -1.0..1.0f64) {
        let params = ChannelParams::symmetric(0.7, GAINS, 1e6).unwrap();
        let a = transmit(&params, x1, x2, &mut RngStream::new(seed, stream).rng());
        let b = transmit(&params, x1, x2, &mut RngStream::new(seed, stream).rng());
        prop_assert_eq!(a.y1.to_bits(), b.y1.to_bits());
        prop_assert_eq!(a.y2.to_bits(), b.y2.to_bits());
    }

    #[test]
    fn search_equals_exhaustive(
        g in prop::array::uniform3(1.0..4.0f64),
        a1 in 1u64..30,
        a2 in 1u64..300,
        q in prop::array::uniform3(0i128..=3),
    ) {
        let ctx = SumContext::new(vec![
            SumTerm { a: 1, g: g[0], q_max: q[0] },
            SumTerm { a: a1, g: g[1], q_max: q[1] },
            SumTerm { a: a2, g: g[2], q_max: q[2] },
        ]).unwrap();
        let fast = min_distance(&ctx, 1_000_000).unwrap();
        let slow = min_distance_exhaustive(&ctx, 1_000_000).unwrap();
        prop_assert_eq!(fast.d_min, slow.d_min);
        if fast.d_min.is_finite() {
            prop_assert_eq!(ctx.eval(&fast.witness), fast.d_min);
        }
    }

    #[test]
    fn joint_stage_separates_within_half_distance(
        regime in prop::sample::select(vec![(0.9, 0.09), (1.2, 0.5)]),
        pick in any::<prop::sample::Index>(),
        t in -0.49..0.49f64,
    ) {
        let (dec, idx, consts, joint) = joint_decoder(regime.0, regime.1);
        let d_min = dec.stage_min_distance(0).unwrap().d_min;
        prop_assert!(d_min > 0.0);

        let all = tuples(&consts, &joint);
        let clean: Vec<i128> = all.iter().map(|s| idx.observe(s, 0.0, 0.0).0 .0).collect();
        let distinct: HashSet<i128> = clean.iter().copied().collect();
        prop_assert_eq!(distinct.len(), all.len());

        let i = pick.index(all.len());
        let y = Fixed(clean[i]) + Fixed::from_f64(t * d_min).unwrap();
        let est = dec.decode(y).unwrap();
        for &s in &joint {
            prop_assert_eq!(est.get(s), all[i].get(s));
        }
    }
}
