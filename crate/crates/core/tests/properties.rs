//! Property-based invariants across the library.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uturn_core::detect::{detect_turns, DetectorConfig};
use uturn_core::measures::turn_speed_from_duration;
use uturn_core::stats::{bland_altman, mann_whitney, spearman};
use uturn_core::synth::{generate_session, SessionSpec, TurnDurations};
use uturn_core::util::{median, quantile_sorted};

fn finite_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0e6..1.0e6f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn median_is_permutation_invariant(values in finite_vec(1..50), seed: u64) {
        let mut shuffled = values.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(median(&values), median(&shuffled));
    }

    #[test]
    fn median_lies_within_range(values in finite_vec(1..50)) {
        let m = median(&values).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= m && m <= hi);
    }

    #[test]
    fn speed_duration_product_is_half_turn(d in 0.1..100.0f64) {
        prop_assert!((turn_speed_from_duration(d) * d - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn quantiles_are_monotone_in_q(values in finite_vec(2..40), q1 in 0.0..1.0f64, q2 in 0.0..1.0f64) {
        let mut sorted = values;
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        prop_assert!(quantile_sorted(&sorted, lo) <= quantile_sorted(&sorted, hi));
    }

    #[test]
    fn bland_altman_is_antisymmetric(pairs in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 2..30)) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let ab = bland_altman(&a, &b).unwrap();
        let ba = bland_altman(&b, &a).unwrap();
        prop_assert!((ab.bias + ba.bias).abs() < 1e-9);
        prop_assert!((ab.loa_lower + ba.loa_upper).abs() < 1e-9);
        prop_assert!((ab.loa_upper + ba.loa_lower).abs() < 1e-9);
    }

    #[test]
    fn mann_whitney_u_values_sum_to_n1n2(
        a in prop::collection::vec(-5.0..5.0f64, 1..25),
        b in prop::collection::vec(-5.0..5.0f64, 1..25),
    ) {
        let ua = mann_whitney(&a, &b).unwrap();
        let ub = mann_whitney(&b, &a).unwrap();
        prop_assert!((ua.u + ub.u - (a.len() * b.len()) as f64).abs() < 1e-9);
        prop_assert!((ua.p - ub.p).abs() < 1e-9);
    }

    #[test]
    fn spearman_is_plus_minus_one_on_strictly_monotone_data(
        mut x in prop::collection::vec(-50.0..50.0f64, 3..30),
    ) {
        x.sort_by(f64::total_cmp);
        x.dedup();
        prop_assume!(x.len() >= 3);
        let up: Vec<f64> = x.iter().map(|v| v.exp() * 0.5 + v).collect();
        let down: Vec<f64> = x.iter().map(|v| -v.powi(3) - 2.0 * v).collect();
        prop_assert!((spearman(&x, &up).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((spearman(&x, &down).unwrap() + 1.0).abs() < 1e-12);
    }
}

fn arbitrary_session() -> impl Strategy<Value = SessionSpec> {
    (
        0usize..5,
        prop::collection::vec(0.6..4.0f64, 5),
        0.0..0.3f64,
        0.8..1.4f64,
        0.0..0.04f64,
        -30.0..30.0f64,
        any::<u64>(),
    )
        .prop_map(|(n_turns, durs, amp, freq, noise, tilt_deg, seed)| SessionSpec {
            n_turns,
            turn_durations: TurnDurations::PerTurn(durs[..n_turns].to_vec()),
            pelvis_osc_amp: amp,
            pelvis_osc_freq_hz: freq,
            gyro_noise_sd: noise,
            accel_noise_sd: noise,
            tilt_deg,
            seed,
            ..SessionSpec::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn detected_turns_are_sorted_disjoint_and_gated(spec in arbitrary_session()) {
        let (stream, _) = generate_session(&spec).unwrap();
        let config = DetectorConfig::default();
        let turns = detect_turns(&stream, &config).unwrap();
        for w in turns.windows(2) {
            prop_assert!(w[0].end_s <= w[1].start_s, "turns must not overlap");
        }
        for t in &turns {
            prop_assert!(t.duration <= config.max_duration + 1e-9);
            prop_assert!(t.angle.abs() >= config.min_angle - 1e-9);
            prop_assert!(t.peak_rate >= config.rate_threshold - 1e-9);
            prop_assert!((t.duration - (t.end_s - t.start_s)).abs() < 1e-12);
        }
    }

    #[test]
    fn time_shift_moves_turns_rigidly(seed: u64, shift in 0.0..50.0f64) {
        let spec = SessionSpec {
            n_turns: 3,
            gyro_noise_sd: 0.02,
            accel_noise_sd: 0.05,
            tilt_deg: 10.0,
            seed,
            ..SessionSpec::default()
        };
        let (stream, _) = generate_session(&spec).unwrap();
        let mut shifted = stream.clone();
        for s in &mut shifted.samples {
            s.t += shift;
        }
        let base = detect_turns(&stream, &DetectorConfig::default()).unwrap();
        let moved = detect_turns(&shifted, &DetectorConfig::default()).unwrap();
        prop_assert_eq!(base.len(), moved.len());
        for (a, b) in base.iter().zip(&moved) {
            prop_assert!((b.start_s - a.start_s - shift).abs() < 1e-9);
            prop_assert!((b.end_s - a.end_s - shift).abs() < 1e-9);
            prop_assert_eq!(a.direction, b.direction);
        }
    }

    #[test]
    fn mirrored_stream_flips_directions_only(seed: u64) {
        let spec = SessionSpec {
            n_turns: 4,
            gyro_noise_sd: 0.01,
            tilt_deg: -12.0,
            seed,
            ..SessionSpec::default()
        };
        let (stream, _) = generate_session(&spec).unwrap();
        let mut mirrored = stream.clone();
        for s in &mut mirrored.samples {
            for g in &mut s.gyro {
                *g = -*g;
            }
        }
        let base = detect_turns(&stream, &DetectorConfig::default()).unwrap();
        let flip = detect_turns(&mirrored, &DetectorConfig::default()).unwrap();
        prop_assert_eq!(base.len(), flip.len());
        for (a, b) in base.iter().zip(&flip) {
            prop_assert_eq!(a.start_s.to_bits(), b.start_s.to_bits());
            prop_assert_eq!(a.end_s.to_bits(), b.end_s.to_bits());
            prop_assert!((a.angle + b.angle).abs() < 1e-12);
            prop_assert!(a.direction != b.direction);
        }
    }
}
