//! Turn-speed measures: per turn, per test, and per participant.
//!
//! The clinical measure is the *turn speed median*: per test, the median
//! over detected turns of π/duration (the turn angle is fixed at π rad by
//! convention, since every U-turn is a 180° direction reversal); per
//! participant, the median of per-test medians. Test-retest analyses split
//! a participant's tests into two disjoint k-test groups and compare the
//! group medians.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::Turn;
use crate::ingest::{Setting, WearLocation};
use crate::util::median;

#[derive(Debug, Error)]
pub enum MeasuresError {
    #[error("participant has no tests with detected turns")]
    NoEligibleTests,
    #[error("participant has {have} eligible tests but {need} are required")]
    NotEnoughTests { have: usize, need: usize },
}

// --------------------------------------------------------------------------
// Per-turn and per-test measures
// --------------------------------------------------------------------------

/// Turn speed with the fixed-π convention: π / duration, rad/s.
pub fn turn_speed(turn: &Turn) -> f64 {
    turn_speed_from_duration(turn.duration)
}

/// Fixed-π turn speed for a duration in seconds.
pub fn turn_speed_from_duration(duration: f64) -> f64 {
    std::f64::consts::PI / duration
}

/// Secondary speed measure using the actually integrated angle instead of
/// the fixed-π convention.
pub fn integrated_speed(turn: &Turn) -> f64 {
    turn.angle.abs() / turn.duration
}

/// Session metadata carried into a [`TestResult`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestMeta {
    pub session_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub day: Option<u32>,
    pub setting: Setting,
    pub wear_location: WearLocation,
}

impl TestMeta {
    pub fn from_stream(stream: &crate::ingest::SensorStream) -> Self {
        TestMeta {
            session_id: stream.session_id.clone(),
            participant_id: stream.participant_id.clone(),
            day: stream.day,
            setting: stream.setting,
            wear_location: stream.wear_location,
        }
    }
}

/// Summary of one test (one session): detected turns plus their medians.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestResult {
    #[serde(flatten)]
    pub meta: TestMeta,
    pub n_turns: usize,
    /// Median of π/duration over turns; absent when no turn was detected.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub turn_speed_median: Option<f64>,
    /// Median turn duration, s; absent when no turn was detected.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub turn_duration_median: Option<f64>,
    pub per_turn: Vec<Turn>,
}

/// Aggregates one test's turns with the midpoint-of-two median rule.
pub fn summarize_test(turns: &[Turn], meta: TestMeta) -> TestResult {
    let speeds: Vec<f64> = turns.iter().map(turn_speed).collect();
    let durations: Vec<f64> = turns.iter().map(|t| t.duration).collect();
    TestResult {
        meta,
        n_turns: turns.len(),
        turn_speed_median: median(&speeds),
        turn_duration_median: median(&durations),
        per_turn: turns.to_vec(),
    }
}

// --------------------------------------------------------------------------
// Participant aggregation
// --------------------------------------------------------------------------

/// Participant-level aggregate over per-test medians.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticipantAggregate {
    pub participant_id: String,
    /// Per-test turn-speed medians, in the caller's (chronological) order.
    pub values: Vec<f64>,
    /// Median of `values`.
    pub aggregate: f64,
}

/// Median-of-medians aggregate over all tests that detected at least one
/// turn. Tests are consumed in the given order (sort by day upstream for
/// chronological semantics).
pub fn aggregate_participant(
    participant_id: &str,
    tests: &[TestResult],
) -> Result<ParticipantAggregate, MeasuresError> {
    let values: Vec<f64> = tests
        .iter()
        .filter_map(|t| t.turn_speed_median)
        .collect();
    let aggregate = median(&values).ok_or(MeasuresError::NoEligibleTests)?;
    Ok(ParticipantAggregate {
        participant_id: participant_id.to_string(),
        values,
        aggregate,
    })
}

/// How to choose the two disjoint k-test groups for test-retest splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Seeded random selection of 2k distinct tests, randomly partitioned.
    Random,
    /// First 2k tests in order: first k vs next k.
    Chronological,
}

/// Splits per-test medians into two disjoint k-sized groups and returns the
/// two group medians. Requires at least 2k values.
///
/// `Random` draws 2k distinct indices and the partition in one pass from
/// `rng` (a partial Fisher-Yates shuffle), so results are reproducible for
/// a fixed RNG state.
pub fn split_medians<R: Rng>(
    medians: &[f64],
    k: usize,
    mode: SplitMode,
    rng: &mut R,
) -> Result<(f64, f64), MeasuresError> {
    let need = 2 * k;
    if k == 0 {
        return Err(MeasuresError::NotEnoughTests { have: medians.len(), need: 2 });
    }
    if medians.len() < need {
        return Err(MeasuresError::NotEnoughTests {
            have: medians.len(),
            need,
        });
    }
    let chosen: Vec<usize> = match mode {
        SplitMode::Chronological => (0..need).collect(),
        SplitMode::Random => {
            let mut idx: Vec<usize> = (0..medians.len()).collect();
            for slot in 0..need {
                let pick = rng.gen_range(slot..idx.len());
                idx.swap(slot, pick);
            }
            idx.truncate(need);
            idx
        }
    };
    let first: Vec<f64> = chosen[..k].iter().map(|&i| medians[i]).collect();
    let second: Vec<f64> = chosen[k..].iter().map(|&i| medians[i]).collect();
    Ok((median(&first).unwrap(), median(&second).unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::TurnDirection;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn turn(duration: f64) -> Turn {
        Turn {
            start_s: 0.0,
            end_s: duration,
            duration,
            angle: PI,
            direction: TurnDirection::Left,
            peak_rate: 2.0 * PI / duration,
        }
    }

    fn meta() -> TestMeta {
        TestMeta {
            session_id: "s1".into(),
            participant_id: Some("p1".into()),
            day: Some(1),
            setting: Setting::Unsupervised,
            wear_location: WearLocation::BeltFront,
        }
    }

    #[test]
    fn fixed_pi_speed_values() {
        assert!((turn_speed(&turn(2.0)) - 1.570796).abs() < 1e-6);
        assert!((turn_speed(&turn(2.2)) - 1.427997).abs() < 1e-6);
        assert!((turn_speed(&turn(2.6)) - 1.208305).abs() < 1e-6);
    }

    #[test]
    fn speed_times_duration_is_pi() {
        for d in [0.31, 0.5, 1.7, 2.6, 9.99] {
            assert!((turn_speed_from_duration(d) * d - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn integrated_speed_uses_actual_angle() {
        let mut t = turn(2.0);
        t.angle = -2.8;
        assert!((integrated_speed(&t) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn test_median_midpoint_rule() {
        let r = summarize_test(&[turn(2.0), turn(2.0), turn(2.0)], meta());
        assert!((r.turn_speed_median.unwrap() - 1.570796).abs() < 1e-6);

        let r = summarize_test(&[turn(2.0), turn(4.0)], meta());
        assert!((r.turn_speed_median.unwrap() - 1.178097).abs() < 1e-6);
        assert!((r.turn_duration_median.unwrap() - 3.0).abs() < 1e-12);

        let r = summarize_test(&[], meta());
        assert_eq!(r.n_turns, 0);
        assert!(r.turn_speed_median.is_none());
    }

    #[test]
    fn participant_median_of_medians() {
        let tests: Vec<TestResult> = [1.2, 1.5, 1.4]
            .iter()
            .map(|&v| TestResult {
                meta: meta(),
                n_turns: 1,
                turn_speed_median: Some(v),
                turn_duration_median: Some(PI / v),
                per_turn: vec![],
            })
            .collect();
        let agg = aggregate_participant("p1", &tests).unwrap();
        assert_eq!(agg.aggregate, 1.4);
        assert_eq!(agg.values, vec![1.2, 1.5, 1.4]);
    }

    #[test]
    fn empty_tests_error() {
        let t = TestResult {
            meta: meta(),
            n_turns: 0,
            turn_speed_median: None,
            turn_duration_median: None,
            per_turn: vec![],
        };
        assert!(matches!(
            aggregate_participant("p1", &[t]),
            Err(MeasuresError::NoEligibleTests)
        ));
    }

    #[test]
    fn split_requires_2k_tests() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vals: Vec<f64> = (0..13).map(|i| i as f64).collect();
        assert!(matches!(
            split_medians(&vals, 7, SplitMode::Random, &mut rng),
            Err(MeasuresError::NotEnoughTests { have: 13, need: 14 })
        ));
    }

    #[test]
    fn split_is_seed_reproducible_and_disjoint() {
        let vals: Vec<f64> = (0..14).map(|i| i as f64 * 0.1).collect();
        let mut r1 = ChaCha8Rng::seed_from_u64(99);
        let mut r2 = ChaCha8Rng::seed_from_u64(99);
        let a = split_medians(&vals, 7, SplitMode::Random, &mut r1).unwrap();
        let b = split_medians(&vals, 7, SplitMode::Random, &mut r2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chronological_split_uses_first_2k() {
        let vals = [10.0, 20.0, 30.0, 40.0, 99.0];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, b) = split_medians(&vals, 2, SplitMode::Chronological, &mut rng).unwrap();
        assert_eq!((a, b), (15.0, 35.0));
    }

    #[test]
    fn random_split_partitions_disjointly() {
        // With all-distinct values the two medians can never coincide unless
        // the index sets are disjoint subsets of the same 2k draw.
        let vals: Vec<f64> = (0..14).map(|i| (i * i) as f64).collect();
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = split_medians(&vals, 7, SplitMode::Random, &mut rng).unwrap();
            assert_ne!(a, b);
            assert!(vals.iter().any(|&v| v <= a) && vals.iter().any(|&v| v >= b));
        }
    }
}
