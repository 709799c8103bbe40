//! Synthetic IMU sessions and cohorts with known ground truth.
//!
//! A session is a walk-turn-walk sequence: each turn is a raised-cosine
//! yaw-rate pulse whose continuous integral is exactly π (a half turn),
//! with alternating direction. Between turns a sinusoidal pelvis sway
//! rides on the vertical axis, faded out near each turn so the truth
//! annotations stay exact. Gravity is placed in a tilted sensor frame so
//! the vertical axis does not coincide with a sensor axis unless asked.
//!
//! Generation is pure: the same spec always produces bit-identical output.

use std::f64::consts::PI;

use rand::distributions::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{
    AnnotationSource, SensorSample, SensorStream, Setting, TurnAnnotation, WearLocation,
};
use crate::util::splitmix64;

const GRAVITY: f64 = 9.81;
/// Sway fade-in/out length on either side of a turn, seconds.
const SWAY_TAPER_S: f64 = 0.25;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("turn {index} duration {got} s is below the 0.1 s minimum")]
    TurnTooShort { index: usize, got: f64 },
    #[error("{what} must be positive")]
    NonPositive { what: &'static str },
    #[error("sample rate {rate_hz} Hz cannot represent sway at {freq_hz} Hz (needs rate > 2x frequency)")]
    SwayAboveNyquist { rate_hz: f64, freq_hz: f64 },
    #[error("per-turn durations: expected {expected}, got {got}")]
    DurationCountMismatch { expected: usize, got: usize },
    #[error("cohort needs at least one disability level")]
    NoLevels,
    #[error("level \"{level}\": {what}")]
    BadLevel { level: String, what: String },
    #[error("test count {count} exceeds the {days}-day monitoring window")]
    TestCountExceedsDays { count: u32, days: u32 },
}

// --------------------------------------------------------------------------
// Session generation
// --------------------------------------------------------------------------

/// Turn durations: one shared value or an explicit per-turn list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TurnDurations {
    Fixed(f64),
    PerTurn(Vec<f64>),
}

/// Recipe for one synthetic test session. Angular quantities are rad/s
/// except `tilt_deg`; noise SDs are rad/s (gyro) and m/s² (accelerometer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionSpec {
    pub session_id: String,
    pub participant_id: Option<String>,
    pub day: Option<u32>,
    /// Number of half turns; 0 makes a walking-only stream.
    pub n_turns: usize,
    pub turn_durations: TurnDurations,
    /// Straight-walking time before, between, and after turns.
    pub walk_bout_s: f64,
    /// Peak vertical angular rate of pelvis sway while walking.
    pub pelvis_osc_amp: f64,
    pub pelvis_osc_freq_hz: f64,
    pub gyro_noise_sd: f64,
    pub accel_noise_sd: f64,
    /// Sensor tilt about the forward axis; 0 puts gravity on +z.
    pub tilt_deg: f64,
    pub rate_hz: f64,
    pub seed: u64,
    pub wear_location: WearLocation,
    pub setting: Setting,
}

impl Default for SessionSpec {
    fn default() -> Self {
        SessionSpec {
            session_id: "synthetic".into(),
            participant_id: None,
            day: None,
            n_turns: 12,
            turn_durations: TurnDurations::Fixed(2.0),
            walk_bout_s: 2.5,
            pelvis_osc_amp: 15f64.to_radians(),
            pelvis_osc_freq_hz: 1.0,
            gyro_noise_sd: 0.0,
            accel_noise_sd: 0.0,
            tilt_deg: 0.0,
            rate_hz: 50.0,
            seed: 0,
            wear_location: WearLocation::BeltFront,
            setting: Setting::Unsupervised,
        }
    }
}

impl SessionSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.rate_hz > 0.0) {
            return Err(SynthError::NonPositive { what: "rate_hz" });
        }
        if !(self.walk_bout_s > 0.0) {
            return Err(SynthError::NonPositive { what: "walk_bout_s" });
        }
        if self.pelvis_osc_amp > 0.0 && self.rate_hz <= 2.0 * self.pelvis_osc_freq_hz {
            return Err(SynthError::SwayAboveNyquist {
                rate_hz: self.rate_hz,
                freq_hz: self.pelvis_osc_freq_hz,
            });
        }
        for (index, d) in self.resolved_durations()?.iter().enumerate() {
            if *d < 0.1 {
                return Err(SynthError::TurnTooShort { index, got: *d });
            }
        }
        Ok(())
    }

    /// Per-turn durations, expanding a fixed value to `n_turns` entries.
    pub fn resolved_durations(&self) -> Result<Vec<f64>, SynthError> {
        match &self.turn_durations {
            TurnDurations::Fixed(d) => Ok(vec![*d; self.n_turns]),
            TurnDurations::PerTurn(list) => {
                if list.len() != self.n_turns {
                    return Err(SynthError::DurationCountMismatch {
                        expected: self.n_turns,
                        got: list.len(),
                    });
                }
                Ok(list.clone())
            }
        }
    }
}

/// Raised-cosine fade from 0 at the support edge to 1 at `SWAY_TAPER_S`.
fn sway_envelope(dist: f64) -> f64 {
    if dist <= 0.0 {
        0.0
    } else if dist >= SWAY_TAPER_S {
        1.0
    } else {
        0.5 * (1.0 - (PI * dist / SWAY_TAPER_S).cos())
    }
}

/// Generates a session stream together with its exact truth annotations.
///
/// Turn k occupies [walk + Σ earlier, …], alternating left/right starting
/// left; its yaw-rate pulse (π/d)·(1 − cos(2πτ/d)) integrates to exactly π
/// in continuous time and vanishes at both edges. Truth annotations are
/// the exact pulse supports, so they never overlap.
pub fn generate_session(
    spec: &SessionSpec,
) -> Result<(SensorStream, Vec<TurnAnnotation>), SynthError> {
    spec.validate()?;
    let durations = spec.resolved_durations()?;
    let dt = 1.0 / spec.rate_hz;

    let mut supports = Vec::with_capacity(durations.len());
    let mut cursor = spec.walk_bout_s;
    for d in &durations {
        supports.push((cursor, cursor + d));
        cursor += d + spec.walk_bout_s;
    }
    let span = cursor; // ends with a trailing walking bout
    let n_samples = (span * spec.rate_hz + 1e-9).floor() as usize + 1;

    let tilt = spec.tilt_deg.to_radians();
    let axis = [0.0, tilt.sin(), tilt.cos()]; // unit vertical in sensor frame

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gyro_noise = (spec.gyro_noise_sd > 0.0)
        .then(|| Normal::new(0.0, spec.gyro_noise_sd).expect("finite sd"));
    let accel_noise = (spec.accel_noise_sd > 0.0)
        .then(|| Normal::new(0.0, spec.accel_noise_sd).expect("finite sd"));

    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let t = i as f64 * dt;

        let mut pulse = 0.0;
        let mut dist = f64::INFINITY;
        for (k, &(s, e)) in supports.iter().enumerate() {
            if t >= s && t <= e {
                let d = e - s;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                pulse = sign * (PI / d) * (1.0 - (2.0 * PI * (t - s) / d).cos());
                dist = 0.0;
                break;
            }
            dist = dist.min(if t < s { s - t } else { t - e });
        }
        let sway = sway_envelope(dist)
            * spec.pelvis_osc_amp
            * (2.0 * PI * spec.pelvis_osc_freq_hz * t).sin();
        let omega = pulse + sway;

        let mut gyro = [axis[0] * omega, axis[1] * omega, axis[2] * omega];
        let mut accel = [axis[0] * GRAVITY, axis[1] * GRAVITY, axis[2] * GRAVITY];
        if let Some(n) = gyro_noise {
            for g in &mut gyro {
                *g += n.sample(&mut rng);
            }
        }
        if let Some(n) = accel_noise {
            for a in &mut accel {
                *a += n.sample(&mut rng);
            }
        }
        samples.push(SensorSample { t, accel, gyro, mag: None });
    }

    let stream = SensorStream {
        session_id: spec.session_id.clone(),
        participant_id: spec.participant_id.clone(),
        day: spec.day,
        setting: spec.setting,
        wear_location: spec.wear_location,
        nominal_rate: spec.rate_hz,
        samples,
    };
    let annotations = supports
        .iter()
        .map(|&(start_s, end_s)| TurnAnnotation {
            start_s,
            end_s,
            source: AnnotationSource::SyntheticTruth,
        })
        .collect();
    Ok((stream, annotations))
}

// --------------------------------------------------------------------------
// Cohort generation
// --------------------------------------------------------------------------

/// One stratum of simulated walking disability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisabilityLevel {
    pub name: String,
    /// Relative share of the cohort.
    pub weight: f64,
    /// Population mean half-turn duration, seconds.
    pub mean_turn_duration_s: f64,
    /// Between-participant SD of the personal mean duration.
    pub between_sd_s: f64,
    /// Within-participant test-to-test SD of duration.
    pub within_sd_s: f64,
    /// Disability score range (half-step scale), inclusive.
    pub edss_range: (f64, f64),
    pub fall_prob: f64,
    pub walking_aid_prob: f64,
    /// (tests completed, weight) over the monitoring window.
    pub test_count_weights: Vec<(u32, f64)>,
}

/// Adherence profile: most participants complete nearly all tests, a tail
/// completes only a few. Mean ≈ 11.5 tests over two weeks.
pub fn default_test_count_weights() -> Vec<(u32, f64)> {
    vec![
        (2, 1.0),
        (3, 1.0),
        (4, 2.0),
        (5, 2.0),
        (6, 2.5),
        (7, 2.5),
        (8, 4.0),
        (9, 4.0),
        (10, 5.0),
        (11, 5.0),
        (12, 18.0),
        (13, 18.0),
        (14, 26.0),
    ]
}

/// Mild / moderate / severe strata with slower turning and higher fall and
/// aid rates as disability increases.
pub fn default_levels() -> Vec<DisabilityLevel> {
    let weights = default_test_count_weights();
    vec![
        DisabilityLevel {
            name: "mild".into(),
            weight: 23.0,
            mean_turn_duration_s: 1.8,
            between_sd_s: 0.25,
            within_sd_s: 0.15,
            edss_range: (0.0, 3.5),
            fall_prob: 0.10,
            walking_aid_prob: 0.02,
            test_count_weights: weights.clone(),
        },
        DisabilityLevel {
            name: "moderate".into(),
            weight: 35.0,
            mean_turn_duration_s: 2.4,
            between_sd_s: 0.30,
            within_sd_s: 0.20,
            edss_range: (4.0, 5.5),
            fall_prob: 0.35,
            walking_aid_prob: 0.30,
            test_count_weights: weights.clone(),
        },
        DisabilityLevel {
            name: "severe".into(),
            weight: 38.0,
            mean_turn_duration_s: 3.2,
            between_sd_s: 0.40,
            within_sd_s: 0.25,
            edss_range: (6.0, 6.5),
            fall_prob: 0.60,
            walking_aid_prob: 0.80,
            test_count_weights: weights,
        },
    ]
}

/// Recipe for a monitored cohort: who the participants are and how their
/// unsupervised tests are scheduled and shaped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortSpec {
    pub n_participants: usize,
    /// Monitoring window length; test days are distinct within it.
    pub days: u32,
    pub turns_per_test: usize,
    pub levels: Vec<DisabilityLevel>,
    /// Test-to-test SD of per-turn duration around the test mean.
    pub turn_jitter_sd_s: f64,
    /// Per-test sensor tilt SD (degrees), clamped to ±25.
    pub tilt_sd_deg: f64,
    pub walk_bout_s: f64,
    pub pelvis_osc_amp: f64,
    pub pelvis_osc_freq_hz: f64,
    pub gyro_noise_sd: f64,
    pub accel_noise_sd: f64,
    pub rate_hz: f64,
    pub seed: u64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            n_participants: 91,
            days: 14,
            turns_per_test: 12,
            levels: default_levels(),
            turn_jitter_sd_s: 0.05,
            tilt_sd_deg: 8.0,
            walk_bout_s: 2.5,
            pelvis_osc_amp: 15f64.to_radians(),
            pelvis_osc_freq_hz: 1.0,
            gyro_noise_sd: 0.02,
            accel_noise_sd: 0.05,
            rate_hz: 50.0,
            seed: 0,
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_participants == 0 {
            return Err(SynthError::NonPositive { what: "n_participants" });
        }
        if self.days == 0 {
            return Err(SynthError::NonPositive { what: "days" });
        }
        if self.turns_per_test == 0 {
            return Err(SynthError::NonPositive { what: "turns_per_test" });
        }
        if self.levels.is_empty() {
            return Err(SynthError::NoLevels);
        }
        for level in &self.levels {
            let bad = |what: &str| SynthError::BadLevel {
                level: level.name.clone(),
                what: what.into(),
            };
            if !(level.weight > 0.0) {
                return Err(bad("weight must be positive"));
            }
            if !(level.mean_turn_duration_s > 0.0) {
                return Err(bad("mean_turn_duration_s must be positive"));
            }
            if level.test_count_weights.is_empty() {
                return Err(bad("test_count_weights must be non-empty"));
            }
            for &(count, w) in &level.test_count_weights {
                if count == 0 || !(w >= 0.0) {
                    return Err(bad("test counts must be >= 1 with non-negative weights"));
                }
                if count > self.days {
                    return Err(SynthError::TestCountExceedsDays { count, days: self.days });
                }
            }
        }
        Ok(())
    }
}

/// Ground-truth facts about one simulated participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantRecord {
    pub participant_id: String,
    pub level: String,
    /// Disability score on a 0-10 half-step scale.
    pub edss_proxy: f64,
    pub fall_last_year: bool,
    pub walking_aid: bool,
    /// Personal mean half-turn duration, seconds.
    pub mean_turn_duration_s: f64,
}

/// A generated cohort: participant ground truth plus one session spec per
/// completed test. Streams are not materialized here; feed each spec to
/// [`generate_session`] so only one session needs to be in memory at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortData {
    pub participants: Vec<ParticipantRecord>,
    pub sessions: Vec<SessionSpec>,
}

/// Splits `n` participants across levels proportionally to their weights
/// (largest-remainder rounding, so the counts are exact and deterministic).
fn allocate_levels(levels: &[DisabilityLevel], n: usize) -> Vec<usize> {
    let total: f64 = levels.iter().map(|l| l.weight).sum();
    let exact: Vec<f64> = levels.iter().map(|l| l.weight / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(n - assigned) {
        counts[i] += 1;
    }
    counts
}

/// Generates the participant roster and per-test session specs for a
/// monitored cohort.
///
/// Every random quantity derives from `spec.seed` through per-participant
/// generators, so cohorts are reproducible and editing one participant's
/// draws cannot shift another's.
pub fn generate_cohort(spec: &CohortSpec) -> Result<CohortData, SynthError> {
    spec.validate()?;
    let counts = allocate_levels(&spec.levels, spec.n_participants);

    let mut participants = Vec::with_capacity(spec.n_participants);
    let mut sessions = Vec::new();
    let mut pidx: u64 = 0;

    for (level, &count) in spec.levels.iter().zip(&counts) {
        let count_dist = WeightedIndex::new(
            level.test_count_weights.iter().map(|&(_, w)| w),
        )
        .map_err(|e| SynthError::BadLevel {
            level: level.name.clone(),
            what: e.to_string(),
        })?;
        let theta_dist = Normal::new(level.mean_turn_duration_s, level.between_sd_s)
            .expect("finite sd");

        for _ in 0..count {
            let participant_id = format!("p{pidx:03}");
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(spec.seed ^ pidx));

            let theta = theta_dist.sample(&mut rng).clamp(0.8, 6.0);
            let edss_raw = rng.gen_range(level.edss_range.0..=level.edss_range.1);
            let edss_proxy = (edss_raw * 2.0).round() / 2.0;
            let fall_last_year = rng.gen_bool(level.fall_prob);
            let walking_aid = rng.gen_bool(level.walking_aid_prob);

            let n_tests = level.test_count_weights[count_dist.sample(&mut rng)].0;
            let mut days: Vec<u32> = (1..=spec.days).collect();
            for slot in 0..n_tests as usize {
                let j = rng.gen_range(slot..days.len());
                days.swap(slot, j);
            }
            days.truncate(n_tests as usize);
            days.sort_unstable();

            let within = Normal::new(0.0, level.within_sd_s).expect("finite sd");
            let jitter = Normal::new(0.0, spec.turn_jitter_sd_s).expect("finite sd");
            let tilt = Normal::new(0.0, spec.tilt_sd_deg).expect("finite sd");
            for day in days {
                let test_duration = (theta + within.sample(&mut rng)).clamp(0.7, 7.0);
                let durations: Vec<f64> = (0..spec.turns_per_test)
                    .map(|_| (test_duration + jitter.sample(&mut rng)).max(0.1))
                    .collect();
                let tilt_deg = tilt.sample(&mut rng).clamp(-25.0, 25.0);
                sessions.push(SessionSpec {
                    session_id: format!("{participant_id}-d{day:02}"),
                    participant_id: Some(participant_id.clone()),
                    day: Some(day),
                    n_turns: spec.turns_per_test,
                    turn_durations: TurnDurations::PerTurn(durations),
                    walk_bout_s: spec.walk_bout_s,
                    pelvis_osc_amp: spec.pelvis_osc_amp,
                    pelvis_osc_freq_hz: spec.pelvis_osc_freq_hz,
                    gyro_noise_sd: spec.gyro_noise_sd,
                    accel_noise_sd: spec.accel_noise_sd,
                    tilt_deg,
                    rate_hz: spec.rate_hz,
                    seed: splitmix64(splitmix64(spec.seed ^ pidx) ^ day as u64),
                    wear_location: WearLocation::BeltFront,
                    setting: Setting::Unsupervised,
                });
            }

            participants.push(ParticipantRecord {
                participant_id,
                level: level.name.clone(),
                edss_proxy,
                fall_last_year,
                walking_aid,
                mean_turn_duration_s: theta,
            });
            pidx += 1;
        }
    }
    Ok(CohortData { participants, sessions })
}

/// CSV export of participant ground truth (booleans as 0/1).
pub fn covariates_to_csv(participants: &[ParticipantRecord]) -> String {
    let mut out = String::from("participant_id,level,edss_proxy,fall_last_year,walking_aid,mean_turn_duration_s\n");
    for p in participants {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.participant_id,
            p.level,
            p.edss_proxy,
            u8::from(p.fall_last_year),
            u8::from(p.walking_aid),
            p.mean_turn_duration_s,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{detect_turns, DetectorConfig};
    use crate::matching::{classify_turns, score};
    use crate::stats::spearman;
    use crate::util::median;

    fn quiet_spec(n_turns: usize) -> SessionSpec {
        SessionSpec {
            n_turns,
            pelvis_osc_amp: 0.0,
            ..SessionSpec::default()
        }
    }

    /// Trapezoid integral of the vertical-axis rate over [start, end].
    fn integral(stream: &SensorStream, axis: [f64; 3], start: f64, end: f64) -> f64 {
        let dt = 1.0 / stream.nominal_rate;
        let mut sum = 0.0;
        let s = &stream.samples;
        for i in 1..s.len() {
            if s[i].t <= start || s[i - 1].t >= end {
                continue;
            }
            let a = crate::util::dot3(s[i - 1].gyro, axis);
            let b = crate::util::dot3(s[i].gyro, axis);
            sum += 0.5 * (a + b) * dt;
        }
        sum
    }

    #[test]
    fn pulses_integrate_to_half_turns() {
        let (stream, anns) = generate_session(&quiet_spec(3)).unwrap();
        assert_eq!(anns.len(), 3);
        for (k, a) in anns.iter().enumerate() {
            let angle = integral(&stream, [0.0, 0.0, 1.0], a.start_s, a.end_s);
            let expected = if k % 2 == 0 { PI } else { -PI };
            assert!(
                (angle - expected).abs() < 1e-9,
                "turn {k}: integral {angle} vs {expected}"
            );
        }
    }

    #[test]
    fn annotations_are_sorted_and_disjoint() {
        let spec = SessionSpec {
            turn_durations: TurnDurations::PerTurn(vec![1.5, 2.0, 3.0, 0.9]),
            n_turns: 4,
            ..SessionSpec::default()
        };
        let (_, anns) = generate_session(&spec).unwrap();
        for w in anns.windows(2) {
            assert!(w[1].start_s - w[0].end_s >= spec.walk_bout_s - 1e-9);
        }
        assert!((anns[0].start_s - 2.5).abs() < 1e-12);
        assert!((anns[0].end_s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SessionSpec {
            gyro_noise_sd: 0.02,
            accel_noise_sd: 0.05,
            tilt_deg: 12.0,
            seed: 77,
            ..SessionSpec::default()
        };
        let a = generate_session(&spec).unwrap();
        let b = generate_session(&spec).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        let c = generate_session(&SessionSpec { seed: 78, ..spec }).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn walking_only_stream_has_no_turns() {
        let spec = SessionSpec {
            n_turns: 0,
            walk_bout_s: 30.0,
            ..SessionSpec::default()
        };
        let (stream, anns) = generate_session(&spec).unwrap();
        assert!(anns.is_empty());
        assert!((stream.span() - 30.0).abs() < 0.03);
        let max_rate = stream
            .samples
            .iter()
            .map(|s| s.gyro[2].abs())
            .fold(0.0, f64::max);
        assert!(max_rate <= spec.pelvis_osc_amp + 1e-9);
        let turns = detect_turns(&stream, &DetectorConfig::default()).unwrap();
        assert!(turns.is_empty());
    }

    #[test]
    fn tilt_moves_gravity_without_changing_its_magnitude() {
        let spec = SessionSpec {
            tilt_deg: 25.0,
            ..quiet_spec(1)
        };
        let (stream, _) = generate_session(&spec).unwrap();
        let s = &stream.samples[10];
        assert!((crate::util::norm3(s.accel) - GRAVITY).abs() < 1e-9);
        assert!(s.accel[1] > 1.0, "tilt should load the y axis");
    }

    #[test]
    fn detector_recovers_every_synthetic_turn() {
        let spec = SessionSpec {
            gyro_noise_sd: 0.02,
            accel_noise_sd: 0.05,
            tilt_deg: -18.0,
            seed: 5,
            ..SessionSpec::default()
        };
        let (stream, truth) = generate_session(&spec).unwrap();
        let turns = detect_turns(&stream, &DetectorConfig::default()).unwrap();
        let detected: Vec<_> = turns.iter().map(|t| t.annotation()).collect();
        let outcomes = classify_turns(&detected, &truth, 0.2).unwrap();
        let s = score(&outcomes).unwrap();
        assert_eq!((s.tp, s.fp, s.fn_count), (12, 0, 0));
        assert!(s.mean_overlap_pct.unwrap() > 80.0);
    }

    #[test]
    fn spec_validation_catches_bad_inputs() {
        let too_short = SessionSpec {
            turn_durations: TurnDurations::Fixed(0.05),
            ..SessionSpec::default()
        };
        assert!(matches!(
            generate_session(&too_short),
            Err(SynthError::TurnTooShort { index: 0, .. })
        ));
        let aliased = SessionSpec {
            rate_hz: 1.8,
            pelvis_osc_freq_hz: 1.0,
            ..SessionSpec::default()
        };
        assert!(matches!(
            generate_session(&aliased),
            Err(SynthError::SwayAboveNyquist { .. })
        ));
        let mismatched = SessionSpec {
            n_turns: 3,
            turn_durations: TurnDurations::PerTurn(vec![2.0, 2.0]),
            ..SessionSpec::default()
        };
        assert!(matches!(
            generate_session(&mismatched),
            Err(SynthError::DurationCountMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn cohort_allocation_is_exact() {
        // weights 23/35/38 are shares out of 96; for 91 participants the
        // largest-remainder split is 22/33/36
        let data = generate_cohort(&CohortSpec::default()).unwrap();
        assert_eq!(data.participants.len(), 91);
        let count = |d: &CohortData, name: &str| {
            d.participants.iter().filter(|p| p.level == name).count()
        };
        assert_eq!(count(&data, "mild"), 22);
        assert_eq!(count(&data, "moderate"), 33);
        assert_eq!(count(&data, "severe"), 36);
        let full = generate_cohort(&CohortSpec { n_participants: 96, ..CohortSpec::default() })
            .unwrap();
        assert_eq!(count(&full, "mild"), 23);
        assert_eq!(count(&full, "moderate"), 35);
        assert_eq!(count(&full, "severe"), 38);
    }

    #[test]
    fn cohort_test_schedule_is_plausible() {
        let data = generate_cohort(&CohortSpec::default()).unwrap();
        let mut per_participant = std::collections::HashMap::new();
        for s in &data.sessions {
            let entry = per_participant
                .entry(s.participant_id.clone().unwrap())
                .or_insert_with(Vec::new);
            entry.push(s.day.unwrap());
        }
        assert_eq!(per_participant.len(), 91);
        let mut counts = Vec::new();
        for days in per_participant.values() {
            let mut sorted = days.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), days.len(), "test days must be distinct");
            assert!(*sorted.last().unwrap() <= 14);
            assert!((2..=14).contains(&(days.len() as u32)));
            counts.push(days.len() as f64);
        }
        let mean_tests = crate::util::mean(&counts);
        assert!(
            (10.9..=12.2).contains(&mean_tests),
            "mean tests per participant {mean_tests}"
        );
    }

    #[test]
    fn cohort_levels_separate_in_speed() {
        let data = generate_cohort(&CohortSpec::default()).unwrap();
        let level_of: std::collections::HashMap<_, _> = data
            .participants
            .iter()
            .map(|p| (p.participant_id.clone(), p.level.clone()))
            .collect();
        let mut speeds: std::collections::HashMap<&str, Vec<f64>> = Default::default();
        for s in &data.sessions {
            let durations = s.resolved_durations().unwrap();
            let med = median(&durations).unwrap();
            let level = &level_of[s.participant_id.as_ref().unwrap()];
            speeds.entry(level.as_str()).or_default().push(PI / med);
        }
        let med = |name: &str| median(&speeds[name]).unwrap();
        let (mild, moderate, severe) = (med("mild"), med("moderate"), med("severe"));
        assert!(mild > moderate && moderate > severe);
        assert!((mild - PI / 1.8).abs() < 0.2, "mild median {mild}");
        assert!((moderate - PI / 2.4).abs() < 0.2, "moderate median {moderate}");
        assert!((severe - PI / 3.2).abs() < 0.2, "severe median {severe}");
    }

    #[test]
    fn cohort_speed_tracks_disability() {
        let data = generate_cohort(&CohortSpec::default()).unwrap();
        let speeds: Vec<f64> = data
            .participants
            .iter()
            .map(|p| PI / p.mean_turn_duration_s)
            .collect();
        let edss: Vec<f64> = data.participants.iter().map(|p| p.edss_proxy).collect();
        let rho = spearman(&speeds, &edss).unwrap();
        assert!(rho < -0.6, "rho = {rho}");
    }

    #[test]
    fn single_level_cohort_decouples_speed_from_disability() {
        let spec = CohortSpec {
            n_participants: 60,
            levels: vec![default_levels().remove(1)],
            seed: 9,
            ..CohortSpec::default()
        };
        let data = generate_cohort(&spec).unwrap();
        let speeds: Vec<f64> = data
            .participants
            .iter()
            .map(|p| PI / p.mean_turn_duration_s)
            .collect();
        let edss: Vec<f64> = data.participants.iter().map(|p| p.edss_proxy).collect();
        let rho = spearman(&speeds, &edss).unwrap();
        assert!(rho.abs() < 0.3, "rho = {rho}");
    }

    #[test]
    fn cohort_is_deterministic() {
        let a = generate_cohort(&CohortSpec::default()).unwrap();
        let b = generate_cohort(&CohortSpec::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cohort_validation() {
        let empty = CohortSpec { levels: vec![], ..CohortSpec::default() };
        assert!(matches!(generate_cohort(&empty), Err(SynthError::NoLevels)));
        let mut bad_days = CohortSpec::default();
        bad_days.days = 7; // default counts go up to 14
        assert!(matches!(
            generate_cohort(&bad_days),
            Err(SynthError::TestCountExceedsDays { .. })
        ));
    }

    #[test]
    fn covariate_csv_shape() {
        let data = generate_cohort(&CohortSpec {
            n_participants: 3,
            ..CohortSpec::default()
        })
        .unwrap();
        let csv = covariates_to_csv(&data.participants);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("participant_id,level,edss_proxy"));
        assert_eq!(lines[1].split(',').count(), 6);
    }
}
