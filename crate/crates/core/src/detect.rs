//! U-turn segmentation from the vertical rotational rate.
//!
//! Pipeline:
//! 1. estimate the gravity direction by low-pass filtering the
//!    accelerometer (0.25 Hz) and normalising;
//! 2. project the gyroscope onto gravity to get the yaw rate, then low-pass
//!    it at `filter_cutoff` (zero-phase 4th-order Butterworth);
//! 3. find maximal intervals with |yaw| ≥ `rate_threshold` and expand each
//!    outward while |yaw| ≥ `end_threshold` (hysteresis);
//! 4. merge same-direction intervals separated by less than `merge_gap`;
//! 5. accept an interval as a turn when the trapezoidal angle reaches
//!    `min_angle`, the rotation dwell time reaches `min_duration`, and the
//!    interval is no longer than `max_duration`.
//!
//! The minimum-duration gate measures dwell: the time the *unfiltered* yaw
//! rate stays at or above `end_threshold` inside the interval. The
//! zero-phase filter spreads a brief spin over more than a second, so the
//! interval span cannot distinguish a 0.4 s spin from a genuine short turn;
//! the raw dwell can. Boundaries, angle, and the maximum-duration cap all
//! use the filtered series, consistent with the thresholding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{butterworth4_lowpass, filtfilt};
use crate::ingest::{SensorStream, TurnAnnotation, TurnDirection};
use crate::util::dot3;

/// Cutoff for the gravity-direction estimate. U-turn trunk motion sits well
/// above this band, so the low-passed accelerometer tracks gravity.
const GRAVITY_CUTOFF_HZ: f64 = 0.25;

// --------------------------------------------------------------------------
// Types
// --------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error("stream is not uniformly sampled at its nominal rate; resample first")]
    NonUniform,
    #[error("stream quality: free-fall accelerometer window (|a| < 1 m/s²) starting at t = {at:.2} s")]
    FreeFall { at: f64 },
    #[error("stream quality: gravity direction indeterminate at t = {at:.2} s")]
    GravityIndeterminate { at: f64 },
    #[error("filter cutoff {cutoff} Hz must be below the Nyquist rate {nyquist} Hz")]
    CutoffAboveNyquist { cutoff: f64, nyquist: f64 },
}

/// Detector thresholds. Defaults follow the modified turn detector:
/// a 20 deg/s trigger (raised from the original 5 deg/s to suppress pelvis
/// and leg-swing artifacts) with 5 deg/s hysteresis boundaries, a 90°
/// minimum angle, and a 0.5–10 s duration window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// Trigger threshold, rad/s (default 20 deg/s).
    pub rate_threshold: f64,
    /// Boundary-expansion threshold, rad/s (default 5 deg/s).
    pub end_threshold: f64,
    /// Minimum |integrated angle|, rad (default π/2).
    pub min_angle: f64,
    /// Minimum rotation dwell time, s (default 0.5).
    pub min_duration: f64,
    /// Maximum interval span, s (default 10).
    pub max_duration: f64,
    /// Same-direction fragments closer than this merge, s (default 0.2).
    pub merge_gap: f64,
    /// Yaw-rate low-pass cutoff, Hz (default 1.5).
    pub filter_cutoff: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            rate_threshold: 20.0_f64.to_radians(),
            end_threshold: 5.0_f64.to_radians(),
            min_angle: std::f64::consts::FRAC_PI_2,
            min_duration: 0.5,
            max_duration: 10.0,
            merge_gap: 0.2,
            filter_cutoff: 1.5,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectError> {
        let bad = |msg: &str| Err(DetectError::InvalidConfig(msg.into()));
        if !(self.end_threshold > 0.0 && self.end_threshold <= self.rate_threshold) {
            return bad("require 0 < end_threshold <= rate_threshold");
        }
        if !(self.min_duration > 0.0 && self.min_duration < self.max_duration) {
            return bad("require 0 < min_duration < max_duration");
        }
        if self.min_angle <= 0.0 {
            return bad("require min_angle > 0");
        }
        if self.filter_cutoff <= 0.0 {
            return bad("require filter_cutoff > 0");
        }
        if self.merge_gap < 0.0 {
            return bad("require merge_gap >= 0");
        }
        Ok(())
    }
}

/// One detected turn bout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub start_s: f64,
    pub end_s: f64,
    /// Interval span, end − start.
    pub duration: f64,
    /// Signed integrated angle, rad; positive = left by the right-hand rule
    /// about gravity-up.
    pub angle: f64,
    pub direction: TurnDirection,
    /// Largest |yaw rate| inside the interval, rad/s.
    pub peak_rate: f64,
}

impl Turn {
    pub fn annotation(&self) -> TurnAnnotation {
        TurnAnnotation {
            start_s: self.start_s,
            end_s: self.end_s,
            source: crate::ingest::AnnotationSource::Detector,
        }
    }
}

/// Yaw rate about the gravity axis on a uniform time grid, low-pass
/// filtered at the detector cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct YawRateSeries {
    pub t: Vec<f64>,
    pub omega_v: Vec<f64>,
}

// --------------------------------------------------------------------------
// Vertical-rate estimation
// --------------------------------------------------------------------------

/// Projects the gyroscope onto the low-passed accelerometer direction.
/// Returns the unfiltered yaw-rate sequence.
fn project_vertical(stream: &SensorStream) -> Result<Vec<f64>, DetectError> {
    let rate = stream.nominal_rate;
    // Free-fall guard: any contiguous run with |accel| < 1 m/s² lasting a
    // second or more means the gravity estimate is meaningless.
    let dt = 1.0 / rate;
    let mut run_start: Option<usize> = None;
    for (i, s) in stream.samples.iter().enumerate() {
        let mag = crate::util::norm3(s.accel);
        if mag < 1.0 {
            let s0 = *run_start.get_or_insert(i);
            if (i - s0) as f64 * dt >= 1.0 {
                return Err(DetectError::FreeFall {
                    at: stream.samples[s0].t,
                });
            }
        } else {
            run_start = None;
        }
    }

    let n = stream.samples.len();
    let sections = butterworth4_lowpass(GRAVITY_CUTOFF_HZ, rate);
    let mut grav = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for axis in 0..3 {
        let channel: Vec<f64> = stream.samples.iter().map(|s| s.accel[axis]).collect();
        grav[axis] = filtfilt(&sections, &channel);
    }
    let mut omega = Vec::with_capacity(n);
    for (i, s) in stream.samples.iter().enumerate() {
        let g = [grav[0][i], grav[1][i], grav[2][i]];
        let unit = crate::ingest::unit3(g).ok_or(DetectError::GravityIndeterminate {
            at: stream.samples[i].t,
        })?;
        omega.push(dot3(s.gyro, unit));
    }
    Ok(omega)
}

/// Estimates the low-pass-filtered rotational rate about the vertical
/// (gravity-aligned) axis.
///
/// Requires a uniformly sampled stream (see
/// [`crate::ingest::resample_uniform`]).
pub fn estimate_vertical_rate(
    stream: &SensorStream,
    config: &DetectorConfig,
) -> Result<YawRateSeries, DetectError> {
    config.validate()?;
    check_uniform(stream, config)?;
    let raw = project_vertical(stream)?;
    let sections = butterworth4_lowpass(config.filter_cutoff, stream.nominal_rate);
    Ok(YawRateSeries {
        t: stream.samples.iter().map(|s| s.t).collect(),
        omega_v: filtfilt(&sections, &raw),
    })
}

fn check_uniform(stream: &SensorStream, config: &DetectorConfig) -> Result<(), DetectError> {
    let nyquist = stream.nominal_rate / 2.0;
    if config.filter_cutoff >= nyquist {
        return Err(DetectError::CutoffAboveNyquist {
            cutoff: config.filter_cutoff,
            nyquist,
        });
    }
    if !stream.is_uniform_at(stream.nominal_rate) {
        return Err(DetectError::NonUniform);
    }
    Ok(())
}

// --------------------------------------------------------------------------
// Turn segmentation
// --------------------------------------------------------------------------

/// Detects U-turn bouts in a uniformly sampled stream.
///
/// Streams shorter than `min_duration` contain no detectable turn and yield
/// an empty result. Errors are stream-quality problems only.
pub fn detect_turns(
    stream: &SensorStream,
    config: &DetectorConfig,
) -> Result<Vec<Turn>, DetectError> {
    config.validate()?;
    check_uniform(stream, config)?;
    if stream.span() < config.min_duration {
        return Ok(Vec::new());
    }

    let rate = stream.nominal_rate;
    let dt = 1.0 / rate;
    let raw = project_vertical(stream)?;
    let sections = butterworth4_lowpass(config.filter_cutoff, rate);
    let w = filtfilt(&sections, &raw);
    let n = w.len();

    // (1) maximal trigger runs
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if w[i].abs() >= config.rate_threshold {
            let mut j = i;
            while j + 1 < n && w[j + 1].abs() >= config.rate_threshold {
                j += 1;
            }
            runs.push((i, j));
            i = j + 1;
        } else {
            i += 1;
        }
    }

    // (2) hysteresis expansion; runs inside one contiguous above-end region
    // expand to the same interval, so deduplicate
    let mut intervals: Vec<(usize, usize)> = Vec::new();
    for (ri, rj) in runs {
        let mut a = ri;
        while a > 0 && w[a - 1].abs() >= config.end_threshold {
            a -= 1;
        }
        let mut b = rj;
        while b + 1 < n && w[b + 1].abs() >= config.end_threshold {
            b += 1;
        }
        if intervals.last() != Some(&(a, b)) {
            intervals.push((a, b));
        }
    }

    // (3) merge same-direction neighbours separated by < merge_gap
    let trapz = |a: usize, b: usize| -> f64 {
        (a..b).map(|k| (w[k] + w[k + 1]) * 0.5 * dt).sum()
    };
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (a, b) in intervals {
        if let Some(&(pa, pb)) = merged.last() {
            let gap = (a - pb) as f64 * dt;
            if gap < config.merge_gap
                && trapz(pa, pb).signum() == trapz(a, b).signum()
            {
                *merged.last_mut().unwrap() = (pa, b);
                continue;
            }
        }
        merged.push((a, b));
    }

    // (4) gates
    let mut turns = Vec::new();
    for (a, b) in merged {
        let angle = trapz(a, b);
        let span = (b - a) as f64 * dt;
        let dwell = raw[a..=b]
            .iter()
            .filter(|v| v.abs() >= config.end_threshold)
            .count() as f64
            * dt;
        let peak = w[a..=b].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let accepted = angle.abs() >= config.min_angle
            && dwell >= config.min_duration
            && span <= config.max_duration
            && peak >= config.rate_threshold;
        if accepted {
            turns.push(Turn {
                start_s: stream.samples[a].t,
                end_s: stream.samples[b].t,
                duration: span,
                angle,
                direction: if angle > 0.0 {
                    TurnDirection::Left
                } else {
                    TurnDirection::Right
                },
                peak_rate: peak,
            });
        }
    }
    Ok(turns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{SensorSample, Setting, WearLocation};
    use std::f64::consts::PI;

    const RATE: f64 = 50.0;

    /// Rotation about x by `deg`, applied to a z-aligned vector.
    fn tilt_frame(deg: f64, z: f64) -> [f64; 3] {
        let th = deg.to_radians();
        [0.0, z * th.sin(), z * th.cos()]
    }

    /// Builds a uniform stream from a yaw-rate profile, in a phone frame
    /// statically tilted about x.
    fn stream_from_yaw(yaw: &[f64], tilt_deg: f64) -> SensorStream {
        let samples = yaw
            .iter()
            .enumerate()
            .map(|(i, &wz)| SensorSample {
                t: i as f64 / RATE,
                accel: tilt_frame(tilt_deg, 9.81),
                gyro: tilt_frame(tilt_deg, wz),
                mag: None,
            })
            .collect();
        SensorStream {
            session_id: "test".into(),
            participant_id: None,
            day: None,
            setting: Setting::Supervised,
            wear_location: WearLocation::BeltFront,
            nominal_rate: RATE,
            samples,
        }
    }

    /// Raised-cosine pulse over [t0, t0+dur] integrating to `angle`.
    fn add_pulse(yaw: &mut [f64], t0: f64, dur: f64, angle: f64) {
        let amp = 2.0 * angle / dur;
        for (i, v) in yaw.iter_mut().enumerate() {
            let t = i as f64 / RATE;
            if t >= t0 && t <= t0 + dur {
                *v += amp * 0.5 * (1.0 - (2.0 * PI * (t - t0) / dur).cos());
            }
        }
    }

    fn quiet(seconds: f64) -> Vec<f64> {
        vec![0.0; (seconds * RATE) as usize + 1]
    }

    #[test]
    fn steady_rotation_flat_phone() {
        let yaw = vec![0.8; 500];
        let s = stream_from_yaw(&yaw, 0.0);
        let series = estimate_vertical_rate(&s, &DetectorConfig::default()).unwrap();
        for v in series.omega_v {
            assert!((v - 0.8).abs() < 1e-9, "omega_v {v}");
        }
    }

    #[test]
    fn steady_rotation_phone_on_its_side() {
        // 90° about x: gravity and rotation both along phone +y
        let yaw = vec![0.6; 500];
        let s = stream_from_yaw(&yaw, 90.0);
        assert!((s.samples[0].accel[1] - 9.81).abs() < 1e-12);
        let series = estimate_vertical_rate(&s, &DetectorConfig::default()).unwrap();
        for v in series.omega_v {
            assert!((v - 0.6).abs() < 1e-9);
        }
    }

    #[test]
    fn tilt_30_recovers_world_vertical_rate() {
        let yaw = vec![1.0; 500];
        let s = stream_from_yaw(&yaw, 30.0);
        let series = estimate_vertical_rate(&s, &DetectorConfig::default()).unwrap();
        for v in series.omega_v {
            assert!((v - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn free_fall_window_is_quality_error() {
        let mut s = stream_from_yaw(&vec![0.0; 500], 0.0);
        for i in 100..180 {
            s.samples[i].accel = [0.0, 0.0, 0.1]; // 1.6 s of free fall
        }
        match detect_turns(&s, &DetectorConfig::default()) {
            Err(DetectError::FreeFall { at }) => assert!((at - 2.0).abs() < 1e-9),
            other => panic!("expected free-fall error, got {other:?}"),
        }
    }

    #[test]
    fn single_pi_turn_two_seconds() {
        let mut yaw = quiet(12.0);
        add_pulse(&mut yaw, 5.0, 2.0, PI);
        let s = stream_from_yaw(&yaw, 15.0);
        let turns = detect_turns(&s, &DetectorConfig::default()).unwrap();
        assert_eq!(turns.len(), 1);
        let t = &turns[0];
        assert!((t.angle - PI).abs() < 0.05, "angle {}", t.angle);
        assert!((t.start_s - 5.0).abs() <= 0.2, "start {}", t.start_s);
        assert!((t.end_s - 7.0).abs() <= 0.2, "end {}", t.end_s);
        assert_eq!(t.direction, TurnDirection::Left);
    }

    #[test]
    fn turn_below_min_angle_rejected() {
        let mut yaw = quiet(12.0);
        add_pulse(&mut yaw, 5.0, 2.0, 85.0_f64.to_radians());
        let s = stream_from_yaw(&yaw, 0.0);
        assert!(detect_turns(&s, &DetectorConfig::default()).unwrap().is_empty());

        let mut yaw = quiet(12.0);
        add_pulse(&mut yaw, 5.0, 2.0, 95.0_f64.to_radians());
        let s = stream_from_yaw(&yaw, 0.0);
        assert_eq!(detect_turns(&s, &DetectorConfig::default()).unwrap().len(), 1);
    }

    #[test]
    fn brief_spin_rejected_by_dwell() {
        let mut yaw = quiet(20.0);
        add_pulse(&mut yaw, 10.0, 0.4, PI);
        let s = stream_from_yaw(&yaw, 0.0);
        assert!(
            detect_turns(&s, &DetectorConfig::default()).unwrap().is_empty(),
            "0.4 s spin must not count as a turn"
        );
    }

    #[test]
    fn walking_oscillation_alone_is_not_a_turn() {
        let amp = 15.0_f64.to_radians();
        let yaw: Vec<f64> = (0..(30.0 * RATE) as usize)
            .map(|i| amp * (2.0 * PI * 1.0 * i as f64 / RATE).sin())
            .collect();
        let s = stream_from_yaw(&yaw, 0.0);
        assert!(detect_turns(&s, &DetectorConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn mirrored_stream_flips_direction_only() {
        let mut yaw = quiet(12.0);
        add_pulse(&mut yaw, 5.0, 2.0, PI);
        let s = stream_from_yaw(&yaw, 10.0);
        let mut neg = s.clone();
        for sample in &mut neg.samples {
            for g in &mut sample.gyro {
                *g = -*g;
            }
        }
        let a = detect_turns(&s, &DetectorConfig::default()).unwrap();
        let b = detect_turns(&neg, &DetectorConfig::default()).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(b.len(), 1);
        assert_eq!(a[0].start_s, b[0].start_s);
        assert_eq!(a[0].end_s, b[0].end_s);
        assert_eq!(a[0].angle, -b[0].angle);
        assert_eq!(b[0].direction, TurnDirection::Right);
    }

    #[test]
    fn raising_trigger_cannot_add_turns() {
        let mut yaw = quiet(30.0);
        add_pulse(&mut yaw, 5.0, 2.0, PI);
        add_pulse(&mut yaw, 12.0, 3.0, -PI);
        add_pulse(&mut yaw, 20.0, 1.2, 0.9 * PI);
        let s = stream_from_yaw(&yaw, 5.0);
        let mut prev = usize::MAX;
        for trig_dps in [5.0, 10.0, 15.0, 20.0, 30.0, 60.0, 200.0] {
            let cfg = DetectorConfig {
                rate_threshold: f64::to_radians(trig_dps),
                ..DetectorConfig::default()
            };
            let n = detect_turns(&s, &cfg).unwrap().len();
            assert!(n <= prev, "turn count rose from {prev} to {n} at {trig_dps} deg/s");
            prev = n;
        }
    }

    #[test]
    fn short_stream_yields_empty() {
        let s = stream_from_yaw(&quiet(0.3), 0.0);
        assert!(detect_turns(&s, &DetectorConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn turns_sorted_and_disjoint() {
        let mut yaw = quiet(40.0);
        for k in 0..5 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            add_pulse(&mut yaw, 4.0 + 7.0 * k as f64, 2.4, sign * PI);
        }
        let s = stream_from_yaw(&yaw, 20.0);
        let turns = detect_turns(&s, &DetectorConfig::default()).unwrap();
        assert_eq!(turns.len(), 5);
        for w in turns.windows(2) {
            assert!(w[0].end_s < w[1].start_s);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = DetectorConfig {
            end_threshold: 1.0,
            rate_threshold: 0.5,
            ..DetectorConfig::default()
        };
        let s = stream_from_yaw(&quiet(5.0), 0.0);
        assert!(matches!(
            detect_turns(&s, &cfg),
            Err(DetectError::InvalidConfig(_))
        ));
    }

    #[test]
    fn non_uniform_stream_rejected() {
        let mut s = stream_from_yaw(&quiet(5.0), 0.0);
        s.samples[30].t += 0.004;
        assert!(matches!(
            detect_turns(&s, &DetectorConfig::default()),
            Err(DetectError::NonUniform)
        ));
    }
}
