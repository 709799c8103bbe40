//! Sensor-stream and annotation ingestion.
//!
//! Responsibilities:
//! * parse and serialize sensor streams (CSV and a JSON session envelope)
//!   and turn-annotation CSVs, with strict validation;
//! * resample streams onto an exact uniform grid (linear interpolation);
//! * estimate the time offset between two simultaneously recorded streams
//!   by cross-correlating their gyroscope magnitudes;
//! * resolve physical wear locations into turn-direction-dependent roles.
//!
//! Canonical units are SI throughout: seconds, m/s², rad/s. Degrees-per-
//! second gyro columns are accepted only via the explicit `gx_dps,gy_dps,
//! gz_dps` header names and are converted on read.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

use crate::util::{dot3, norm3};

// --------------------------------------------------------------------------
// Errors
// --------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("empty input")]
    EmptyInput,
    #[error("line {line}: malformed row: {detail}")]
    MalformedRow { line: usize, detail: String },
    #[error("unrecognised header: {0}")]
    BadHeader(String),
    #[error("line {line}: non-monotone timestamps")]
    NonMonotoneTimestamps { line: usize },
    #[error("stream has fewer than 2 samples")]
    TooFewSamples,
    #[error("invalid JSON session: {0}")]
    Json(#[from] serde_json::Error),
    #[error("resample rate must be positive (got {0})")]
    RateNotPositive(f64),
    #[error("stream span {span:.3} s is too short for rate {rate} Hz")]
    SpanTooShort { span: f64, rate: f64 },
    #[error("streams must share one sample rate (got {0} and {1} Hz)")]
    RateMismatch(f64, f64),
    #[error("max_lag {max_lag} s must be shorter than both streams")]
    LagExceedsSpan { max_lag: f64 },
    #[error("cross-correlation undefined: zero-variance gyro magnitude")]
    ZeroVariance,
    #[error("line {line}: annotation end {end} <= start {start}")]
    AnnotationEndBeforeStart { line: usize, start: f64, end: f64 },
    #[error("overlapping annotations: [{s0}, {e0}] and [{s1}, {e1}]")]
    AnnotationOverlap { s0: f64, e0: f64, s1: f64, e1: f64 },
}

// --------------------------------------------------------------------------
// Domain types
// --------------------------------------------------------------------------

/// One IMU sample: timestamp plus triaxial accelerometer/gyroscope readings
/// and an optional magnetometer reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSample {
    /// Seconds relative to stream start; strictly increasing within a stream.
    pub t: f64,
    /// Specific force, m/s².
    pub accel: [f64; 3],
    /// Angular rate, rad/s.
    pub gyro: [f64; 3],
    /// Magnetic field, µT.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mag: Option<[f64; 3]>,
}

/// Where the phone was worn, as physically placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WearLocation {
    BeltFront,
    BeltBack,
    PocketFrontLeft,
    PocketFrontRight,
    PocketBackLeft,
    PocketBackRight,
}

/// Wear location relabelled by the role the leg plays during a turn: the
/// leg on the outside of the turning circle is "outer".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WearRole {
    BeltFront,
    BeltBack,
    PocketFrontInner,
    PocketFrontOuter,
    PocketBackInner,
    PocketBackOuter,
}

/// Turning direction, by the right-hand rule about the gravity-up axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnDirection {
    Left,
    Right,
}

/// Recording context of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    Supervised,
    Unsupervised,
}

/// A full sensor recording with its session metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorStream {
    pub session_id: String,
    /// Participant this session belongs to, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant_id: Option<String>,
    /// Day index within a monitoring period, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub day: Option<u32>,
    pub setting: Setting,
    pub wear_location: WearLocation,
    /// Nominal sampling rate, Hz.
    pub nominal_rate: f64,
    pub samples: Vec<SensorSample>,
}

/// One annotated turn interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnAnnotation {
    pub start_s: f64,
    pub end_s: f64,
    pub source: AnnotationSource,
}

/// Who produced an annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationSource {
    Reference,
    Detector,
    SyntheticTruth,
}

impl TurnAnnotation {
    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }
}

impl SensorStream {
    /// Total time covered, first to last sample.
    pub fn span(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Timestamp gaps larger than `threshold` seconds, as (sample index of
    /// the gap start, gap length). Gaps are interpolated through by
    /// [`resample_uniform`]; callers may surface them as quality warnings.
    pub fn timestamp_gaps(&self, threshold: f64) -> Vec<(usize, f64)> {
        self.samples
            .windows(2)
            .enumerate()
            .filter_map(|(i, w)| {
                let gap = w[1].t - w[0].t;
                (gap > threshold).then_some((i, gap))
            })
            .collect()
    }

    /// True when samples already sit on the exact grid `t0 + j/rate` with
    /// the expected sample count for the span.
    pub fn is_uniform_at(&self, rate: f64) -> bool {
        if self.samples.len() < 2 {
            return false;
        }
        let t0 = self.samples[0].t;
        let expected = (self.span() * rate + 1e-9).floor() as usize + 1;
        if self.samples.len() != expected {
            return false;
        }
        let tol = 1e-9 * self.span().max(1.0);
        self.samples
            .iter()
            .enumerate()
            .all(|(j, s)| (s.t - t0 - j as f64 / rate).abs() <= tol)
    }
}

fn validate_samples(samples: &[SensorSample]) -> Result<(), IngestError> {
    if samples.len() < 2 {
        return Err(IngestError::TooFewSamples);
    }
    for (i, s) in samples.iter().enumerate() {
        let finite = s.t.is_finite()
            && s.t >= 0.0
            && s.accel.iter().all(|v| v.is_finite())
            && s.gyro.iter().all(|v| v.is_finite())
            && s.mag.map_or(true, |m| m.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(IngestError::MalformedRow {
                line: i + 2, // header is line 1
                detail: "non-finite or negative-time value".into(),
            });
        }
        if i > 0 && s.t <= samples[i - 1].t {
            return Err(IngestError::NonMonotoneTimestamps { line: i + 2 });
        }
    }
    Ok(())
}

/// Infers a nominal rate from the median sample spacing, snapping to an
/// integer when within floating-point noise of one.
fn infer_rate(samples: &[SensorSample]) -> f64 {
    let mut dts: Vec<f64> = samples.windows(2).map(|w| w[1].t - w[0].t).collect();
    dts.sort_by(f64::total_cmp);
    let dt = crate::util::median(&dts).unwrap_or(0.02);
    let rate = 1.0 / dt;
    let snapped = rate.round();
    if snapped > 0.0 && (rate - snapped).abs() <= 1e-6 * snapped {
        snapped
    } else {
        rate
    }
}

// --------------------------------------------------------------------------
// Parsing and serialization
// --------------------------------------------------------------------------

/// Input encodings understood by [`parse_stream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamFormat {
    Csv,
    Json,
}

/// Session metadata attached to CSV inputs (the CSV itself carries none).
#[derive(Debug, Clone)]
pub struct StreamMeta {
    pub session_id: String,
    pub participant_id: Option<String>,
    pub day: Option<u32>,
    pub setting: Setting,
    pub wear_location: WearLocation,
}

impl Default for StreamMeta {
    fn default() -> Self {
        StreamMeta {
            session_id: "session".into(),
            participant_id: None,
            day: None,
            setting: Setting::Unsupervised,
            wear_location: WearLocation::BeltFront,
        }
    }
}

/// Parses a sensor stream from raw text in the given format.
///
/// CSV inputs receive [`StreamMeta::default`] metadata; use
/// [`parse_stream_csv`] to attach real metadata.
pub fn parse_stream(text: &str, format: StreamFormat) -> Result<SensorStream, IngestError> {
    match format {
        StreamFormat::Csv => parse_stream_csv(text, StreamMeta::default()),
        StreamFormat::Json => parse_stream_json(text),
    }
}

const CSV_BASE_HEADER: [&str; 7] = ["t", "ax", "ay", "az", "gx", "gy", "gz"];
const CSV_DPS_HEADER: [&str; 7] = ["t", "ax", "ay", "az", "gx_dps", "gy_dps", "gz_dps"];
const CSV_MAG_HEADER: [&str; 3] = ["mx", "my", "mz"];

/// Parses the CSV sensor format: header `t,ax,ay,az,gx,gy,gz[,mx,my,mz]`,
/// one sample per row, SI units. Gyro columns named `gx_dps,gy_dps,gz_dps`
/// are converted from deg/s to rad/s on read.
pub fn parse_stream_csv(text: &str, meta: StreamMeta) -> Result<SensorStream, IngestError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(IngestError::EmptyInput)?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();

    let gyro_in_dps = if cols.len() >= 7 && cols[..7] == CSV_DPS_HEADER {
        true
    } else if cols.len() >= 7 && cols[..7] == CSV_BASE_HEADER {
        false
    } else {
        return Err(IngestError::BadHeader(header.to_string()));
    };
    let has_mag = match cols.len() {
        7 => false,
        10 if cols[7..] == CSV_MAG_HEADER => true,
        _ => return Err(IngestError::BadHeader(header.to_string())),
    };
    let n_cols = if has_mag { 10 } else { 7 };

    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n_cols {
            return Err(IngestError::MalformedRow {
                line: line_no,
                detail: format!("expected {n_cols} fields, got {}", fields.len()),
            });
        }
        let mut v = [0.0f64; 10];
        for (k, f) in fields.iter().enumerate() {
            v[k] = f.parse::<f64>().map_err(|_| IngestError::MalformedRow {
                line: line_no,
                detail: format!("bad number {f:?}"),
            })?;
        }
        let scale = if gyro_in_dps {
            std::f64::consts::PI / 180.0
        } else {
            1.0
        };
        samples.push(SensorSample {
            t: v[0],
            accel: [v[1], v[2], v[3]],
            gyro: [v[4] * scale, v[5] * scale, v[6] * scale],
            mag: has_mag.then_some([v[7], v[8], v[9]]),
        });
    }
    if samples.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    validate_samples(&samples)?;
    let nominal_rate = infer_rate(&samples);
    Ok(SensorStream {
        session_id: meta.session_id,
        participant_id: meta.participant_id,
        day: meta.day,
        setting: meta.setting,
        wear_location: meta.wear_location,
        nominal_rate,
        samples,
    })
}

/// Parses the JSON session envelope (the output of [`stream_to_json`]).
pub fn parse_stream_json(text: &str) -> Result<SensorStream, IngestError> {
    if text.trim().is_empty() {
        return Err(IngestError::EmptyInput);
    }
    let stream: SensorStream = serde_json::from_str(text)?;
    validate_samples(&stream.samples)?;
    if stream.nominal_rate <= 0.0 {
        return Err(IngestError::RateNotPositive(stream.nominal_rate));
    }
    Ok(stream)
}

/// Serializes a stream to the CSV sensor format with full-precision floats
/// (shortest round-trip representation), so parse→serialize→parse is
/// value-identical.
pub fn stream_to_csv(stream: &SensorStream) -> String {
    let has_mag = stream.samples.iter().all(|s| s.mag.is_some());
    let mut out = String::new();
    out.push_str("t,ax,ay,az,gx,gy,gz");
    if has_mag {
        out.push_str(",mx,my,mz");
    }
    out.push('\n');
    for s in &stream.samples {
        let a = s.accel;
        let g = s.gyro;
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            s.t, a[0], a[1], a[2], g[0], g[1], g[2]
        );
        if has_mag {
            let m = s.mag.unwrap();
            let _ = write!(out, ",{},{},{}", m[0], m[1], m[2]);
        }
        out.push('\n');
    }
    out
}

/// Serializes a stream to the JSON session envelope.
pub fn stream_to_json(stream: &SensorStream) -> String {
    serde_json::to_string_pretty(stream).expect("stream serialization cannot fail")
}

/// Parses a turn-annotation CSV (header `start_s,end_s`). Rows may arrive
/// unsorted; the result is sorted by start. Overlapping annotations are
/// rejected (touching end points are allowed).
pub fn parse_annotations(
    text: &str,
    source: AnnotationSource,
) -> Result<Vec<TurnAnnotation>, IngestError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(IngestError::EmptyInput)?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["start_s", "end_s"] {
        return Err(IngestError::BadHeader(header.to_string()));
    }
    let mut anns = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(IngestError::MalformedRow {
                line: line_no,
                detail: format!("expected 2 fields, got {}", fields.len()),
            });
        }
        let parse = |f: &str| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IngestError::MalformedRow {
                    line: line_no,
                    detail: format!("bad number {f:?}"),
                })
        };
        let (start_s, end_s) = (parse(fields[0])?, parse(fields[1])?);
        if end_s <= start_s {
            return Err(IngestError::AnnotationEndBeforeStart {
                line: line_no,
                start: start_s,
                end: end_s,
            });
        }
        anns.push(TurnAnnotation {
            start_s,
            end_s,
            source,
        });
    }
    anns.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
    for w in anns.windows(2) {
        if w[1].start_s < w[0].end_s {
            return Err(IngestError::AnnotationOverlap {
                s0: w[0].start_s,
                e0: w[0].end_s,
                s1: w[1].start_s,
                e1: w[1].end_s,
            });
        }
    }
    Ok(anns)
}

/// Serializes annotations to the `start_s,end_s` CSV.
pub fn annotations_to_csv(annotations: &[TurnAnnotation]) -> String {
    let mut out = String::from("start_s,end_s\n");
    for a in annotations {
        let _ = writeln!(out, "{},{}", a.start_s, a.end_s);
    }
    out
}

// --------------------------------------------------------------------------
// Resampling
// --------------------------------------------------------------------------

/// Resamples a stream onto the exact grid `t0, t0+1/rate, …` by per-channel
/// linear interpolation. Output length is `floor(span·rate)+1`. A stream
/// already on that grid is returned unchanged (idempotence).
pub fn resample_uniform(stream: &SensorStream, rate: f64) -> Result<SensorStream, IngestError> {
    if rate <= 0.0 {
        return Err(IngestError::RateNotPositive(rate));
    }
    validate_samples(&stream.samples)?;
    let span = stream.span();
    if span < 2.0 / rate {
        return Err(IngestError::SpanTooShort { span, rate });
    }
    if stream.is_uniform_at(rate) {
        let mut out = stream.clone();
        out.nominal_rate = rate;
        return Ok(out);
    }

    let keep_mag = stream.samples.iter().all(|s| s.mag.is_some());
    let t0 = stream.samples[0].t;
    let count = (span * rate + 1e-9).floor() as usize + 1;
    let src = &stream.samples;
    let mut samples = Vec::with_capacity(count);
    let mut seg = 0usize;
    for j in 0..count {
        let t = t0 + j as f64 / rate;
        while seg + 2 < src.len() && src[seg + 1].t < t {
            seg += 1;
        }
        let (lo, hi) = (&src[seg], &src[seg + 1]);
        let alpha = ((t - lo.t) / (hi.t - lo.t)).clamp(0.0, 1.0);
        let lerp3 = |a: [f64; 3], b: [f64; 3]| {
            [
                a[0] + alpha * (b[0] - a[0]),
                a[1] + alpha * (b[1] - a[1]),
                a[2] + alpha * (b[2] - a[2]),
            ]
        };
        samples.push(SensorSample {
            t,
            accel: lerp3(lo.accel, hi.accel),
            gyro: lerp3(lo.gyro, hi.gyro),
            mag: keep_mag.then(|| lerp3(lo.mag.unwrap(), hi.mag.unwrap())),
        });
    }
    Ok(SensorStream {
        nominal_rate: rate,
        samples,
        ..stream.clone()
    })
}

// --------------------------------------------------------------------------
// Cross-correlation synchronization
// --------------------------------------------------------------------------

/// Estimates the time offset of `b` relative to `a` by maximising the
/// normalised cross-correlation of the gyroscope-magnitude channels over
/// integer sample lags in `[−max_lag, +max_lag]`.
///
/// A positive result means `b` lags (is delayed relative to) `a`; shifting
/// `b` earlier by the returned amount aligns it with `a`. Exact ties are
/// resolved toward the smaller |lag|.
pub fn sync_offset(
    a: &SensorStream,
    b: &SensorStream,
    max_lag: f64,
) -> Result<f64, IngestError> {
    validate_samples(&a.samples)?;
    validate_samples(&b.samples)?;
    let (ra, rb) = (a.nominal_rate, b.nominal_rate);
    if (ra - rb).abs() > 1e-9 * ra.max(rb) {
        return Err(IngestError::RateMismatch(ra, rb));
    }
    if max_lag >= a.span().min(b.span()) {
        return Err(IngestError::LagExceedsSpan { max_lag });
    }

    let mag = |s: &SensorStream| -> Vec<f64> { s.samples.iter().map(|x| norm3(x.gyro)).collect() };
    let (ma, mb) = (mag(a), mag(b));
    let variance = |v: &[f64]| {
        let m = crate::util::mean(v);
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
    };
    if variance(&ma) == 0.0 || variance(&mb) == 0.0 {
        return Err(IngestError::ZeroVariance);
    }

    let k_max = (max_lag * ra + 1e-9).floor() as i64;
    let mut best: Option<(f64, i64)> = None;
    // Scan 0, +1, −1, +2, −2, … and keep strict improvements only, so exact
    // ties resolve to the smaller |lag|.
    let lags = std::iter::once(0).chain((1..=k_max).flat_map(|k| [k, -k]));
    for k in lags {
        if let Some(r) = window_pearson(&ma, &mb, k) {
            if best.map_or(true, |(br, _)| r > br) {
                best = Some((r, k));
            }
        }
    }
    match best {
        Some((_, k)) => Ok(k as f64 / ra),
        None => Err(IngestError::ZeroVariance),
    }
}

/// Pearson correlation of `a[j]` against `b[j+k]` over the overlapping
/// window; `None` when the window is degenerate.
fn window_pearson(a: &[f64], b: &[f64], k: i64) -> Option<f64> {
    let lo = 0.max(-k) as usize;
    let hi_excl = (a.len() as i64).min(b.len() as i64 - k).max(0) as usize;
    if hi_excl.saturating_sub(lo) < 2 {
        return None;
    }
    let n = (hi_excl - lo) as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in lo..hi_excl {
        let x = a[j];
        let y = b[(j as i64 + k) as usize];
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    let num = sxy - sx * sy / n;
    let dx = sxx - sx * sx / n;
    let dy = syy - sy * sy / n;
    if dx <= 0.0 || dy <= 0.0 {
        return None;
    }
    Some(num / (dx * dy).sqrt())
}

// --------------------------------------------------------------------------
// Wear-role resolution
// --------------------------------------------------------------------------

/// Maps a physical wear location to its role for a turn in the given
/// direction: the leg on the outside of the turning circle is "outer"
/// (during a left turn, the right leg), belts are direction-independent.
pub fn resolve_wear_role(physical: WearLocation, direction: TurnDirection) -> WearRole {
    use TurnDirection::*;
    use WearLocation::*;
    match (physical, direction) {
        (BeltFront, _) => WearRole::BeltFront,
        (BeltBack, _) => WearRole::BeltBack,
        (PocketFrontLeft, Left) | (PocketFrontRight, Right) => WearRole::PocketFrontInner,
        (PocketFrontRight, Left) | (PocketFrontLeft, Right) => WearRole::PocketFrontOuter,
        (PocketBackLeft, Left) | (PocketBackRight, Right) => WearRole::PocketBackInner,
        (PocketBackRight, Left) | (PocketBackLeft, Right) => WearRole::PocketBackOuter,
    }
}

/// Gravity-normalised projection helper shared with the detector: unit
/// vector along `v`, or `None` for a near-zero vector.
pub(crate) fn unit3(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = norm3(v);
    (n > 1e-12).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

pub(crate) fn _project(g: [f64; 3], v: [f64; 3]) -> f64 {
    dot3(g, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mk_stream(ts: &[f64], gx: impl Fn(usize) -> f64) -> SensorStream {
        SensorStream {
            session_id: "s".into(),
            participant_id: None,
            day: None,
            setting: Setting::Unsupervised,
            wear_location: WearLocation::BeltFront,
            nominal_rate: 50.0,
            samples: ts
                .iter()
                .enumerate()
                .map(|(i, &t)| SensorSample {
                    t,
                    accel: [0.0, 0.0, 9.81],
                    gyro: [gx(i), 0.0, 0.0],
                    mag: None,
                })
                .collect(),
        }
    }

    // ---- parsing ----

    #[test]
    fn csv_three_rows_infers_50hz() {
        let text = "t,ax,ay,az,gx,gy,gz\n0.00,0,0,9.81,0,0,0\n0.02,0,0,9.81,0,0,0\n0.04,0,0,9.81,0,0,0\n";
        let s = parse_stream(text, StreamFormat::Csv).unwrap();
        assert_eq!(s.samples.len(), 3);
        assert_eq!(s.nominal_rate, 50.0);
    }

    #[test]
    fn dps_header_converts_to_rad_s() {
        let text = "t,ax,ay,az,gx_dps,gy_dps,gz_dps\n0.0,0,0,9.81,20.0,0,0\n0.02,0,0,9.81,20.0,0,0\n";
        let s = parse_stream(text, StreamFormat::Csv).unwrap();
        assert!((s.samples[0].gyro[0] - 0.349066).abs() < 1e-6);
    }

    #[test]
    fn duplicate_timestamps_rejected() {
        let text = "t,ax,ay,az,gx,gy,gz\n0.00,0,0,9.81,0,0,0\n0.00,0,0,9.81,0,0,0\n";
        match parse_stream(text, StreamFormat::Csv) {
            Err(IngestError::NonMonotoneTimestamps { line }) => assert_eq!(line, 3),
            other => panic!("expected non-monotone error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "t,ax,ay,az,gx,gy,gz\n0.00,0,0,9.81,0,0,0\n0.02,0,0,oops,0,0,0\n";
        match parse_stream(text, StreamFormat::Csv) {
            Err(IngestError::MalformedRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed row, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_rejected() {
        assert!(matches!(
            parse_stream("", StreamFormat::Csv),
            Err(IngestError::EmptyInput)
        ));
    }

    #[test]
    fn nan_rejected() {
        let text = "t,ax,ay,az,gx,gy,gz\n0.00,0,0,NaN,0,0,0\n0.02,0,0,9.81,0,0,0\n";
        assert!(parse_stream(text, StreamFormat::Csv).is_err());
    }

    #[test]
    fn csv_round_trip_is_value_identical() {
        let text = "t,ax,ay,az,gx,gy,gz,mx,my,mz\n0.0,0.1,-0.2,9.81,0.01,0.02,-0.03,10,20,30\n0.02,0.11,-0.19,9.80,0.011,0.021,-0.031,10,20,31\n";
        let s1 = parse_stream(text, StreamFormat::Csv).unwrap();
        let s2 = parse_stream(&stream_to_csv(&s1), StreamFormat::Csv).unwrap();
        assert_eq!(s1.samples, s2.samples);
        // and once more through JSON
        let s3 = parse_stream_json(&stream_to_json(&s2)).unwrap();
        assert_eq!(s1.samples, s3.samples);
    }

    #[test]
    fn json_round_trip_keeps_metadata() {
        let mut s = mk_stream(&[0.0, 0.02, 0.04], |i| i as f64);
        s.participant_id = Some("p007".into());
        s.day = Some(3);
        let back = parse_stream_json(&stream_to_json(&s)).unwrap();
        assert_eq!(back, s);
    }

    // ---- annotations ----

    #[test]
    fn annotations_sorted_and_validated() {
        let text = "start_s,end_s\n20.1,22.4\n10.0,12.6\n";
        let anns = parse_annotations(text, AnnotationSource::Reference).unwrap();
        assert_eq!(anns.len(), 2);
        assert_eq!(anns[0].start_s, 10.0);
        assert_eq!(anns[1].start_s, 20.1);
    }

    #[test]
    fn annotation_end_before_start_rejected() {
        let text = "start_s,end_s\n5.0,4.0\n";
        assert!(matches!(
            parse_annotations(text, AnnotationSource::Reference),
            Err(IngestError::AnnotationEndBeforeStart { .. })
        ));
    }

    #[test]
    fn annotation_overlap_rejected() {
        let text = "start_s,end_s\n1.0,3.0\n2.5,4.0\n";
        assert!(matches!(
            parse_annotations(text, AnnotationSource::Reference),
            Err(IngestError::AnnotationOverlap { .. })
        ));
    }

    #[test]
    fn annotation_csv_round_trip() {
        let anns = vec![
            TurnAnnotation { start_s: 1.25, end_s: 3.5, source: AnnotationSource::Detector },
            TurnAnnotation { start_s: 8.1, end_s: 10.733333333333333, source: AnnotationSource::Detector },
        ];
        let back = parse_annotations(&annotations_to_csv(&anns), AnnotationSource::Detector).unwrap();
        assert_eq!(back, anns);
    }

    // ---- resampling ----

    #[test]
    fn resample_linear_interpolation_example() {
        let s = mk_stream(&[0.0, 0.03, 0.04], |i| i as f64); // values 0, 1, 2 on gx
        let mut s = s;
        s.samples[1].gyro[0] = 3.0;
        s.samples[2].gyro[0] = 4.0;
        let r = resample_uniform(&s, 50.0).unwrap();
        assert_eq!(r.samples.len(), 3);
        assert_eq!(r.samples[1].t, 0.02);
        assert!((r.samples[1].gyro[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn resample_is_identity_on_uniform_input() {
        let ts: Vec<f64> = (0..100).map(|i| i as f64 / 50.0).collect();
        let s = mk_stream(&ts, |i| (i as f64 * 0.1).sin());
        let r = resample_uniform(&s, 50.0).unwrap();
        assert_eq!(r.samples, s.samples);
        // idempotence after a real resample
        let jit = mk_stream(
            &(0..100).map(|i| i as f64 / 50.0 + if i % 3 == 0 { 0.0 } else { 0.002 }).collect::<Vec<_>>(),
            |i| i as f64,
        );
        let r1 = resample_uniform(&jit, 50.0).unwrap();
        let r2 = resample_uniform(&r1, 50.0).unwrap();
        assert_eq!(r1.samples, r2.samples);
    }

    #[test]
    fn resample_exact_on_linear_ramp() {
        // jittered timestamps around 50 Hz, values linear in t
        let mut t = 0.0;
        let mut ts = Vec::new();
        let mut k = 0u32;
        while t < 10.0 {
            ts.push(t);
            // deterministic jitter in [0.019, 0.021]
            k = k.wrapping_mul(1664525).wrapping_add(1013904223);
            t += 0.019 + 0.002 * (k as f64 / u32::MAX as f64);
        }
        let mut s = mk_stream(&ts, |_| 0.0);
        for sample in &mut s.samples {
            sample.gyro[0] = 3.0 * sample.t - 1.0;
            sample.accel[0] = -0.5 * sample.t + 2.0;
        }
        let r = resample_uniform(&s, 50.0).unwrap();
        for sample in &r.samples {
            assert!((sample.gyro[0] - (3.0 * sample.t - 1.0)).abs() < 1e-12);
            assert!((sample.accel[0] - (-0.5 * sample.t + 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_rejects_bad_rate() {
        let s = mk_stream(&[0.0, 0.02, 0.04], |i| i as f64);
        assert!(matches!(
            resample_uniform(&s, 0.0),
            Err(IngestError::RateNotPositive(_))
        ));
    }

    // ---- sync ----

    fn burst_stream(delay_samples: usize, n: usize) -> SensorStream {
        let ts: Vec<f64> = (0..n).map(|i| i as f64 / 50.0).collect();
        mk_stream(&ts, move |i| {
            let j = i as i64 - delay_samples as i64;
            if (0..100).contains(&j) {
                ((j as f64) * 0.3).sin() * (1.0 - ((j as f64 - 50.0) / 50.0).powi(2))
            } else {
                0.0
            }
        })
    }

    #[test]
    fn sync_recovers_known_delay() {
        let a = burst_stream(100, 600);
        let b = burst_stream(125, 600); // b delayed 0.5 s
        let lag = sync_offset(&a, &b, 2.0).unwrap();
        assert!((lag - 0.5).abs() < 1e-12, "lag {lag}");
        assert_eq!(sync_offset(&a, &a, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn sync_antisymmetric_for_pure_shifts() {
        let a = burst_stream(100, 600);
        let b = burst_stream(125, 600);
        let ab = sync_offset(&a, &b, 2.0).unwrap();
        let ba = sync_offset(&b, &a, 2.0).unwrap();
        assert_eq!(ab, -ba);
    }

    #[test]
    fn sync_zero_variance_errors() {
        let a = mk_stream(&(0..300).map(|i| i as f64 / 50.0).collect::<Vec<_>>(), |_| 0.25);
        assert!(matches!(
            sync_offset(&a, &a, 1.0),
            Err(IngestError::ZeroVariance)
        ));
    }

    // ---- wear roles ----

    #[test]
    fn wear_role_examples() {
        use TurnDirection::*;
        use WearLocation::*;
        assert_eq!(resolve_wear_role(PocketFrontRight, Left), WearRole::PocketFrontOuter);
        assert_eq!(resolve_wear_role(BeltFront, Right), WearRole::BeltFront);
        assert_eq!(resolve_wear_role(PocketBackLeft, Left), WearRole::PocketBackInner);
    }

    #[test]
    fn wear_role_is_bijective_per_direction() {
        use WearLocation::*;
        let pockets = [PocketFrontLeft, PocketFrontRight, PocketBackLeft, PocketBackRight];
        for dir in [TurnDirection::Left, TurnDirection::Right] {
            let mut roles: Vec<WearRole> = pockets.iter().map(|&p| resolve_wear_role(p, dir)).collect();
            roles.sort_by_key(|r| format!("{r:?}"));
            roles.dedup();
            assert_eq!(roles.len(), 4, "roles collide for {dir:?}");
        }
        // direction flip + left/right mirror is an involution
        let mirror = |p: WearLocation| match p {
            PocketFrontLeft => PocketFrontRight,
            PocketFrontRight => PocketFrontLeft,
            PocketBackLeft => PocketBackRight,
            PocketBackRight => PocketBackLeft,
            b => b,
        };
        for &p in &pockets {
            assert_eq!(
                resolve_wear_role(p, TurnDirection::Left),
                resolve_wear_role(mirror(p), TurnDirection::Right)
            );
        }
    }

    #[test]
    fn gap_report() {
        let s = mk_stream(&[0.0, 0.02, 0.5, 0.52], |i| i as f64);
        let gaps = s.timestamp_gaps(0.2);
        assert_eq!(gaps.len(), 1);
        assert_eq!(gaps[0].0, 1);
    }
}
