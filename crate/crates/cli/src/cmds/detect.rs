//! `uturn detect`: run the turn detector over sensor streams.
//!
//! Writes one `turns/<stem>_turns.csv` per readable input plus a combined
//! `results.json` and a per-test `results.csv` (the input format of the
//! downstream statistics commands). The `turns/` directory holds nothing
//! else, so it can be scored against a truth directory as-is. A bad file
//! never aborts the batch; it downgrades the exit code to 1.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use uturn_core::detect::{detect_turns, DetectorConfig};
use uturn_core::ingest::{parse_stream_csv, parse_stream_json, StreamMeta, TurnDirection};
use uturn_core::measures::{summarize_test, TestMeta, TestResult};

use crate::tables::csv_row;
use crate::{manifest, Ctx};

#[derive(clap::Args)]
pub struct Args {
    /// Sensor stream files (`.json` envelope, anything else is read as CSV).
    pub inputs: Vec<PathBuf>,

    /// Turn trigger threshold on the vertical rate, rad/s.
    #[arg(long)]
    pub rate_threshold: Option<f64>,
    /// Turn boundary threshold, rad/s.
    #[arg(long)]
    pub end_threshold: Option<f64>,
    /// Minimum turn angle, rad.
    #[arg(long)]
    pub min_angle: Option<f64>,
    /// Minimum above-boundary dwell, s.
    #[arg(long)]
    pub min_duration: Option<f64>,
    /// Maximum turn span, s.
    #[arg(long)]
    pub max_duration: Option<f64>,
    /// Merge gap between consecutive same-direction turns, s.
    #[arg(long)]
    pub merge_gap: Option<f64>,
    /// Low-pass cutoff for the yaw-rate trace, Hz.
    #[arg(long)]
    pub filter_cutoff: Option<f64>,
}

fn detector_config(ctx: &Ctx, args: &Args) -> Result<DetectorConfig> {
    let d = DetectorConfig::default();
    let cfg = DetectorConfig {
        rate_threshold: ctx.param_f64("rate_threshold", args.rate_threshold, d.rate_threshold)?,
        end_threshold: ctx.param_f64("end_threshold", args.end_threshold, d.end_threshold)?,
        min_angle: ctx.param_f64("min_angle", args.min_angle, d.min_angle)?,
        min_duration: ctx.param_f64("min_duration", args.min_duration, d.min_duration)?,
        max_duration: ctx.param_f64("max_duration", args.max_duration, d.max_duration)?,
        merge_gap: ctx.param_f64("merge_gap", args.merge_gap, d.merge_gap)?,
        filter_cutoff: ctx.param_f64("filter_cutoff", args.filter_cutoff, d.filter_cutoff)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct ErrorRecord {
    input: String,
    error: String,
}

#[derive(Serialize)]
struct DetectReport<'a> {
    sessions: &'a [TestResult],
    errors: &'a [ErrorRecord],
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<u8> {
    if args.inputs.is_empty() {
        eprintln!("error: no input streams given");
        return Ok(2);
    }
    let config = match detector_config(ctx, args) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("error: {err:#}");
            return Ok(2);
        }
    };
    ctx.create_out_dir()?;
    std::fs::create_dir_all(ctx.out_dir.join("turns"))?;

    let mut sessions = Vec::new();
    let mut errors = Vec::new();
    let mut outputs: Vec<String> = Vec::new();
    for path in &args.inputs {
        match process(path, &config) {
            Ok((result, turns_csv)) => {
                let name = unique_name(&outputs, &format!("turns/{}_turns", stem(path)));
                std::fs::write(ctx.out_dir.join(&name), turns_csv)
                    .with_context(|| format!("writing {name}"))?;
                outputs.push(name);
                sessions.push(result);
            }
            Err(err) => {
                eprintln!("error: {}: {err:#}", path.display());
                errors.push(ErrorRecord {
                    input: path.display().to_string(),
                    error: format!("{err:#}"),
                });
            }
        }
    }

    let report = DetectReport { sessions: &sessions, errors: &errors };
    std::fs::write(
        ctx.out_dir.join("results.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    outputs.push("results.json".into());
    std::fs::write(ctx.out_dir.join("results.csv"), results_csv(&sessions))?;
    outputs.push("results.csv".into());
    manifest::write_manifest(
        &ctx.out_dir,
        "detect",
        ctx.seed,
        serde_json::to_value(&config)?,
        &args.inputs,
        &outputs,
    )?;
    Ok(if errors.is_empty() { 0 } else { 1 })
}

/// One row per test, full precision: this table is data (e.g. the input to
/// a reliability analysis), not a display artifact.
fn results_csv(sessions: &[TestResult]) -> String {
    let mut out = String::from(
        "session_id,participant_id,day,setting,wear_location,n_turns,\
         turn_speed_median,turn_duration_median\n",
    );
    fn label<T: Serialize>(v: &T) -> String {
        match serde_json::to_value(v) {
            Ok(serde_json::Value::String(s)) => s,
            _ => String::new(),
        }
    }
    let opt_num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for s in sessions {
        out.push_str(&csv_row(&[
            s.meta.session_id.clone(),
            s.meta.participant_id.clone().unwrap_or_default(),
            s.meta.day.map(|d| d.to_string()).unwrap_or_default(),
            label(&s.meta.setting),
            label(&s.meta.wear_location),
            s.n_turns.to_string(),
            opt_num(s.turn_speed_median),
            opt_num(s.turn_duration_median),
        ]));
    }
    out
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "stream".into())
}

/// Two inputs may share a file stem; suffix the later one so its turns
/// table is not overwritten.
fn unique_name(taken: &[String], base: &str) -> String {
    let candidate = format!("{base}.csv");
    if !taken.contains(&candidate) {
        return candidate;
    }
    let mut i = 2;
    loop {
        let candidate = format!("{base}_{i}.csv");
        if !taken.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

fn process(path: &Path, config: &DetectorConfig) -> Result<(TestResult, String)> {
    let text = std::fs::read_to_string(path).context("reading input")?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let stream = if is_json {
        parse_stream_json(&text)?
    } else {
        parse_stream_csv(&text, StreamMeta { session_id: stem(path), ..StreamMeta::default() })?
    };
    let turns = detect_turns(&stream, config)?;
    let result = summarize_test(&turns, TestMeta::from_stream(&stream));

    let mut csv = String::from("start_s,end_s,duration_s,angle_rad,direction,peak_rate_rad_s\n");
    for t in &turns {
        let dir = match t.direction {
            TurnDirection::Left => "left",
            TurnDirection::Right => "right",
        };
        csv.push_str(&format!(
            "{},{},{},{},{dir},{}\n",
            t.start_s, t.end_s, t.duration, t.angle, t.peak_rate
        ));
    }
    Ok((result, csv))
}
