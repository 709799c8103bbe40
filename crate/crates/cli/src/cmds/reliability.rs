//! `uturn reliability`: test-retest reliability as a function of how many
//! tests are aggregated per side.
//!
//! Input is one row per test with `participant_id`, `day`, and
//! `turn_speed_median` columns (the detector's results table works as-is).
//! For each k up to `--max-k`, participants with at least 2k tests are
//! split into two disjoint k-test halves, each half is collapsed to its
//! median, and the two columns give the ICC, SEM, and smallest detectable
//! change. A participant bootstrap puts a CI on each ICC.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;
use uturn_core::measures::SplitMode;
use uturn_core::stats::{
    bootstrap_ci, reliability_curve, reliability_matrix, reliability_point, IccBand,
    ParticipantSeries, ReliabilityPoint, StatsError, BOOTSTRAP_REPS,
};
use uturn_core::util::splitmix64;

use crate::tables::{csv_columns, fmt_opt2, parse_f64, parse_u32};
use crate::{manifest, Ctx};

#[derive(clap::Args)]
pub struct Args {
    /// Per-test CSV with `participant_id`, `day`, and `turn_speed_median` columns.
    #[arg(long)]
    pub tests: PathBuf,
    /// How the two k-test halves are drawn: `random` or `chronological`.
    #[arg(long)]
    pub mode: Option<String>,
    /// Largest aggregation size to evaluate.
    #[arg(long)]
    pub max_k: Option<usize>,
    /// Bootstrap replicates per k for the ICC confidence interval (0 disables).
    #[arg(long)]
    pub reps: Option<usize>,
}

fn parse_mode(s: &str) -> Result<SplitMode> {
    match s {
        "random" => Ok(SplitMode::Random),
        "chronological" => Ok(SplitMode::Chronological),
        other => anyhow::bail!("unknown split mode {other:?} (expected random or chronological)"),
    }
}

#[derive(Serialize)]
struct PointJson {
    #[serde(flatten)]
    point: ReliabilityPoint,
    #[serde(skip_serializing_if = "Option::is_none")]
    icc_band: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    icc_ci_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    icc_ci_upper: Option<f64>,
}

#[derive(Serialize)]
struct ReliabilityReport {
    mode: &'static str,
    max_k: usize,
    n_participants: usize,
    points: Vec<PointJson>,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<u8> {
    let mode_str = ctx.param_str("split_mode", args.mode.as_deref(), "random").to_string();
    let mode = match parse_mode(&mode_str) {
        Ok(m) => m,
        Err(err) => {
            eprintln!("error: {err:#}");
            return Ok(2);
        }
    };
    let (max_k, reps) = match (
        ctx.param_usize("max_k", args.max_k, 7),
        ctx.param_usize("bootstrap_reps", args.reps, BOOTSTRAP_REPS),
    ) {
        (Ok(k), Ok(r)) if k >= 1 => (k, r),
        (Ok(k), Ok(_)) => {
            eprintln!("error: max_k must be at least 1, got {k}");
            return Ok(2);
        }
        (Err(err), _) | (_, Err(err)) => {
            eprintln!("error: {err:#}");
            return Ok(2);
        }
    };

    let series = load_series(&args.tests)?;
    if series.len() < 3 {
        eprintln!(
            "error: insufficient participants for a reliability analysis (need at least 3, got {})",
            series.len()
        );
        return Ok(1);
    }

    let curve = reliability_curve(&series, mode, ctx.seed, max_k);

    // The bootstrap redraws both the participants and their splits, so the
    // CI reflects split luck as well as sampling. Participants are kept in
    // id order so replicate r is the same in every run.
    let mut ordered: Vec<&ParticipantSeries> = series.iter().collect();
    ordered.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));
    let mut points = Vec::with_capacity(curve.len());
    for point in curve {
        let k = point.k;
        let ci = if reps == 0 || point.estimate.is_none() {
            None
        } else {
            match bootstrap_ci(ordered.len(), reps, splitmix64(ctx.seed ^ k as u64), |idx, rng| {
                let resampled: Vec<ParticipantSeries> =
                    idx.iter().map(|&i| ordered[i].clone()).collect();
                let matrix = reliability_matrix(&resampled, k, mode, rng);
                reliability_point(&matrix).map(|e| e.icc)
            }) {
                Ok((interval, _)) => Some(interval),
                Err(StatsError::BootstrapUndefined { .. }) => {
                    eprintln!("warning: k={k}: ICC undefined in too many bootstrap replicates; omitting the CI");
                    None
                }
                Err(err) => return Err(err.into()),
            }
        };
        points.push(PointJson {
            icc_band: point.estimate.map(|e| IccBand::classify(e.icc).label()),
            icc_ci_lower: ci.as_ref().map(|c| c.lower),
            icc_ci_upper: ci.as_ref().map(|c| c.upper),
            point,
        });
    }

    ctx.create_out_dir()?;
    let report = ReliabilityReport {
        mode: match mode {
            SplitMode::Random => "random",
            SplitMode::Chronological => "chronological",
        },
        max_k,
        n_participants: series.len(),
        points,
    };
    std::fs::write(
        ctx.out_dir.join("reliability.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    std::fs::write(ctx.out_dir.join("reliability.csv"), curve_csv(&report))?;

    manifest::write_manifest(
        &ctx.out_dir,
        "reliability",
        ctx.seed,
        serde_json::json!({ "mode": report.mode, "max_k": max_k, "reps": reps }),
        &[args.tests.clone()],
        &["reliability.json".into(), "reliability.csv".into()],
    )?;
    Ok(0)
}

/// Groups the per-test rows into one value series per participant, ordered
/// by day within each participant. The detector's wider results table is
/// accepted as-is; rows missing a participant, day, or median (a test with
/// no detected turns) are skipped with a note, since they cannot join a
/// test-retest series.
fn load_series(path: &PathBuf) -> Result<Vec<ParticipantSeries>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = csv_columns(&text, &["participant_id", "day", "turn_speed_median"], "tests")?;
    let mut grouped: BTreeMap<String, Vec<(u32, f64)>> = BTreeMap::new();
    let mut skipped = 0usize;
    for (line, fields) in &rows {
        if fields.iter().any(|f| f.is_empty()) {
            skipped += 1;
            continue;
        }
        let day = parse_u32(fields[1], "tests", *line)?;
        let value = parse_f64(fields[2], "tests", *line)?;
        grouped.entry(fields[0].to_string()).or_default().push((day, value));
    }
    if skipped > 0 {
        eprintln!("note: skipped {skipped} test rows without participant, day, or median");
    }
    Ok(grouped
        .into_iter()
        .map(|(participant_id, mut tests)| {
            tests.sort_by_key(|&(day, _)| day);
            ParticipantSeries {
                participant_id,
                values: tests.into_iter().map(|(_, v)| v).collect(),
            }
        })
        .collect())
}

fn curve_csv(report: &ReliabilityReport) -> String {
    let mut out = String::from("k,n_retained,icc,icc_band,icc_ci_lower,icc_ci_upper,sem,mdc\n");
    for p in &report.points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.point.k,
            p.point.n_retained,
            fmt_opt2(p.point.estimate.map(|e| e.icc)),
            p.icc_band.unwrap_or(""),
            fmt_opt2(p.icc_ci_lower),
            fmt_opt2(p.icc_ci_upper),
            fmt_opt2(p.point.estimate.map(|e| e.sem)),
            fmt_opt2(p.point.estimate.map(|e| e.mdc)),
        ));
    }
    out
}
