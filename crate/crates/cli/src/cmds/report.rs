//! `uturn report`: human-oriented tables and a Bland-Altman figure from
//! earlier outputs.
//!
//! `--scores` takes the `scores.json` written by `uturn score` and
//! summarizes precision, recall, and F1 across pairs (percent, with a
//! normal-approximation CI on the mean). `--pairs` takes an `id,a,b` CSV
//! and produces Bland-Altman numbers plus a scatter SVG. At least one
//! input is required.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use uturn_core::matching::{summarize_values, DetectionScore, ScoreSummary};
use uturn_core::stats::{bland_altman, BlandAltman};

use crate::tables::{bland_altman_svg, csv_row, csv_rows, fmt2, parse_f64};
use crate::{manifest, Ctx};

#[derive(clap::Args)]
pub struct Args {
    /// scores.json from `uturn score`.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Paired measurements CSV with header `id,a,b`.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
}

#[derive(Deserialize)]
struct ScoresFile {
    pairs: Vec<ScoresPair>,
}

#[derive(Deserialize)]
struct ScoresPair {
    #[serde(default)]
    score: Option<DetectionScore>,
}

#[derive(Serialize)]
struct ScoreBlock {
    n_pairs: usize,
    precision: ScoreSummary,
    recall: ScoreSummary,
    f1: ScoreSummary,
}

#[derive(Serialize)]
struct Report {
    #[serde(skip_serializing_if = "Option::is_none")]
    detection: Option<ScoreBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agreement: Option<BlandAltman>,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<u8> {
    if args.scores.is_none() && args.pairs.is_none() {
        eprintln!("error: nothing to report; give --scores and/or --pairs");
        return Ok(2);
    }
    ctx.create_out_dir()?;
    let mut outputs = Vec::new();
    let mut inputs = Vec::new();

    let detection = match &args.scores {
        Some(path) => {
            inputs.push(path.clone());
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let file: ScoresFile = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let defined: Vec<DetectionScore> =
                file.pairs.iter().filter_map(|p| p.score).collect();
            if defined.is_empty() {
                eprintln!("error: {}: no defined scores to summarize", path.display());
                return Ok(1);
            }
            let pct = |f: fn(&DetectionScore) -> f64| {
                summarize_values(&defined.iter().map(|s| 100.0 * f(s)).collect::<Vec<_>>())
            };
            Some(ScoreBlock {
                n_pairs: defined.len(),
                precision: pct(|s| s.precision),
                recall: pct(|s| s.recall),
                f1: pct(|s| s.f1),
            })
        }
        None => None,
    };

    let agreement = match &args.pairs {
        Some(path) => {
            inputs.push(path.clone());
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let rows = csv_rows(&text, &["id", "a", "b"], "pairs")?;
            let mut a = Vec::with_capacity(rows.len());
            let mut b = Vec::with_capacity(rows.len());
            for (line, fields) in &rows {
                a.push(parse_f64(fields[1], "pairs", *line)?);
                b.push(parse_f64(fields[2], "pairs", *line)?);
            }
            if a.len() < 2 {
                eprintln!("error: {}: need at least 2 pairs, got {}", path.display(), a.len());
                return Ok(1);
            }
            let ba = bland_altman(&a, &b)?;
            let points: Vec<(f64, f64)> =
                a.iter().zip(&b).map(|(&x, &y)| ((x + y) / 2.0, x - y)).collect();
            let svg = bland_altman_svg(
                &points,
                &ba,
                "pair mean turn speed (rad/s)",
                "difference a - b (rad/s)",
            );
            std::fs::write(ctx.out_dir.join("bland_altman.svg"), svg)?;
            outputs.push("bland_altman.svg".to_string());
            Some(ba)
        }
        None => None,
    };

    let report = Report { detection, agreement };
    std::fs::write(
        ctx.out_dir.join("report.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    outputs.push("report.json".into());
    std::fs::write(ctx.out_dir.join("report.csv"), report_csv(&report))?;
    outputs.push("report.csv".into());

    manifest::write_manifest(
        &ctx.out_dir,
        "report",
        ctx.seed,
        serde_json::json!({
            "scores": args.scores.as_ref().map(|p| p.display().to_string()),
            "pairs": args.pairs.as_ref().map(|p| p.display().to_string()),
        }),
        &inputs,
        &outputs,
    )?;
    Ok(0)
}

fn report_csv(report: &Report) -> String {
    let mut out = String::from("metric,n,mean,ci_lower,ci_upper,sd,min,p05,q1,median,q3,p95,max\n");
    if let Some(d) = &report.detection {
        for (name, s) in [("precision_pct", &d.precision), ("recall_pct", &d.recall), ("f1_pct", &d.f1)] {
            out.push_str(&csv_row(&[
                name.to_string(),
                s.n.to_string(),
                fmt2(s.mean),
                fmt2(s.ci_lower),
                fmt2(s.ci_upper),
                fmt2(s.sd),
                fmt2(s.min),
                fmt2(s.p05),
                fmt2(s.q1),
                fmt2(s.median),
                fmt2(s.q3),
                fmt2(s.p95),
                fmt2(s.max),
            ]));
        }
    }
    if let Some(ba) = &report.agreement {
        for (name, v) in [
            ("bias", ba.bias),
            ("loa_lower", ba.loa_lower),
            ("loa_upper", ba.loa_upper),
        ] {
            let mut fields = vec![name.to_string(), ba.n.to_string(), fmt2(v)];
            fields.extend(std::iter::repeat(String::new()).take(10));
            out.push_str(&csv_row(&fields));
        }
    }
    out
}
