//! `uturn score`: classify detected turns against reference annotations.
//!
//! Takes matched lists of `--detected` and `--reference` annotation CSVs
//! (paired by position). Writes one `outcomes_<i>.csv` per pair, a
//! `scores.json` with full-precision per-pair scores plus a cohort F1
//! summary, and a rounded `scores.csv`. Pairs where neither side has a
//! turn carry no score; they are excluded from the summary and reported
//! on stderr.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;
use uturn_core::ingest::{parse_annotations, AnnotationSource, TurnAnnotation};
use uturn_core::matching::{
    classify_turns, cohort_score_stats, score, DetectionScore, MatchKind, MatchOutcome,
    ScoreSummary, DEFAULT_OVERLAP_MIN,
};

use crate::tables::{csv_row, fmt2, fmt_opt2};
use crate::{manifest, Ctx};

#[derive(clap::Args)]
pub struct Args {
    /// Detected-turn annotation CSVs, or one directory of them.
    #[arg(long = "detected", required = true, num_args = 1..)]
    pub detected: Vec<PathBuf>,
    /// Reference annotation CSVs paired with --detected by position, or one
    /// directory paired with the detected directory by session id.
    #[arg(long = "reference", required = true, num_args = 1..)]
    pub reference: Vec<PathBuf>,
    /// Minimum overlap as a fraction of the reference turn for a match.
    #[arg(long)]
    pub overlap_min: Option<f64>,
}

/// Session id behind a file name: the stem with bookkeeping suffixes from
/// the synth/detect pipeline stripped, so `s1_stream_turns.csv` and
/// `s1_truth.csv` both map to `s1`.
fn session_key(path: &std::path::Path) -> String {
    let mut key = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    loop {
        let Some(shorter) = ["_turns", "_truth", "_stream", "_detected"]
            .iter()
            .find_map(|suffix| key.strip_suffix(suffix))
        else {
            return key;
        };
        key = shorter.to_string();
    }
}

fn csv_files(dir: &std::path::Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv"))
        })
        .collect();
    files.sort();
    Ok(files)
}

enum Pairing {
    Matched(PathBuf, PathBuf),
    /// A session id present on only one side.
    Unmatched { detected: Option<PathBuf>, reference: Option<PathBuf>, error: String },
}

/// Pairs inputs either positionally (file lists) or by session id (two
/// directories). Ids found on only one side surface as per-pair errors.
fn build_pairs(args: &Args) -> Result<Result<Vec<Pairing>, String>> {
    let dir_mode = args.detected.len() == 1
        && args.reference.len() == 1
        && args.detected[0].is_dir()
        && args.reference[0].is_dir();
    if !dir_mode {
        if args.detected.len() != args.reference.len() {
            return Ok(Err(format!(
                "{} detected files but {} reference files; they pair by position",
                args.detected.len(),
                args.reference.len()
            )));
        }
        return Ok(Ok(args
            .detected
            .iter()
            .zip(&args.reference)
            .map(|(d, r)| Pairing::Matched(d.clone(), r.clone()))
            .collect()));
    }

    let mut det: BTreeMap<String, PathBuf> = BTreeMap::new();
    for path in csv_files(&args.detected[0])? {
        det.insert(session_key(&path), path);
    }
    let mut reference: BTreeMap<String, PathBuf> = BTreeMap::new();
    for path in csv_files(&args.reference[0])? {
        reference.insert(session_key(&path), path);
    }
    let mut pairs = Vec::new();
    for (key, det_path) in &det {
        match reference.remove(key) {
            Some(ref_path) => pairs.push(Pairing::Matched(det_path.clone(), ref_path)),
            None => pairs.push(Pairing::Unmatched {
                detected: Some(det_path.clone()),
                reference: None,
                error: format!("no reference file for session id {key:?}"),
            }),
        }
    }
    for (key, ref_path) in reference {
        pairs.push(Pairing::Unmatched {
            detected: None,
            reference: Some(ref_path),
            error: format!("no detected file for session id {key:?}"),
        });
    }
    Ok(Ok(pairs))
}

#[derive(Serialize)]
struct PairRecord {
    detected: String,
    reference: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<DetectionScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct ScoresReport<'a> {
    overlap_min: f64,
    pairs: &'a [PairRecord],
    /// Cohort F1 summary in percent; absent when no pair had a defined score.
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<ScoreSummary>,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<u8> {
    let pairings = match build_pairs(args)? {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return Ok(2);
        }
    };
    let overlap_min = match ctx.param_f64("overlap_min", args.overlap_min, DEFAULT_OVERLAP_MIN) {
        Ok(v) if v > 0.0 && v <= 1.0 => v,
        Ok(v) => {
            eprintln!("error: overlap_min must be in (0, 1], got {v}");
            return Ok(2);
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            return Ok(2);
        }
    };
    ctx.create_out_dir()?;

    let mut pairs = Vec::new();
    let mut outputs = Vec::new();
    let mut failures = 0usize;
    let mut inputs = Vec::new();
    for (i, pairing) in pairings.iter().enumerate() {
        let (det_path, ref_path) = match pairing {
            Pairing::Matched(d, r) => (d, r),
            Pairing::Unmatched { detected, reference, error } => {
                eprintln!("error: {error}");
                failures += 1;
                inputs.extend(detected.iter().chain(reference).cloned());
                pairs.push(PairRecord {
                    detected: detected.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                    reference: reference.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                    score: None,
                    error: Some(error.clone()),
                });
                continue;
            }
        };
        inputs.push(det_path.clone());
        inputs.push(ref_path.clone());
        match score_pair(det_path, ref_path, overlap_min) {
            Ok((outcomes, pair_score)) => {
                let name = format!("outcomes_{i}.csv");
                std::fs::write(ctx.out_dir.join(&name), outcomes_csv(&outcomes))
                    .with_context(|| format!("writing {name}"))?;
                outputs.push(name);
                if pair_score.is_none() {
                    eprintln!(
                        "warning: {} vs {}: no turns on either side, nothing to score; \
                         excluded from the cohort summary",
                        det_path.display(),
                        ref_path.display()
                    );
                }
                pairs.push(PairRecord {
                    detected: det_path.display().to_string(),
                    reference: ref_path.display().to_string(),
                    score: pair_score,
                    error: None,
                });
            }
            Err(err) => {
                eprintln!("error: {} vs {}: {err:#}", det_path.display(), ref_path.display());
                failures += 1;
                pairs.push(PairRecord {
                    detected: det_path.display().to_string(),
                    reference: ref_path.display().to_string(),
                    score: None,
                    error: Some(format!("{err:#}")),
                });
            }
        }
    }

    let defined: Vec<DetectionScore> = pairs.iter().filter_map(|p| p.score).collect();
    let summary = cohort_score_stats(&defined).ok();

    let report = ScoresReport { overlap_min, pairs: &pairs, summary };
    std::fs::write(
        ctx.out_dir.join("scores.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    outputs.push("scores.json".into());

    std::fs::write(ctx.out_dir.join("scores.csv"), scores_csv(&pairs))?;
    outputs.push("scores.csv".into());

    manifest::write_manifest(
        &ctx.out_dir,
        "score",
        ctx.seed,
        serde_json::json!({ "overlap_min": overlap_min }),
        &inputs,
        &outputs,
    )?;
    Ok(if failures == 0 { 0 } else { 1 })
}

fn score_pair(
    det_path: &PathBuf,
    ref_path: &PathBuf,
    overlap_min: f64,
) -> Result<(Vec<MatchOutcome>, Option<DetectionScore>)> {
    let det_text = std::fs::read_to_string(det_path).context("reading detected annotations")?;
    let ref_text = std::fs::read_to_string(ref_path).context("reading reference annotations")?;
    let detected = read_annotations(&det_text, AnnotationSource::Detector)?;
    let reference = read_annotations(&ref_text, AnnotationSource::Reference)?;
    let outcomes = classify_turns(&detected, &reference, overlap_min)?;
    let pair_score = score(&outcomes);
    Ok((outcomes, pair_score))
}

/// Accepts plain `start_s,end_s` annotation CSVs and also the wider turn
/// tables written by `uturn detect`, whose first two columns are the same;
/// extra columns are ignored so detector output pipes straight in.
fn read_annotations(text: &str, source: AnnotationSource) -> Result<Vec<TurnAnnotation>> {
    let header = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() <= 2 || cols[..2] != ["start_s", "end_s"] {
        return Ok(parse_annotations(text, source)?);
    }
    let mut anns = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            anyhow::bail!("line {}: expected {} fields, got {}", idx + 1, cols.len(), fields.len());
        }
        let num = |f: &str| -> Result<f64> {
            f.parse::<f64>()
                .map_err(|_| anyhow::anyhow!("line {}: expected a number, got {f:?}", idx + 1))
        };
        anns.push(TurnAnnotation { start_s: num(fields[0])?, end_s: num(fields[1])?, source });
    }
    anns.sort_by(|x, y| x.start_s.total_cmp(&y.start_s));
    Ok(anns)
}

fn outcomes_csv(outcomes: &[MatchOutcome]) -> String {
    let mut out = String::from(
        "kind,detected_start_s,detected_end_s,reference_start_s,reference_end_s,\
         overlap_fraction,onset_error_s,end_error_s\n",
    );
    for o in outcomes {
        let kind = match o.kind {
            MatchKind::Tp => "TP",
            MatchKind::Fp => "FP",
            MatchKind::Fn => "FN",
        };
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{kind},{},{},{},{},{},{},{}\n",
            opt(o.detected.as_ref().map(|a| a.start_s)),
            opt(o.detected.as_ref().map(|a| a.end_s)),
            opt(o.reference.as_ref().map(|a| a.start_s)),
            opt(o.reference.as_ref().map(|a| a.end_s)),
            opt(o.overlap_fraction),
            opt(o.onset_error_s),
            opt(o.end_error_s),
        ));
    }
    out
}

fn scores_csv(pairs: &[PairRecord]) -> String {
    let mut out = String::from(
        "pair,detected,reference,tp,fp,fn,precision_pct,recall_pct,f1_pct,mean_overlap_pct\n",
    );
    for (i, p) in pairs.iter().enumerate() {
        let mut fields = vec![i.to_string(), p.detected.clone(), p.reference.clone()];
        match &p.score {
            Some(s) => {
                fields.extend([
                    s.tp.to_string(),
                    s.fp.to_string(),
                    s.fn_count.to_string(),
                    fmt2(100.0 * s.precision),
                    fmt2(100.0 * s.recall),
                    fmt2(100.0 * s.f1),
                    fmt_opt2(s.mean_overlap_pct),
                ]);
            }
            None => fields.extend(std::iter::repeat(String::new()).take(7)),
        }
        out.push_str(&csv_row(&fields));
    }
    out
}
