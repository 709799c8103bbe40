//! `uturn agree`: absolute agreement between two paired measurement
//! columns, one row per participant.
//!
//! Reports the single-measure agreement ICC with its interpretation band
//! and a seeded participant-bootstrap CI, the within-participant SEM with
//! the smallest detectable change, and Bland-Altman bias with limits of
//! agreement. JSON keeps full precision; the CSV twin rounds to 2 decimals.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;
use uturn_core::stats::{
    bland_altman, bootstrap_ci, icc_agreement_single, mdc_from_sem, sem_within, BlandAltman,
    IccBand, IccModel, StatsError, BOOTSTRAP_REPS,
};

use crate::tables::{bland_altman_svg, csv_rows, fmt2, fmt_opt2, parse_f64};
use crate::{manifest, Ctx};

#[derive(clap::Args)]
pub struct Args {
    /// CSV with header `id,a,b`: one participant per row, two paired values.
    #[arg(long)]
    pub pairs: PathBuf,
    /// ICC population model label: `two_way_mixed_31` or `two_way_random_21`.
    #[arg(long)]
    pub model: Option<String>,
    /// Bootstrap replicates for the ICC confidence interval (0 disables).
    #[arg(long)]
    pub reps: Option<usize>,
}

fn parse_model(s: &str) -> Result<IccModel> {
    match s {
        "two_way_mixed_31" => Ok(IccModel::TwoWayMixed31),
        "two_way_random_21" => Ok(IccModel::TwoWayRandom21),
        other => anyhow::bail!(
            "unknown icc model {other:?} (expected two_way_mixed_31 or two_way_random_21)"
        ),
    }
}

#[derive(Serialize)]
struct CiJson {
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct AgreementReport {
    n: usize,
    model: IccModel,
    icc: f64,
    icc_unclamped: f64,
    icc_band: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    icc_ci: Option<CiJson>,
    sem: f64,
    mdc: f64,
    bland_altman: BlandAltman,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<u8> {
    let model = match parse_model(ctx.param_str("icc_model", args.model.as_deref(), "two_way_mixed_31")) {
        Ok(m) => m,
        Err(err) => {
            eprintln!("error: {err:#}");
            return Ok(2);
        }
    };
    let reps = match ctx.param_usize("bootstrap_reps", args.reps, BOOTSTRAP_REPS) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("error: {err:#}");
            return Ok(2);
        }
    };

    let text = std::fs::read_to_string(&args.pairs)
        .with_context(|| format!("reading {}", args.pairs.display()))?;
    let rows = csv_rows(&text, &["id", "a", "b"], "pairs")?;
    let mut a = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        a.push(parse_f64(fields[1], "pairs", *line)?);
        b.push(parse_f64(fields[2], "pairs", *line)?);
    }
    let n = a.len();
    if n < 3 {
        eprintln!("error: insufficient participants for an agreement analysis (need at least 3, got {n})");
        return Ok(1);
    }

    let matrix: Vec<Vec<f64>> = a.iter().zip(&b).map(|(&x, &y)| vec![x, y]).collect();
    let icc = icc_agreement_single(&matrix, model)?;
    let sem = sem_within(&matrix)?;
    let mdc = mdc_from_sem(sem);
    let ba = bland_altman(&a, &b)?;

    let icc_ci = if reps > 0 {
        match bootstrap_ci(n, reps, ctx.seed, |idx, _| {
            let resampled: Vec<Vec<f64>> = idx.iter().map(|&i| matrix[i].clone()).collect();
            icc_agreement_single(&resampled, model).ok().map(|r| r.value)
        }) {
            Ok((interval, _)) => Some(CiJson { lower: interval.lower, upper: interval.upper }),
            Err(StatsError::BootstrapUndefined { .. }) => {
                eprintln!("warning: ICC undefined in too many bootstrap replicates; omitting the CI");
                None
            }
            Err(err) => return Err(err.into()),
        }
    } else {
        None
    };

    ctx.create_out_dir()?;
    let report = AgreementReport {
        n,
        model,
        icc: icc.value,
        icc_unclamped: icc.unclamped,
        icc_band: IccBand::classify(icc.value).label(),
        icc_ci,
        sem,
        mdc,
        bland_altman: ba,
    };
    std::fs::write(
        ctx.out_dir.join("agreement.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    std::fs::write(ctx.out_dir.join("agreement.csv"), agreement_csv(&report))?;

    let points: Vec<(f64, f64)> = a.iter().zip(&b).map(|(&x, &y)| ((x + y) / 2.0, x - y)).collect();
    std::fs::write(
        ctx.out_dir.join("bland_altman.svg"),
        bland_altman_svg(&points, &report.bland_altman, "pair mean", "difference a - b"),
    )?;

    manifest::write_manifest(
        &ctx.out_dir,
        "agree",
        ctx.seed,
        serde_json::json!({ "model": report.model, "reps": reps }),
        &[args.pairs.clone()],
        &["agreement.json".into(), "agreement.csv".into(), "bland_altman.svg".into()],
    )?;
    Ok(0)
}

fn agreement_csv(r: &AgreementReport) -> String {
    let mut out = String::from("metric,value\n");
    let mut push = |k: &str, v: String| out.push_str(&format!("{k},{v}\n"));
    push("n", r.n.to_string());
    push("icc", fmt2(r.icc));
    push("icc_band", r.icc_band.to_string());
    push("icc_ci_lower", fmt_opt2(r.icc_ci.as_ref().map(|c| c.lower)));
    push("icc_ci_upper", fmt_opt2(r.icc_ci.as_ref().map(|c| c.upper)));
    push("sem", fmt2(r.sem));
    push("mdc", fmt2(r.mdc));
    push("bias", fmt2(r.bland_altman.bias));
    push("loa_lower", fmt2(r.bland_altman.loa_lower));
    push("loa_upper", fmt2(r.bland_altman.loa_upper));
    out
}
