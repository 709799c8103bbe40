//! `uturn correlate`: relate per-participant turn speed to disability
//! covariates.
//!
//! Joins a covariates table with either precomputed aggregates or raw
//! per-test rows (collapsed to each participant's median). Reports the
//! Spearman correlation between aggregate turn speed and the disability
//! score, plus Mann-Whitney group comparisons (fallers vs non-fallers,
//! walking aid vs none, and the extreme disability levels).

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;
use uturn_core::matching::summarize_values;
use uturn_core::stats::{
    mann_whitney, median_value, p_value_stars, spearman, PValueMethod, RhoBand,
};

use crate::tables::{csv_columns, csv_rows, fmt2, fmt_opt2, parse_bool01, parse_f64, parse_u32};
use crate::{manifest, Ctx};

#[derive(clap::Args)]
pub struct Args {
    /// Covariates CSV: `participant_id,level,edss_proxy,fall_last_year,walking_aid[,mean_turn_duration_s]`.
    #[arg(long)]
    pub covariates: PathBuf,
    /// Per-participant aggregates CSV (`participant_id,value`).
    #[arg(long)]
    pub aggregates: Option<PathBuf>,
    /// Per-test CSV with `participant_id`, `day`, and `turn_speed_median`
    /// columns; each participant is collapsed to the median over their tests.
    #[arg(long)]
    pub tests: Option<PathBuf>,
}

struct Covariate {
    level: String,
    edss: f64,
    fall: bool,
    aid: bool,
}

#[derive(Serialize)]
struct SpearmanJson {
    rho: f64,
    band: &'static str,
    n: usize,
}

#[derive(Serialize)]
struct GroupTest {
    comparison: String,
    group_a: String,
    group_b: String,
    n_a: usize,
    n_b: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    median_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    median_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stars: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<PValueMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct LevelRow {
    level: String,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    median_speed: Option<f64>,
}

#[derive(Serialize)]
struct CorrelateReport {
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    spearman_speed_vs_disability: Option<SpearmanJson>,
    levels: Vec<LevelRow>,
    groups: Vec<GroupTest>,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<u8> {
    let source = match (&args.aggregates, &args.tests) {
        (Some(p), None) => ("aggregates", p.clone()),
        (None, Some(p)) => ("tests", p.clone()),
        _ => {
            eprintln!("error: give exactly one of --aggregates or --tests");
            return Ok(2);
        }
    };

    let covariates = load_covariates(&args.covariates)?;
    let speeds = match source.0 {
        "aggregates" => load_aggregates(&source.1)?,
        _ => load_test_medians(&source.1)?,
    };

    // Inner join on participant id; order by id for deterministic output.
    let mut joined: Vec<(&str, f64, &Covariate)> = Vec::new();
    let mut unmatched = 0usize;
    for (id, speed) in &speeds {
        match covariates.get(id.as_str()) {
            Some(cov) => joined.push((id, *speed, cov)),
            None => unmatched += 1,
        }
    }
    if unmatched > 0 {
        eprintln!("warning: {unmatched} participants with measurements but no covariates row; skipped");
    }
    let n = joined.len();
    if n < 3 {
        eprintln!("error: insufficient joined participants for a correlation analysis (need at least 3, got {n})");
        return Ok(1);
    }

    let speed: Vec<f64> = joined.iter().map(|j| j.1).collect();
    let edss: Vec<f64> = joined.iter().map(|j| j.2.edss).collect();
    let spearman_json = match spearman(&speed, &edss) {
        Ok(rho) => Some(SpearmanJson { rho, band: RhoBand::classify(rho).label(), n }),
        Err(err) => {
            eprintln!("warning: spearman correlation undefined: {err}");
            None
        }
    };

    let mut groups = Vec::new();
    groups.push(group_test(
        "fall_last_year",
        "no_fall",
        "fall",
        &select(&joined, |c| !c.fall),
        &select(&joined, |c| c.fall),
    ));
    groups.push(group_test(
        "walking_aid",
        "no_aid",
        "aid",
        &select(&joined, |c| !c.aid),
        &select(&joined, |c| c.aid),
    ));

    // Per-level medians, most to least able by median speed.
    let mut by_level: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (_, speed, cov) in &joined {
        by_level.entry(cov.level.as_str()).or_default().push(*speed);
    }
    let mut levels: Vec<LevelRow> = by_level
        .iter()
        .map(|(level, vals)| LevelRow {
            level: level.to_string(),
            n: vals.len(),
            median_speed: median_value(vals),
        })
        .collect();
    levels.sort_by(|a, b| {
        b.median_speed
            .unwrap_or(f64::NEG_INFINITY)
            .total_cmp(&a.median_speed.unwrap_or(f64::NEG_INFINITY))
            .then_with(|| a.level.cmp(&b.level))
    });
    if levels.len() >= 2 {
        let fastest = levels.first().unwrap().level.clone();
        let slowest = levels.last().unwrap().level.clone();
        groups.push(group_test(
            "extreme_levels",
            &fastest,
            &slowest,
            &by_level[fastest.as_str()],
            &by_level[slowest.as_str()],
        ));
    }

    ctx.create_out_dir()?;
    let report = CorrelateReport {
        n,
        spearman_speed_vs_disability: spearman_json,
        levels,
        groups,
    };
    std::fs::write(
        ctx.out_dir.join("correlations.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    std::fs::write(ctx.out_dir.join("correlations.csv"), correlate_csv(&report))?;
    std::fs::write(ctx.out_dir.join("groups.csv"), groups_csv(&joined, &report.levels))?;

    manifest::write_manifest(
        &ctx.out_dir,
        "correlate",
        ctx.seed,
        serde_json::json!({ "measurements": source.0 }),
        &[args.covariates.clone(), source.1],
        &["correlations.json".into(), "correlations.csv".into(), "groups.csv".into()],
    )?;
    Ok(0)
}

/// Box-plot shaped distribution summary of turn speed for every group the
/// report compares: each disability level, fallers vs non-fallers, walking
/// aid vs none.
fn groups_csv(joined: &[(&str, f64, &Covariate)], levels: &[LevelRow]) -> String {
    let mut out = String::from("group,n,mean,sd,min,p05,q1,median,q3,p95,max\n");
    let mut push = |name: &str, values: &[f64]| {
        if values.is_empty() {
            return;
        }
        let s = summarize_values(values);
        out.push_str(&format!(
            "{name},{},{},{},{},{},{},{},{},{},{}\n",
            s.n,
            fmt2(s.mean),
            fmt2(s.sd),
            fmt2(s.min),
            fmt2(s.p05),
            fmt2(s.q1),
            fmt2(s.median),
            fmt2(s.q3),
            fmt2(s.p95),
            fmt2(s.max),
        ));
    };
    for lv in levels {
        let values: Vec<f64> = joined
            .iter()
            .filter(|(_, _, c)| c.level == lv.level)
            .map(|(_, s, _)| *s)
            .collect();
        push(&format!("level:{}", lv.level), &values);
    }
    push("no_fall", &select(joined, |c| !c.fall));
    push("fall", &select(joined, |c| c.fall));
    push("no_aid", &select(joined, |c| !c.aid));
    push("aid", &select(joined, |c| c.aid));
    out
}

fn select(joined: &[(&str, f64, &Covariate)], pred: impl Fn(&Covariate) -> bool) -> Vec<f64> {
    joined.iter().filter(|(_, _, c)| pred(c)).map(|(_, s, _)| *s).collect()
}

fn group_test(comparison: &str, name_a: &str, name_b: &str, a: &[f64], b: &[f64]) -> GroupTest {
    let mut gt = GroupTest {
        comparison: comparison.to_string(),
        group_a: name_a.to_string(),
        group_b: name_b.to_string(),
        n_a: a.len(),
        n_b: b.len(),
        median_a: median_value(a),
        median_b: median_value(b),
        u: None,
        p: None,
        stars: None,
        method: None,
        note: None,
    };
    match mann_whitney(a, b) {
        Ok(mw) => {
            gt.u = Some(mw.u);
            gt.p = Some(mw.p);
            gt.stars = Some(p_value_stars(mw.p));
            gt.method = Some(mw.method);
        }
        Err(err) => gt.note = Some(err.to_string()),
    }
    gt
}

fn load_covariates(path: &PathBuf) -> Result<BTreeMap<String, Covariate>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let base = ["participant_id", "level", "edss_proxy", "fall_last_year", "walking_aid"];
    let with_duration =
        ["participant_id", "level", "edss_proxy", "fall_last_year", "walking_aid", "mean_turn_duration_s"];
    let rows = csv_rows(&text, &with_duration, "covariates")
        .or_else(|_| csv_rows(&text, &base, "covariates"))?;
    let mut out = BTreeMap::new();
    for (line, fields) in &rows {
        out.insert(
            fields[0].to_string(),
            Covariate {
                level: fields[1].to_string(),
                edss: parse_f64(fields[2], "covariates", *line)?,
                fall: parse_bool01(fields[3], "covariates", *line)?,
                aid: parse_bool01(fields[4], "covariates", *line)?,
            },
        );
    }
    Ok(out)
}

fn load_aggregates(path: &PathBuf) -> Result<BTreeMap<String, f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = csv_rows(&text, &["participant_id", "value"], "aggregates")?;
    let mut out = BTreeMap::new();
    for (line, fields) in &rows {
        out.insert(fields[0].to_string(), parse_f64(fields[1], "aggregates", *line)?);
    }
    Ok(out)
}

/// Median turn speed per participant from per-test rows. The detector's
/// wider results table is accepted as-is; rows missing a participant or a
/// median (a test with no detected turns) are skipped with a note. Days are
/// validated when present but not needed for a pooled median.
fn load_test_medians(path: &PathBuf) -> Result<BTreeMap<String, f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = csv_columns(&text, &["participant_id", "day", "turn_speed_median"], "tests")?;
    let mut grouped: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut skipped = 0usize;
    for (line, fields) in &rows {
        if fields[0].is_empty() || fields[2].is_empty() {
            skipped += 1;
            continue;
        }
        if !fields[1].is_empty() {
            parse_u32(fields[1], "tests", *line)?;
        }
        grouped
            .entry(fields[0].to_string())
            .or_default()
            .push(parse_f64(fields[2], "tests", *line)?);
    }
    if skipped > 0 {
        eprintln!("note: skipped {skipped} test rows without participant or median");
    }
    Ok(grouped
        .into_iter()
        .filter_map(|(id, vals)| median_value(&vals).map(|m| (id, m)))
        .collect())
}

fn correlate_csv(r: &CorrelateReport) -> String {
    let mut out = String::from("metric,value\n");
    let mut push = |k: &str, v: String| out.push_str(&format!("{k},{v}\n"));
    push("n", r.n.to_string());
    push("rho", fmt_opt2(r.spearman_speed_vs_disability.as_ref().map(|s| s.rho)));
    push(
        "rho_band",
        r.spearman_speed_vs_disability.as_ref().map(|s| s.band.to_string()).unwrap_or_default(),
    );
    for lv in &r.levels {
        push(&format!("median_speed[{}]", lv.level), fmt_opt2(lv.median_speed));
    }
    for g in &r.groups {
        push(&format!("u[{}]", g.comparison), fmt_opt2(g.u));
        push(
            &format!("p[{}]", g.comparison),
            g.p.map(|p| format!("{p:.4}")).unwrap_or_default(),
        );
        push(
            &format!("stars[{}]", g.comparison),
            g.stars.map(str::to_string).unwrap_or_default(),
        );
    }
    out
}
