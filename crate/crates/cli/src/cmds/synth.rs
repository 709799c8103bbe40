//! `uturn synth`: generate synthetic sensor data with exact ground truth.
//!
//! The spec file is JSON with a `kind` discriminator: a single session
//! (`"kind": "session"`) or a whole monitored cohort (`"kind": "cohort"`).
//! Every field has a default, so `{"kind": "session"}` already works;
//! `--print-default` writes a fully populated template to stdout. All
//! randomness comes from the seed inside the spec, so the same spec file
//! always produces identical data.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use uturn_core::ingest::{annotations_to_csv, stream_to_csv, stream_to_json};
use uturn_core::synth::{generate_cohort, generate_session, CohortSpec, SessionSpec};

use crate::{manifest, Ctx};

#[derive(clap::Args)]
pub struct Args {
    /// JSON spec file; see --print-default for the schema.
    #[arg(long, required_unless_present = "print_default")]
    pub spec: Option<PathBuf>,
    /// Print a default spec (`session` or `cohort`) to stdout and exit.
    #[arg(long, value_parser = ["session", "cohort"])]
    pub print_default: Option<String>,
    /// For cohorts: also write every session stream and truth file.
    #[arg(long)]
    pub materialize: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SpecFile {
    Session(SessionSpec),
    Cohort(CohortSpec),
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<u8> {
    if let Some(kind) = &args.print_default {
        let spec = match kind.as_str() {
            "session" => SpecFile::Session(SessionSpec::default()),
            _ => SpecFile::Cohort(CohortSpec::default()),
        };
        println!("{}", serde_json::to_string_pretty(&spec)?);
        return Ok(0);
    }

    let path = args.spec.as_ref().expect("clap enforces spec without print-default");
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: SpecFile = match serde_json::from_str(&text) {
        Ok(s) => s,
        Err(err) => {
            eprintln!("error: {}: invalid spec: {err}", path.display());
            return Ok(2);
        }
    };

    let mut outputs = Vec::new();
    let config = serde_json::from_str::<serde_json::Value>(&text)?;
    match &spec {
        SpecFile::Session(session) => {
            let (stream, truth) = match generate_session(session) {
                Ok(pair) => pair,
                Err(err) => {
                    eprintln!("error: invalid session spec: {err}");
                    return Ok(2);
                }
            };
            ctx.create_out_dir()?;
            let stream_name = format!("{}_stream.csv", session.session_id);
            let truth_name = format!("{}_truth.csv", session.session_id);
            std::fs::write(ctx.out_dir.join(&stream_name), stream_to_csv(&stream))?;
            std::fs::write(ctx.out_dir.join(&truth_name), annotations_to_csv(&truth))?;
            outputs.push(stream_name);
            outputs.push(truth_name);
        }
        SpecFile::Cohort(cohort) => {
            let data = match generate_cohort(cohort) {
                Ok(d) => d,
                Err(err) => {
                    eprintln!("error: invalid cohort spec: {err}");
                    return Ok(2);
                }
            };
            ctx.create_out_dir()?;
            std::fs::write(
                ctx.out_dir.join("covariates.csv"),
                uturn_core::synth::covariates_to_csv(&data.participants),
            )?;
            outputs.push("covariates.csv".into());
            std::fs::write(
                ctx.out_dir.join("sessions.json"),
                serde_json::to_string_pretty(&data.sessions)? + "\n",
            )?;
            outputs.push("sessions.json".into());

            if args.materialize {
                std::fs::create_dir_all(ctx.out_dir.join("streams"))?;
                std::fs::create_dir_all(ctx.out_dir.join("truth"))?;
                for session in &data.sessions {
                    let (stream, truth) = generate_session(session)
                        .map_err(|e| anyhow::anyhow!("session {}: {e}", session.session_id))?;
                    // JSON envelopes so participant and day survive the
                    // round trip through `detect`; truth carries no metadata.
                    let stream_name = format!("streams/{}.json", session.session_id);
                    let truth_name = format!("truth/{}.csv", session.session_id);
                    std::fs::write(ctx.out_dir.join(&stream_name), stream_to_json(&stream))?;
                    std::fs::write(ctx.out_dir.join(&truth_name), annotations_to_csv(&truth))?;
                    outputs.push(stream_name);
                    outputs.push(truth_name);
                }
            }
        }
    }

    manifest::write_manifest(
        &ctx.out_dir,
        "synth",
        ctx.seed,
        config,
        &[path.clone()],
        &outputs,
    )?;
    Ok(0)
}
