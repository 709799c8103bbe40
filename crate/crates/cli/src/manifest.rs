//! Run manifests.
//!
//! Each command writes `manifest.json` next to its outputs: the tool
//! version, the subcommand, the seed, the fully resolved parameters,
//! a SHA-256 digest per input file, and the list of files written.
//! Deliberately no timestamps, hostnames, or absolute output paths, so
//! the same command on the same inputs produces the same manifest.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    /// Resolved parameters after merging flags, config file, and defaults.
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    /// File names written into the output directory, in write order.
    pub outputs: Vec<String>,
}

/// Hex SHA-256 of a file, or `"unreadable"` when the bytes cannot be read
/// (the command itself reports that failure; the manifest still lists the
/// input).
pub fn digest_file(path: &Path) -> String {
    match std::fs::read(path) {
        Ok(bytes) => {
            let digest = Sha256::digest(&bytes);
            digest.iter().map(|b| format!("{b:02x}")).collect()
        }
        Err(_) => "unreadable".to_string(),
    }
}

pub fn write_manifest(
    out_dir: &Path,
    command: &str,
    seed: u64,
    config: serde_json::Value,
    inputs: &[PathBuf],
    outputs: &[String],
) -> Result<()> {
    let manifest = RunManifest {
        tool: "uturn",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        seed,
        config,
        inputs: inputs
            .iter()
            .map(|p| InputDigest { path: p.display().to_string(), sha256: digest_file(p) })
            .collect(),
        outputs: outputs.to_vec(),
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_matches_known_vector() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("abc.txt");
        std::fs::write(&path, "abc").unwrap();
        assert_eq!(
            digest_file(&path),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn missing_input_is_marked_unreadable() {
        assert_eq!(digest_file(Path::new("/nonexistent/x.csv")), "unreadable");
    }

    #[test]
    fn manifest_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.csv");
        std::fs::write(&input, "id,a,b\n").unwrap();
        let cfg = serde_json::json!({ "reps": 500 });
        write_manifest(dir.path(), "agree", 7, cfg.clone(), &[input.clone()], &["agreement.json".into()])
            .unwrap();
        let first = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        write_manifest(dir.path(), "agree", 7, cfg, &[input], &["agreement.json".into()]).unwrap();
        let second = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        assert_eq!(first, second);
        assert!(first.contains("\"seed\": 7"));
        assert!(!first.to_lowercase().contains("timestamp"));
    }
}
