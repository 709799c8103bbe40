//! Flat `key=value` parameter files.
//!
//! One assignment per line; blank lines and lines starting with `#` are
//! ignored. Values stay strings until a command asks for a typed view,
//! so unknown keys are harmless and a bad value only fails the command
//! that uses it.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    /// Loads a config file if a path was given; `None` yields an empty config.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    bail!(
                        "config {} line {}: expected key=value, got {:?}",
                        path.display(),
                        idx + 1,
                        line
                    );
                };
                values.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(FileConfig { values })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<f64>()
                    .with_context(|| format!("config key {key}: expected a number, got {v:?}"))
            })
            .transpose()
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<usize>()
                    .with_context(|| format!("config key {key}: expected an integer, got {v:?}"))
            })
            .transpose()
    }
}
