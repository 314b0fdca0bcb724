use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Provenance record written as `manifest.json` into every output directory.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: &'static str,
    pub args: Vec<String>,
    pub config_paths: Vec<String>,
    pub inputs: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub started_at: String,
    pub finished_at: String,
    pub output_dir: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn start(command: &str, out: &Path) -> Self {
        RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION"),
            args: std::env::args().collect(),
            config_paths: Vec::new(),
            inputs: BTreeMap::new(),
            seeds: Vec::new(),
            started_at: chrono::Utc::now().to_rfc3339(),
            finished_at: String::new(),
            output_dir: out.display().to_string(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.inputs.insert(name.to_string(), value.to_string());
        self
    }

    pub fn config(&mut self, path: &Path) -> &mut Self {
        self.config_paths.push(path.display().to_string());
        self
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.seeds.push(seed);
        self
    }

    /// Records the written files (relative to the output directory) and
    /// writes the manifest next to them.
    pub fn finish(mut self, out: &Path, outputs: &[PathBuf]) -> Result<()> {
        self.finished_at = chrono::Utc::now().to_rfc3339();
        self.outputs = outputs
            .iter()
            .map(|p| p.strip_prefix(out).unwrap_or(p).display().to_string())
            .collect();
        let path = out.join("manifest.json");
        let text = serde_json::to_string_pretty(&self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}
