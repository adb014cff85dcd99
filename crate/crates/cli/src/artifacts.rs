//! Artifact writing: metadata blocks, CSV/JSON emission, atomic file
//! replacement.
//!
//! Artifacts deliberately carry no timestamps; identical inputs must produce
//! byte-identical files.

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use serde::Serialize;
use std::path::Path;

pub const TOOL_NAME: &str = "gradiflux";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block embedded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    /// `key = value` pairs for every default the config resolution applied.
    pub defaults_applied: Vec<String>,
    /// `key = value` pairs for resolved command parameters.
    pub parameters: Vec<String>,
}

impl Metadata {
    pub fn for_run(config: &RunConfig, parameters: Vec<String>) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            config_hash: config.config_hash.clone(),
            seed: config.mc_seed,
            defaults_applied: config.defaults_applied.clone(),
            parameters,
        }
    }

    fn comment_block(&self, subcommand: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {} v{} {}\n", self.tool, self.version, subcommand));
        out.push_str(&format!("# config_hash = {}\n", self.config_hash));
        out.push_str(&format!("# seed = {}\n", self.seed));
        for p in &self.parameters {
            out.push_str(&format!("# param: {p}\n"));
        }
        for d in &self.defaults_applied {
            out.push_str(&format!("# default: {d}\n"));
        }
        out
    }
}

/// Whole-file atomic write (write to a sibling temp file, then rename).
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::Io(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("cannot rename into {}: {e}", path.display())))?;
    Ok(())
}

/// Emit a CSV artifact with the metadata comment block and a header line.
pub fn write_csv(
    path: &Path,
    subcommand: &str,
    metadata: &Metadata,
    header: &str,
    rows: &[String],
) -> CliResult<()> {
    let mut out = metadata.comment_block(subcommand);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Emit a JSON artifact (pretty, stable key order via serde_json's
/// preserve-insertion maps on plain structs).
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// Render an f64 with full round-trip precision.
pub fn num(v: f64) -> String {
    format!("{v}")
}
