//! Run manifests: everything needed to regenerate a command's outputs byte for byte.

use crate::table::sha256_hex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved parameters; `replay` runs from these alone.
    pub params: Value,
    pub config_hash: String,
    pub seed: u64,
    pub sample_budgets: BTreeMap<String, u64>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputFile>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// SHA-256 of the canonical (key-sorted, compact) JSON of command and parameters.
pub fn config_hash(command: &str, params: &Value) -> String {
    let canonical = serde_json::json!({ "command": command, "params": params });
    sha256_hex(canonical.to_string().as_bytes())
}

pub fn tool_version() -> String {
    format!("nodal {}", env!("CARGO_PKG_VERSION"))
}
