//! TOML config with one flat section per command, merged under the command-line flags.

use crate::exit::CliError;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::path::Path;

pub const SECTIONS: [&str; 7] =
    ["constants", "dnr", "moments", "kostlan_chaos", "kostlan_simulate", "kostlan_kacrice", "kostlan_crofton"];

/// Environment variable supplying the seed when neither flag nor config sets one.
pub const SEED_ENV: &str = "NODAL_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e| CliError::usage(format!("config: {e}")))?;
        for (k, v) in &table {
            if !SECTIONS.contains(&k.as_str()) {
                return Err(CliError::usage(format!("config: unknown section [{k}]")));
            }
            if !v.is_table() {
                return Err(CliError::usage(format!("config: `{k}` must be a section")));
            }
        }
        Ok(Self { table })
    }

    pub fn section<T: DeserializeOwned + Default>(&self, name: &str) -> Result<T, CliError> {
        match self.table.get(name) {
            None => Ok(T::default()),
            Some(v) => v.clone().try_into().map_err(|e| CliError::usage(format!("config [{name}]: {e}"))),
        }
    }
}

/// Field-wise `flags.or(file)` for structs whose fields are all `Option`.
pub fn overlay<T: Serialize + DeserializeOwned>(flags: &T, file: &T) -> Result<T, CliError> {
    let to_obj = |x: &T| match serde_json::to_value(x) {
        Ok(serde_json::Value::Object(m)) => Ok(m),
        _ => Err(CliError::Other(anyhow::anyhow!("argument struct is not a map"))),
    };
    let mut merged = to_obj(file)?;
    for (k, v) in to_obj(flags)? {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(serde_json::Value::Object(merged)).map_err(|e| CliError::Other(e.into()))
}

/// Flag or config value, then `NODAL_SEED`, then the built-in default.
pub fn resolve_seed(explicit: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::usage(format!("{SEED_ENV}={v:?} is not a 64-bit unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
