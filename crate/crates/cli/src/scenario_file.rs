//! Flat TOML scenario files and `key=value` overrides.

use std::path::Path;

use css_lab::harness::Scenario;
use sha2::{Digest, Sha256};

use crate::error::{io, CliError};

fn value_text(v: &toml::Value) -> Option<String> {
    Some(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => format!("{f:?}"),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(items) => {
            let parts: Option<Vec<String>> = items
                .iter()
                .map(|x| match x {
                    toml::Value::Array(_) | toml::Value::Table(_) => None,
                    other => value_text(other),
                })
                .collect();
            parts?.join(",")
        }
        _ => return None,
    })
}

/// Reads a flat key-value scenario, applies `overrides` on top and validates.
pub fn parse_scenario(path: &Path, overrides: &[String]) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    let file_err = |detail: String| CliError::ScenarioFile { path: path.to_path_buf(), detail };
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| file_err(e.message().to_string()))?;
    let mut sc = Scenario::default();
    for (key, value) in &table {
        let v = value_text(value).ok_or_else(|| file_err(format!("{key}: nested values are not allowed")))?;
        sc.set(key, &v)?;
    }
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| CliError::Override(o.clone()))?;
        sc.set(k.trim(), v.trim())?;
    }
    sc.validate()?;
    Ok(sc)
}

/// SHA-256 of the resolved scenario's canonical listing.
pub fn scenario_digest(sc: &Scenario) -> String {
    hex::encode(Sha256::digest(sc.canonical_text().as_bytes()))
}
