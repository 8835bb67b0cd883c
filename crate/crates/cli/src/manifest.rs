//! Run manifests: the fully resolved configuration, the command, and the
//! code version, written beside every output. Identical manifests must
//! reproduce identical data outputs.

use crate::CliError;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest<C> {
    pub command: String,
    pub version: String,
    pub config: C,
}

pub fn write_manifest<C: Serialize>(dir: &Path, command: &str, config: &C) -> Result<(), CliError> {
    let manifest = Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

pub fn read_manifest<C: DeserializeOwned>(dir: &Path) -> Result<Manifest<C>, CliError> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed manifest {}: {e}", path.display())))
}

/// Merge precedence: command-line flag, then config-file value, then default.
pub fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Load an optional JSON config file of partial settings.
pub fn load_partial<C: DeserializeOwned + Default>(
    path: &Option<std::path::PathBuf>,
) -> Result<C, CliError> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", p.display())))
        }
    }
}
