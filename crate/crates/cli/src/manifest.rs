use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::args::Command;
use crate::error::CliError;

/// Everything needed to reproduce an output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub timestamp: String,
    pub library_version: String,
    pub output_paths: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &Command, output_paths: Vec<PathBuf>) -> Result<Self, CliError> {
        let mut parameters = serde_json::to_value(command).map_err(|e| CliError::Usage(e.to_string()))?;
        if let Value::Object(map) = &mut parameters {
            map.remove("command");
        }
        Ok(Self {
            command: command.name().to_string(),
            parameters,
            seed: command.seed(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            library_version: meander_sojourn::VERSION.to_string(),
            output_paths,
        })
    }

    /// Rebuilds the recorded command.
    pub fn command(&self) -> Result<Command, CliError> {
        let mut map = match &self.parameters {
            Value::Object(m) => m.clone(),
            _ => Map::new(),
        };
        map.insert("command".into(), Value::String(self.command.clone()));
        serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Usage(format!("unreadable manifest: {e}")))
    }

    /// Reads a manifest from a sidecar or a report that embeds one.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let inner = value.get("manifest").cloned().unwrap_or(value);
        serde_json::from_value(inner).map_err(|e| CliError::Usage(format!("{}: no manifest: {e}", path.display())))
    }
}

/// `<out>.manifest.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes `{ "manifest": ..., extra... }` next to `out`.
pub fn write_sidecar(out: &Path, manifest: &RunManifest, extra: Map<String, Value>) -> Result<(), CliError> {
    let mut body = extra;
    body.insert("manifest".into(), serde_json::to_value(manifest).expect("manifest serializes"));
    let text = serde_json::to_string_pretty(&Value::Object(body)).expect("JSON value serializes");
    fs::write(sidecar_path(out), text + "\n")?;
    Ok(())
}
