use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliError;
use crate::model::ModelSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to rerun an artifact-producing command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command_line: Vec<String>,
    pub model: Option<ModelSpec>,
    pub seed: Option<u64>,
    /// Numeric parameters and thresholds, keyed by flag name.
    pub thresholds: BTreeMap<String, serde_json::Value>,
    pub outputs: Vec<String>,
    /// Seconds since the Unix epoch; the only field that differs between reruns.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(model: Option<ModelSpec>, seed: Option<u64>) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command_line: std::env::args().collect(),
            model,
            seed,
            thresholds: BTreeMap::new(),
            outputs: Vec::new(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.thresholds.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
        );
        self
    }

    /// Writes `<artifact>.manifest.json` next to `artifact`.
    pub fn write_beside(mut self, artifact: &Path) -> Result<PathBuf, CliError> {
        self.outputs.push(artifact.display().to_string());
        let mut name = artifact.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let text = serde_json::to_string_pretty(&self).map_err(|e| CliError::Usage(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
