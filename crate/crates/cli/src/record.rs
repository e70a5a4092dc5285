use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::emit::{sha256_hex, ManifestEntry};
use crate::CliError;

pub const RECORD_FILE: &str = "run.json";

/// What was run, by which version, how long it took and which files it wrote.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub wall_time_s: f64,
    pub outputs: Vec<ManifestEntry>,
}

impl RunRecord {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(RECORD_FILE);
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Re-hashes every file listed in `dir/run.json` and reports the first
/// missing or altered one.
pub fn verify_manifest(dir: &Path) -> Result<usize, CliError> {
    let path = dir.join(RECORD_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let outputs: Vec<ManifestEntry> = serde_json::from_value(value["outputs"].clone())
        .map_err(|e| CliError::Config(format!("malformed manifest: {e}")))?;
    for entry in &outputs {
        let file = dir.join(&entry.path);
        let data = fs::read(&file).map_err(|e| CliError::io(&file, e))?;
        if sha256_hex(&data) != entry.sha256 {
            return Err(CliError::Config(format!("checksum mismatch for {}", entry.path)));
        }
    }
    Ok(outputs.len())
}
