use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub artifact_version: String,
    pub command_line: Vec<String>,
    pub config: serde_json::Value,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// Input path → sha256 of its bytes; bundled defaults are keyed
    /// `builtin:<name>`.
    pub inputs: BTreeMap<String, String>,
    /// Output file name → sha256.
    pub outputs: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

/// Collects inputs and outputs for one command and writes them into `out`.
pub struct Run {
    out: PathBuf,
    manifest: RunManifest,
}

impl Run {
    pub fn start(out: &Path, config: serde_json::Value, seed: Option<u64>) -> CliResult<Run> {
        fs::create_dir_all(out).map_err(|e| CliError::input(format!("{}: {e}", out.display())))?;
        let config_digest = sha256_hex(serde_json::to_string(&config)?.as_bytes());
        Ok(Run {
            out: out.to_path_buf(),
            manifest: RunManifest {
                tool: "gridgame".into(),
                artifact_version: env!("CARGO_PKG_VERSION").into(),
                command_line: std::env::args().collect(),
                config,
                config_digest,
                seed,
                started_unix: unix_now(),
                finished_unix: 0,
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                warnings: Vec::new(),
            },
        })
    }

    pub fn input(&mut self, key: impl Into<String>, bytes: &[u8]) {
        self.manifest.inputs.insert(key.into(), sha256_hex(bytes));
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        eprintln!("warning: {message}");
        self.manifest.warnings.push(message);
    }

    /// Write `name` inside the output directory and record its digest.
    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
        self.manifest.outputs.insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn finish(mut self) -> CliResult<RunManifest> {
        self.manifest.finished_unix = unix_now();
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        let path = self.out.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
        Ok(self.manifest)
    }
}
