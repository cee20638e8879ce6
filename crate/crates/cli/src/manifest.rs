//! Run manifests: every command writes exactly one `manifest.json` next to
//! its outputs recording the command, the full parameter set, the seed, the
//! tool version, and sha256 digests of every input file. Two runs with the
//! same manifest (timestamp aside) produce byte-identical outputs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
    pub input_digests: BTreeMap<String, String>,
    pub start_unix_seconds: u64,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            params: BTreeMap::new(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digests: BTreeMap::new(),
            start_unix_seconds: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn digest_input(&mut self, path: &Path) -> Result<&mut Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.input_digests.insert(path.display().to_string(), hex);
        Ok(self)
    }

    pub fn write(&self, out_dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::usage(format!("manifest serialization: {e}")))?;
        std::fs::write(out_dir.join("manifest.json"), text + "\n")
            .map_err(|e| CliError::usage(format!("cannot write manifest: {e}")))?;
        Ok(())
    }
}
