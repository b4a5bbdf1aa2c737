//! Run manifests: every command records what it ran (command name, tool
//! version, master seed, the full resolved parameter set), how long it took
//! and the SHA-256 digest of every file it wrote. Re-running with the
//! manifest's parameters reproduces byte-identical outputs, so a digest
//! mismatch later is proof the data did not come from the recorded run.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Config, ConfigError};

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub master_seed: u64,
    pub threads: usize,
    pub duration_seconds: f64,
    pub parameters: Config,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, threads: usize, config: &Config) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: seed,
            threads,
            duration_seconds: 0.0,
            parameters: config.clone(),
            outputs: Vec::new(),
        }
    }

    /// Writes `content` into `out_dir/name` and records its digest.
    pub fn write_output(
        &mut self,
        out_dir: &Path,
        name: &str,
        content: &[u8],
    ) -> Result<(), ConfigError> {
        let path = out_dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
        let mut hasher = Sha256::new();
        hasher.update(content);
        self.outputs.push(OutputRecord {
            file: name.to_string(),
            sha256: format!("{:x}", hasher.finalize()),
            bytes: content.len() as u64,
        });
        Ok(())
    }

    /// Serializes the manifest to `out_dir/<command>_manifest.json`.
    pub fn store(&self, out_dir: &Path) -> Result<(), ConfigError> {
        let name = format!("{}_manifest.json", self.command.replace('-', "_"));
        let path = out_dir.join(&name);
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| ConfigError(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        std::fs::write(&path, text)
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}
