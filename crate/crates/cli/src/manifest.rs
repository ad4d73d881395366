use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::Settings;

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

/// What was run, with which inputs, and what it wrote.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub command_line: Vec<String>,
    pub settings: Settings,
    /// SHA-256 of the merged settings serialized as JSON.
    pub config_digest: String,
    pub tolerances: serde_json::Value,
    pub code_version: &'static str,
    pub timestamp: String,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str, settings: &Settings, tolerances: serde_json::Value) -> anyhow::Result<Self> {
        let canonical = serde_json::to_vec(settings)?;
        Ok(RunManifest {
            command: command.into(),
            command_line: std::env::args().collect(),
            settings: settings.clone(),
            config_digest: sha256_hex(&canonical),
            tolerances,
            code_version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs: Vec::new(),
        })
    }

    pub fn add(&mut self, path: &Path) -> anyhow::Result<()> {
        let data = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
        self.outputs.push(OutputFile {
            path: path.to_path_buf(),
            bytes: data.len() as u64,
            sha256: sha256_hex(&data),
        });
        Ok(())
    }

    /// Writes `manifest.json` into `dir`, or logs the manifest when there is
    /// no output directory.
    pub fn emit(&self, dir: Option<&Path>) -> anyhow::Result<Option<PathBuf>> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        match dir {
            Some(d) => {
                fs::create_dir_all(d)?;
                let p = d.join(format!("{}.manifest.json", self.command));
                fs::write(&p, text)?;
                Ok(Some(p))
            }
            None => {
                log::info!("run manifest: {text}");
                Ok(None)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
