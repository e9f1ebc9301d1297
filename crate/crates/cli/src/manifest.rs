//! Run manifests: what was run, on which inputs, producing which files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> CliResult<FileDigest> {
    let bytes = std::fs::read(path)?;
    Ok(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) })
}

impl RunManifest {
    pub fn new(command: &str, arguments: Vec<String>, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.into(),
            arguments,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: vec![],
            outputs: vec![],
        }
    }

    /// Records an input file, or an embedded preset under `preset:<name>`.
    pub fn add_input(&mut self, label: &str, bytes: &[u8]) {
        self.inputs.push(FileDigest { path: label.into(), sha256: sha256_hex(bytes) });
    }

    pub fn add_output(&mut self, path: &Path) -> CliResult<()> {
        self.outputs.push(digest_file(path)?);
        Ok(())
    }

    /// Writes the manifest next to `primary`: `<primary>.manifest.json`, or
    /// `manifest.json` inside it when it is a directory.
    pub fn write_for(&self, primary: &Path) -> CliResult<PathBuf> {
        let path = if primary.is_dir() {
            primary.join("manifest.json")
        } else {
            let mut name = primary.file_name().unwrap_or_default().to_os_string();
            name.push(".manifest.json");
            primary.with_file_name(name)
        };
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_value() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
