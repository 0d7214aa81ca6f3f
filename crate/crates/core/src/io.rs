//! Run manifests and CSV output helpers.

use crate::error::{Error, Result};
use crate::ledger::LedgerCounts;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub spectraldiff: String,
    pub manifest_format: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            spectraldiff: env!("CARGO_PKG_VERSION").to_string(),
            manifest_format: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved inputs, including defaults.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub outputs: Vec<OutputFile>,
    pub wall_clock_seconds: f64,
    pub ledger: Option<LedgerCounts>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects the files a command writes into one output directory.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, bytes)?;
        self.files.push(OutputFile {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Writes a CSV built by `fill` into memory first, so the hash covers the exact bytes.
    pub fn write_csv<F>(&mut self, name: &str, header: &[&str], fill: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>,
    {
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            fill(&mut w)?;
            w.flush()?;
        }
        self.write(name, &buf)
    }

    pub fn finish(
        self,
        command: &str,
        config: serde_json::Value,
        seed: Option<u64>,
        wall_clock_seconds: f64,
        ledger: Option<LedgerCounts>,
    ) -> Result<RunManifest> {
        let m = RunManifest {
            command: command.to_string(),
            config,
            seed,
            versions: Versions::default(),
            outputs: self.files,
            wall_clock_seconds,
            ledger,
        };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        fs::write(self.root.join(MANIFEST_FILE), s)?;
        Ok(m)
    }
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    Ok(serde_json::from_str(&text)?)
}

/// Recomputes the output hashes listed in a manifest.
pub fn verify_manifest(dir: &Path, m: &RunManifest) -> Result<()> {
    for f in &m.outputs {
        let bytes = fs::read(dir.join(&f.path))?;
        if sha256_hex(&bytes) != f.sha256 {
            return Err(Error::Numeric(format!("hash mismatch for {}", f.path)));
        }
    }
    Ok(())
}
