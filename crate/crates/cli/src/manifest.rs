//! Run manifests: what was run, on which configuration, and what it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct StageStats {
    pub name: String,
    pub linear_solves: usize,
    pub linear_iterations: usize,
    pub sweeps: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: String,
    /// SHA-256 of the canonical configuration text.
    pub config_hash: String,
    pub flags: serde_json::Value,
    pub started: String,
    pub finished: String,
    pub stages: Vec<StageStats>,
    pub files: Vec<FileEntry>,
    pub notes: Vec<String>,
}

/// Writes files into one output directory and remembers them for the
/// manifest.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry { name: name.to_string(), bytes: contents.len(), sha256: sha256_hex(contents.as_bytes()) });
        Ok(())
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn finish(self, mut manifest: RunManifest) -> std::io::Result<Vec<PathBuf>> {
        manifest.files = self.files.clone();
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(self.dir.join(MANIFEST_NAME), json + "\n")?;
        let mut written: Vec<PathBuf> = self.files.iter().map(|f| self.dir.join(&f.name)).collect();
        written.push(self.dir.join(MANIFEST_NAME));
        Ok(written)
    }
}
