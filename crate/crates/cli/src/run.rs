//! Run directories and manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

/// Output directory of one configuration, `<root>/<first 16 hex digits of the hash>`.
pub struct RunDir {
    path: PathBuf,
    hash: String,
    outputs: Vec<String>,
    started: Instant,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: &'a str,
    package_version: &'a str,
    wall_time_seconds: f64,
    exit_code: u8,
    status: &'a str,
    outputs: &'a [String],
}

impl RunDir {
    pub fn create(root: &Path, hash: &str) -> Result<Self> {
        let path = root.join(&hash[..16]);
        fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Self {
            path,
            hash: hash.to_string(),
            outputs: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Path for a new output file, recorded in the manifest.
    pub fn file(&mut self, name: &str) -> PathBuf {
        self.record(name);
        self.path.join(name)
    }

    pub fn record(&mut self, name: &str) {
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.file(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes `manifest_<command>.json`, the only output that contains timing.
    pub fn finish(mut self, command: &str, exit_code: u8, status: &str) -> Result<PathBuf> {
        let name = format!("manifest_{command}.json");
        self.record(&name);
        let manifest = Manifest {
            command,
            config_hash: &self.hash,
            package_version: env!("CARGO_PKG_VERSION"),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            exit_code,
            status,
            outputs: &self.outputs,
        };
        let path = self.path.join(&name);
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
