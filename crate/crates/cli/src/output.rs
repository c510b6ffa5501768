//! Atomic file output, run manifests and run reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Writes `bytes` to `path` through a sibling temp file and a rename, so an
/// interrupted run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub files: Vec<FileRecord>,
    pub summary: BTreeMap<String, f64>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub code_version: String,
    pub config: ExperimentConfig,
    /// Stream tags drawn under `config.seed`.
    pub stream_tags: Vec<String>,
}

/// Collects the outputs of one run under a directory.
pub struct RunOutput {
    root: PathBuf,
    report: RunReport,
    stream_tags: Vec<String>,
    stage_start: Instant,
}

impl RunOutput {
    pub fn new(root: &Path, experiment: &str) -> Self {
        RunOutput {
            root: root.to_path_buf(),
            report: RunReport {
                experiment: experiment.to_string(),
                files: Vec::new(),
                summary: BTreeMap::new(),
                timings: BTreeMap::new(),
            },
            stream_tags: Vec::new(),
            stage_start: Instant::now(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.root.join(name), bytes)?;
        self.report.files.push(FileRecord {
            path: name.to_string(),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn scalar(&mut self, key: impl Into<String>, value: f64) {
        self.report.summary.insert(key.into(), value);
    }

    pub fn stream_tag(&mut self, tag: impl Into<String>) {
        self.stream_tags.push(tag.into());
    }

    /// Records the time since the previous stage ended.
    pub fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.report
            .timings
            .insert(name.to_string(), (now - self.stage_start).as_secs_f64());
        self.stage_start = now;
    }

    pub fn report(&self) -> &RunReport {
        &self.report
    }

    /// Writes `manifest.json` and `report.json` and returns the report.
    pub fn finish(mut self, config: &ExperimentConfig) -> Result<RunReport> {
        let manifest = Manifest {
            code_version: CODE_VERSION.to_string(),
            config: config.clone(),
            stream_tags: std::mem::take(&mut self.stream_tags),
        };
        self.write_json("manifest.json", &manifest)?;
        let report = self.report.clone();
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        write_atomic(&self.root.join("report.json"), text.as_bytes())?;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        write_atomic(&path, b"a\n").unwrap();
        write_atomic(&path, b"b\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"b\n");
        let names: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().collect();
        assert_eq!(names.len(), 1);
    }
}
