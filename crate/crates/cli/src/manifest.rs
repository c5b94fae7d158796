//! Run manifests: resolved configuration echo, seeds, per-stage output
//! digests and wall-clock. Numeric outputs are deterministic given the
//! manifest; the manifest's own timing fields are informational.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub wall_ms: u128,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub suite: String,
    pub seeds: Vec<u64>,
    pub config_echo: String,
    pub stages: Vec<StageRecord>,
}

impl Manifest {
    pub fn new(suite: &str, config_echo: String) -> Manifest {
        Manifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            suite: suite.to_string(),
            seeds: Vec::new(),
            config_echo,
            stages: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

/// Writes `content` under `dir` and records its digest on the stage.
pub fn write_output(
    dir: &Path,
    name: &str,
    content: &str,
    stage: &mut StageRecord,
) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    let mut h = Sha256::new();
    h.update(content.as_bytes());
    let digest: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    stage.outputs.push(OutputRecord {
        path: name.to_string(),
        sha256: digest,
        bytes: content.len(),
    });
    Ok(path)
}

pub struct StageTimer {
    name: String,
    start: Instant,
}

impl StageTimer {
    pub fn start(name: &str) -> StageTimer {
        StageTimer { name: name.to_string(), start: Instant::now() }
    }

    pub fn finish(self) -> StageRecord {
        StageRecord {
            name: self.name,
            wall_ms: self.start.elapsed().as_millis(),
            outputs: Vec::new(),
        }
    }
}
