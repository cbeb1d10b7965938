//! Artifact emission: atomic file writes and the run manifest.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

/// One named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn text(name: impl Into<String>, body: String) -> Self {
        Self {
            name: name.into(),
            bytes: body.into_bytes(),
        }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut body = serde_json::to_string_pretty(value).expect("artifact serializes");
        body.push('\n');
        Self::text(name, body)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub name: String,
    pub bytes: usize,
}

/// Everything needed to reproduce a run: `wplqng replay manifest.json`
/// re-executes `command` with `config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub versions: BTreeMap<String, String>,
    pub command: String,
    pub seed: u64,
    pub convention: String,
    pub shots: String,
    pub config: BTreeMap<String, String>,
    /// Derived constants worth having next to the data.
    pub context: serde_json::Value,
    pub status: String,
    pub artifacts: Vec<ArtifactEntry>,
}

impl Manifest {
    pub fn new(cfg: &RunConfig, context: serde_json::Value, status: String, artifacts: &[Artifact]) -> Self {
        let versions = [
            ("wpl-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("wpl-core".to_string(), wpl_core::VERSION.to_string()),
        ]
        .into_iter()
        .collect();
        Self {
            tool: "wplqng".into(),
            versions,
            command: cfg.command.name().into(),
            seed: cfg.get("seed").unwrap_or_default(),
            convention: cfg.raw("convention").into(),
            shots: cfg.raw("shots").into(),
            config: cfg.values().clone(),
            context,
            status,
            artifacts: artifacts
                .iter()
                .map(|a| ArtifactEntry {
                    name: a.name.clone(),
                    bytes: a.bytes.len(),
                })
                .collect(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `name` via a temporary sibling and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = dir.join(format!(".{name}.tmp"));
    let dst = dir.join(name);
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, &dst).map_err(io_err(&dst))
}

/// Writes every artifact, then the manifest last.
pub fn emit(dir: &Path, artifacts: &[Artifact], manifest: &Manifest) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for a in artifacts {
        write_atomic(dir, &a.name, &a.bytes)?;
    }
    let m = Artifact::json(MANIFEST, manifest);
    write_atomic(dir, MANIFEST, &m.bytes)
}
