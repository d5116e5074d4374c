//! Artifact metadata: content hashes and the sidecar file linking each
//! pipeline artifact to the inputs it was computed from.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// FNV-1a over the artifact bytes; stable across platforms.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IndexMetadata {
    pub artifact: String,
    pub content_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timetable_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfers_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tool_version: String,
}

impl IndexMetadata {
    pub fn new(artifact: &str, content_hash: u64) -> IndexMetadata {
        IndexMetadata {
            artifact: artifact.to_string(),
            content_hash: format!("{content_hash:016x}"),
            timetable_hash: None,
            transfers_hash: None,
            partition_hash: None,
            k: None,
            epsilon: None,
            max_rounds: None,
            seed: None,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn sidecar_path(artifact: &Path) -> std::path::PathBuf {
        let mut name = artifact.file_name().unwrap_or_default().to_os_string();
        name.push(".meta.json");
        artifact.with_file_name(name)
    }

    pub fn save(&self, artifact: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Other(e.to_string()))?;
        std::fs::write(Self::sidecar_path(artifact), json + "\n")?;
        Ok(())
    }

    pub fn load(artifact: &Path) -> Result<IndexMetadata> {
        let path = Self::sidecar_path(artifact);
        let json = std::fs::read_to_string(&path).map_err(|e| {
            Error::ArtifactMismatch(format!("missing metadata {}: {e}", path.display()))
        })?;
        serde_json::from_str(&json).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn check_upstream(&self, what: &str, expected: u64, stored: &Option<String>) -> Result<()> {
        match stored {
            Some(h) if *h == format!("{expected:016x}") => Ok(()),
            Some(h) => Err(Error::ArtifactMismatch(format!(
                "{what} hash mismatch: artifact was built against {h}, input is {expected:016x}"
            ))),
            None => Err(Error::ArtifactMismatch(format!(
                "{what} hash missing from metadata"
            ))),
        }
    }
}
