//! Run manifests and artifact stamps tying every output to the run that
//! produced it.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// What a command ran with: paths in and out, the seed, and when.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
}

/// Sidecar `<artifact>.stamp` naming the run that wrote the artifact and
/// the runs its inputs came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stamp {
    pub manifest: String,
    pub inputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn begin(command: &str, seed: u64) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            config: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            seed,
            version: concat!("v", env!("CARGO_PKG_VERSION")).to_string(),
            started_unix: now_unix(),
            finished_unix: 0,
        }
    }

    pub fn input(&mut self, name: &str, path: &Path) -> &mut Self {
        self.inputs.insert(name.to_string(), path.display().to_string());
        self
    }

    pub fn output(&mut self, name: &str, path: &Path) -> &mut Self {
        self.outputs.insert(name.to_string(), path.display().to_string());
        self
    }

    /// Hash over everything except the timestamps, so reruns with the same
    /// inputs and seed hash identically.
    pub fn hash_hex(&self) -> String {
        let mut canon = self.clone();
        canon.started_unix = 0;
        canon.finished_unix = 0;
        let json = serde_json::to_string(&canon).expect("manifest serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Writes `manifest.json` plus a `.stamp` beside every declared output,
    /// each stamp recording this run's hash and the input provenance seen.
    pub fn seal(
        mut self,
        out_dir: &Path,
        input_stamps: &BTreeMap<String, String>,
    ) -> Result<String, CliError> {
        self.finished_unix = now_unix();
        let hash = self.hash_hex();
        let stamp = Stamp { manifest: hash.clone(), inputs: input_stamps.clone() };
        let stamp_json = serde_json::to_string_pretty(&stamp).expect("stamp serializes");
        for path in self.outputs.values() {
            std::fs::write(stamp_path(Path::new(path)), &stamp_json)?;
        }
        let json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(out_dir.join("manifest.json"), json)?;
        Ok(hash)
    }
}

/// Collects `{name: producing-manifest-hash}` for each input that has a
/// stamp; inputs without one are skipped.
pub fn gather_input_stamps(
    inputs: &[(&str, &Path)],
) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (name, path) in inputs {
        if let Some(stamp) = read_stamp(path)? {
            map.insert(name.to_string(), stamp.manifest);
        }
    }
    Ok(map)
}

/// Reads `<artifact>.stamp` if present; absent stamps are not an error.
pub fn read_stamp(artifact: &Path) -> Result<Option<Stamp>, CliError> {
    let path = stamp_path(artifact);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let stamp = serde_json::from_str(&text).map_err(|e| {
        CliError::Data(format!("{}: bad stamp: {e}", path.display()))
    })?;
    Ok(Some(stamp))
}

fn stamp_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".stamp");
    PathBuf::from(name)
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
