//! Input hashing and output files with provenance sidecars.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL: &str = "lsgam";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SIDECAR_SUFFIX: &str = ".meta.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Every output of a run gets `<file>.meta.json` naming the tool version,
/// the seed and the SHA-256 of every input read so far. Inputs are keyed by
/// their last two path components so sidecars do not depend on where the
/// run directory lives.
#[derive(Debug)]
pub struct Run {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub out: PathBuf,
    inputs: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    seed: Option<u64>,
    output: String,
    output_sha256: String,
    inputs: &'a BTreeMap<String, String>,
}

fn input_key(path: &Path) -> String {
    let parts: Vec<String> =
        path.components().rev().take(2).map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
    parts.into_iter().rev().collect::<Vec<_>>().join("/")
}

impl Run {
    pub fn new(command: &'static str, seed: Option<u64>, out: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&out)
            .map_err(|e| CliError::user(format!("cannot create output directory {}: {e}", out.display())))?;
        Ok(Self { command, seed, out, inputs: BTreeMap::new() })
    }

    pub fn read_bytes(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                CliError::user(format!("input file not found: {}", path.display()))
            } else {
                CliError::user(format!("cannot read {}: {e}", path.display()))
            }
        })?;
        self.inputs.insert(input_key(path), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn read_text(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = self.read_bytes(path)?;
        String::from_utf8(bytes).map_err(|_| CliError::user(format!("{} is not UTF-8 text", path.display())))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Writes `out/<name>` and its sidecar.
    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))?;
        let sidecar = Sidecar {
            tool: TOOL,
            version: VERSION,
            command: self.command,
            seed: self.seed,
            output: name.to_string(),
            output_sha256: sha256_hex(bytes),
            inputs: &self.inputs,
        };
        let mut json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        json.push('\n');
        let meta = self.path(&format!("{name}{SIDECAR_SUFFIX}"));
        std::fs::write(&meta, json).map_err(|e| CliError::internal(format!("cannot write {}: {e}", meta.display())))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut json = serde_json::to_string_pretty(value).map_err(|e| CliError::internal(e.to_string()))?;
        json.push('\n');
        self.write(name, json.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_keys_drop_leading_directories() {
        assert_eq!(input_key(Path::new("/tmp/run1/rasters/Elev.asc")), "rasters/Elev.asc");
        assert_eq!(input_key(Path::new("model.json")), "model.json");
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
