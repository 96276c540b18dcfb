//! Run manifests: every artifact directory gets exactly one `manifest.json`
//! recording what produced it — subcommand, config snapshot, seeds, crate
//! version, SHA-256 of each input file, and the list of outputs.
//!
//! Manifests deliberately contain no timestamps or hostnames so that
//! regenerating a dataset from the same seed yields a byte-identical
//! directory.

use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// The configuration the run actually used, as a JSON value, so the
    /// manifest stays schema-agnostic across subcommands.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub version: String,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<String>,
}

#[derive(Debug)]
pub enum ManifestError {
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifestError::Io(e) => write!(f, "io: {e}"),
            ManifestError::Json(e) => write!(f, "json: {e}"),
        }
    }
}

impl std::error::Error for ManifestError {}

impl From<std::io::Error> for ManifestError {
    fn from(e: std::io::Error) -> Self {
        ManifestError::Io(e)
    }
}

impl From<serde_json::Error> for ManifestError {
    fn from(e: serde_json::Error) -> Self {
        ManifestError::Json(e)
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn hash_file(path: &Path) -> Result<String, ManifestError> {
    let bytes = std::fs::read(path)?;
    let mut h = Sha256::new();
    h.update(&bytes);
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value, seeds: Vec<u64>) -> RunManifest {
        RunManifest {
            subcommand: subcommand.to_string(),
            config,
            seeds,
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Record an input file together with its current hash.
    pub fn add_input(&mut self, path: &Path) -> Result<(), ManifestError> {
        self.inputs.push(FileHash {
            path: path.display().to_string(),
            sha256: hash_file(path)?,
        });
        Ok(())
    }

    /// Record an output path (relative to the manifest's directory when
    /// possible, so moved artifact directories stay self-describing).
    pub fn add_output(&mut self, path: &Path, base: &Path) {
        let shown = path.strip_prefix(base).unwrap_or(path);
        self.outputs.push(shown.display().to_string());
    }

    /// Write `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, ManifestError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_NAME);
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json.as_bytes())?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<RunManifest, ManifestError> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_NAME))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Check that every recorded input still hashes to the same value.
    pub fn verify_inputs(&self) -> Result<Vec<String>, ManifestError> {
        let mut stale = Vec::new();
        for f in &self.inputs {
            let current = hash_file(Path::new(&f.path))?;
            if current != f.sha256 {
                stale.push(f.path.clone());
            }
        }
        Ok(stale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn sha256_matches_known_vector() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("x.txt");
        std::fs::write(&p, b"abc").unwrap();
        assert_eq!(
            hash_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_roundtrip_and_input_verification() {
        let dir = tempdir().unwrap();
        let input = dir.path().join("in.jsonl");
        std::fs::write(&input, b"{}\n").unwrap();
        let mut m = RunManifest::new(
            "generate",
            serde_json::json!({"seed": 7, "counts": {"3": 10}}),
            vec![7],
        );
        m.add_input(&input).unwrap();
        m.add_output(&dir.path().join("train.jsonl"), dir.path());
        let path = m.write(dir.path()).unwrap();
        assert_eq!(path.file_name().unwrap(), MANIFEST_NAME);
        let back = RunManifest::read(dir.path()).unwrap();
        assert_eq!(back.subcommand, "generate");
        assert_eq!(back.seeds, vec![7]);
        assert_eq!(back.outputs, vec!["train.jsonl"]);
        assert_eq!(back.version, env!("CARGO_PKG_VERSION"));
        assert!(back.verify_inputs().unwrap().is_empty());
        // Tampering with the input is detected.
        std::fs::write(&input, b"{\"x\":1}\n").unwrap();
        assert_eq!(back.verify_inputs().unwrap(), vec![input.display().to_string()]);
    }

    #[test]
    fn manifest_has_no_timestamp_fields() {
        let m = RunManifest::new("train", serde_json::json!({}), vec![1]);
        let json = serde_json::to_string(&m).unwrap();
        for word in ["time", "date", "host"] {
            assert!(!json.contains(word), "manifest must stay reproducible, found {word}");
        }
    }
}
