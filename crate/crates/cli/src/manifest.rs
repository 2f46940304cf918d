//! Reproducibility record written next to every output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Resolved;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEntry {
    pub value: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub config: BTreeMap<String, ConfigEntry>,
    /// Path -> sha256 of each input file.
    pub inputs: BTreeMap<String, String>,
    /// Path -> sha256 of each output file.
    pub outputs: BTreeMap<String, String>,
    /// Command-specific counts and summary statistics.
    pub report: BTreeMap<String, serde_json::Value>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Manifest location for an output: `<file>.manifest.json`, or
/// `<dir>/manifest.json` for directory outputs.
pub fn manifest_path(output: &Path) -> PathBuf {
    if output.is_dir() {
        output.join("manifest.json")
    } else {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        output.with_file_name(name)
    }
}

pub struct ManifestBuilder {
    manifest: Manifest,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: &Resolved) -> Self {
        let seed = config.get::<u64>("seed").ok();
        let config_map = config
            .sources()
            .into_iter()
            .map(|(k, (value, source))| (k, ConfigEntry { value, source }))
            .collect();
        ManifestBuilder {
            manifest: Manifest {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                config_hash: config.hash(),
                config: config_map,
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                report: BTreeMap::new(),
            },
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        let digest = sha256_file(path)?;
        self.manifest.inputs.insert(path.display().to_string(), digest);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> Result<&mut Self> {
        let digest = sha256_file(path)?;
        self.manifest.outputs.insert(path.display().to_string(), digest);
        Ok(self)
    }

    pub fn report(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.manifest.report.insert(key.to_string(), value.into());
        self
    }

    /// Write the manifest beside `primary` and return its path.
    pub fn write(&self, primary: &Path) -> Result<PathBuf> {
        let path = manifest_path(primary);
        let json = serde_json::to_string_pretty(&self.manifest)? + "\n";
        std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_digests() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.jsonl");
        let output = dir.path().join("out.jsonl");
        std::fs::write(&input, "a\n").unwrap();
        std::fs::write(&output, "b\n").unwrap();
        let config = Resolved::resolve(&["seed"], None, &[]).unwrap();
        let mut b = ManifestBuilder::new("demo", &config);
        b.input(&input).unwrap().output(&output).unwrap().report("n", 1);
        let path = b.write(&output).unwrap();
        assert_eq!(path, dir.path().join("out.jsonl.manifest.json"));
        let m: Manifest = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(m.seed, Some(13));
        assert_eq!(m.inputs[&input.display().to_string()], sha256_file(&input).unwrap());
        assert_eq!(m.config["seed"].source, "default");
        assert_eq!(manifest_path(dir.path()), dir.path().join("manifest.json"));
    }
}
