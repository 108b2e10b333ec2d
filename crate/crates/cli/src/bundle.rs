use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).with_context(|| format!("writing {}", tmp.display()))?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub command: String,
    pub config_sha256: String,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    /// Keyed by step name, so re-running a step replaces its entry.
    pub steps: BTreeMap<String, Step>,
}

/// Everything one command writes, rooted at the output directory.
pub struct Bundle {
    root: PathBuf,
    step: String,
    command: String,
    config_sha256: String,
    seed: u64,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl Bundle {
    pub fn new(
        root: &Path,
        step: impl Into<String>,
        command: &str,
        config_sha256: String,
        seed: u64,
    ) -> Bundle {
        Bundle {
            root: root.to_path_buf(),
            step: step.into(),
            command: command.to_string(),
            config_sha256,
            seed,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Paths under the output directory are recorded relative to it.
    fn display_path(&self, path: &Path) -> String {
        let shown = path.strip_prefix(&self.root).unwrap_or(path);
        shown.to_string_lossy().replace('\\', "/")
    }

    /// Reads an input file and records its hash.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs
            .insert(self.display_path(path), sha256_hex(&bytes));
        Ok(bytes)
    }

    /// Records an input that was read elsewhere.
    pub fn note_input(&mut self, path: &Path) -> Result<()> {
        self.read_input(path).map(|_| ())
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        write_atomic(&path, bytes)?;
        self.outputs.insert(rel.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// Merges this command's step into the manifest.
    pub fn finish(self) -> Result<()> {
        let path = self.root.join(MANIFEST);
        let mut manifest = match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice::<Manifest>(&bytes)
                .with_context(|| format!("{} is not a run manifest", path.display()))?,
            Err(_) => Manifest {
                tool: "whow".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                seed: self.seed,
                steps: BTreeMap::new(),
            },
        };
        manifest.version = env!("CARGO_PKG_VERSION").into();
        manifest.seed = self.seed;
        let hashes = |m: BTreeMap<String, String>| {
            m.into_iter()
                .map(|(path, sha256)| FileHash { path, sha256 })
                .collect()
        };
        manifest.steps.insert(
            self.step,
            Step {
                command: self.command,
                config_sha256: self.config_sha256,
                inputs: hashes(self.inputs),
                outputs: hashes(self.outputs),
            },
        );
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())
    }
}
