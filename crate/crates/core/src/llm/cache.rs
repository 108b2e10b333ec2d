use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Content hash of one request: sha256 over `model \0 mode \0 prompt`.
pub fn cache_key(model: &str, mode: &str, prompt: &str) -> String {
    let mut h = Sha256::new();
    h.update(model.as_bytes());
    h.update([0]);
    h.update(mode.as_bytes());
    h.update([0]);
    h.update(prompt.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachedRequest {
    pub key: String,
    pub endpoint: String,
    pub model: String,
    pub mode: String,
    pub temperature: f64,
    pub prompt: String,
}

/// One recorded response, stored as `{key}.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub request: CachedRequest,
    pub raw_response: String,
    /// Seconds since the Unix epoch when the response was recorded.
    pub timestamp: u64,
}

impl CacheEntry {
    pub fn new(request: CachedRequest, raw_response: String) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        CacheEntry {
            request,
            raw_response,
            timestamp,
        }
    }
}

/// Directory of recorded responses.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ResponseCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A stored entry, or `None` when absent or unreadable.
    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Writes through a temporary file and a rename.
    pub fn put(&self, entry: &CacheEntry) -> std::io::Result<()> {
        let path = self.path(&entry.request.key);
        let tmp = self.dir.join(format!(".{}.tmp", entry.request.key));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(
            serde_json::to_string_pretty(entry)
                .expect("entry serializes")
                .as_bytes(),
        )?;
        f.write_all(b"\n")?;
        f.sync_all()?;
        fs::rename(tmp, path)
    }
}
