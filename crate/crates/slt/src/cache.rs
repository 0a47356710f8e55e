//! File cache for computed tables: per-key single-writer with atomic
//! replacement, keyed content hashes for report provenance.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;

pub const CACHE_ENV: &str = "SLT_CACHE";
pub const CACHE_DEFAULT: &str = ".slt-cache";

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// Cache directory from SLT_CACHE, defaulting to `.slt-cache`.
    pub fn from_env() -> Cache {
        let dir = std::env::var(CACHE_ENV).unwrap_or_else(|_| CACHE_DEFAULT.to_string());
        Cache { dir: dir.into() }
    }

    pub fn at(dir: impl AsRef<Path>) -> Cache {
        Cache {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    fn path(&self, key: &str) -> PathBuf {
        let safe: String = key
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            })
            .collect();
        self.dir.join(format!("{safe}.json"))
    }

    pub fn get(&self, key: &str) -> Option<String> {
        fs::read_to_string(self.path(key)).ok()
    }

    /// Atomic write: temp file in the same directory, then rename.
    pub fn put(&self, key: &str, value: &str) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let target = self.path(key);
        let tmp = target.with_extension("tmp");
        fs::write(&tmp, value)?;
        fs::rename(&tmp, &target)?;
        Ok(())
    }

    /// sha256 of the cached content, for report provenance.
    pub fn provenance(&self, key: &str) -> Option<String> {
        let content = self.get(key)?;
        Some(hash_str(&content))
    }
}

pub fn hash_str(content: &str) -> String {
    let mut h = Sha256::new();
    h.update(content.as_bytes());
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_provenance() {
        let dir = std::env::temp_dir().join(format!("slt-cache-test-{}", std::process::id()));
        let c = Cache::at(&dir);
        assert!(c.get("k").is_none());
        c.put("k", "{\"x\":1}").unwrap();
        assert_eq!(c.get("k").unwrap(), "{\"x\":1}");
        let h1 = c.provenance("k").unwrap();
        c.put("k", "{\"x\":1}").unwrap();
        assert_eq!(c.provenance("k").unwrap(), h1);
        std::fs::remove_dir_all(&dir).ok();
    }
}
