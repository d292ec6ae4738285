//! Content-addressed result cache: one JSON file per request hash.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Serialize, Deserialize)]
pub struct Entry {
    pub exit: u8,
    pub result: Value,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: &Path) -> Result<Cache> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create cache dir {}", dir.display()))?;
        Ok(Cache { dir: dir.to_path_buf() })
    }

    /// Hash of the request: command, canonical input and every option that affects the result.
    pub fn key(command: &str, input: &Value, options: &Value) -> String {
        let text = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "input": input,
            "options": options,
        })
        .to_string();
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A corrupt or unreadable entry counts as a miss.
    pub fn get(&self, key: &str) -> Option<Entry> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put(&self, key: &str, entry: &Entry) -> Result<()> {
        let tmp = self.dir.join(format!(".{key}.tmp"));
        fs::write(&tmp, serde_json::to_string(entry)?)?;
        fs::rename(&tmp, self.path(key))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn roundtrip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path()).unwrap();
        let k = Cache::key("cw", &json!([[1]]), &json!({}));
        assert!(c.get(&k).is_none());
        c.put(&k, &Entry { exit: 0, result: json!({"a": 1}) }).unwrap();
        assert_eq!(c.get(&k).unwrap().result, json!({"a": 1}));
        assert_ne!(k, Cache::key("cw", &json!([[2]]), &json!({})));
        fs::write(c.path(&k), "not json").unwrap();
        assert!(c.get(&k).is_none());
    }
}
