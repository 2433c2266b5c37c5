//! On-disk response cache: one JSON file per cache key. Eviction is manual.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{FinishReason, GatewayError, Usage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedResponse {
    pub content: String,
    pub finish_reason: FinishReason,
    pub usage: Usage,
}

#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, GatewayError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| GatewayError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn key_lock(&self, key: &str) -> Arc<Mutex<()>> {
        self.locks
            .lock()
            .expect("cache lock table poisoned")
            .entry(key.to_string())
            .or_default()
            .clone()
    }

    pub fn get(&self, key: &str) -> Option<CachedResponse> {
        let lock = self.key_lock(key);
        let _guard = lock.lock().expect("cache key lock poisoned");
        let text = fs::read_to_string(self.path(key)).ok()?;
        // A corrupt entry is treated as a miss and overwritten on the next put.
        serde_json::from_str(&text).ok()
    }

    pub fn put(&self, key: &str, value: &CachedResponse) -> Result<(), GatewayError> {
        let lock = self.key_lock(key);
        let _guard = lock.lock().expect("cache key lock poisoned");
        let text = serde_json::to_string_pretty(value).map_err(|e| GatewayError::Cache(e.to_string()))?;
        let tmp = self.dir.join(format!("{key}.json.tmp"));
        fs::write(&tmp, text)
            .and_then(|_| fs::rename(&tmp, self.path(key)))
            .map_err(|e| GatewayError::Cache(format!("writing {key}: {e}")))
    }

    pub fn len(&self) -> usize {
        fs::read_dir(&self.dir)
            .map(|d| {
                d.filter_map(Result::ok)
                    .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
                    .count()
            })
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
