//! Replay cache for completions, persisted as JSON Lines.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::LlmError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key_digest: String,
    pub model: String,
    pub temperature: f64,
    pub prompt: String,
    pub raw_text: String,
    pub timestamp: u64,
}

/// Hex SHA-256 over the JSON array `[model, prompt, temperature]`.
pub fn cache_key(model: &str, prompt: &str, temperature: f64) -> String {
    let material = serde_json::to_vec(&(model, prompt, temperature)).expect("key serializes");
    hex::encode(Sha256::digest(&material))
}

/// Thread-safe cache. With a backing file, every insert is appended as one
/// line; on load, later lines win.
#[derive(Default)]
pub struct ResponseCache {
    entries: RwLock<HashMap<String, CacheEntry>>,
    file: Option<Mutex<File>>,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn open(path: &Path) -> Result<Self, LlmError> {
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (idx, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheEntry = serde_json::from_str(&line).map_err(|e| {
                    LlmError::Cache(format!("{}:{}: {e}", path.display(), idx + 1))
                })?;
                entries.insert(entry.key_digest.clone(), entry);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            entries: RwLock::new(entries),
            file: Some(Mutex::new(file)),
        })
    }

    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        self.entries.read().expect("cache lock").get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&self, model: &str, prompt: &str, temperature: f64, raw_text: &str) -> Result<(), LlmError> {
        let entry = CacheEntry {
            key_digest: cache_key(model, prompt, temperature),
            model: model.to_owned(),
            temperature,
            prompt: prompt.to_owned(),
            raw_text: raw_text.to_owned(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        if let Some(file) = &self.file {
            let mut line = serde_json::to_string(&entry).expect("entry serializes");
            line.push('\n');
            let mut file = file.lock().expect("cache file lock");
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        self.entries
            .write()
            .expect("cache lock")
            .insert(entry.key_digest.clone(), entry);
        Ok(())
    }
}
