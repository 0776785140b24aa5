use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use metaphor_rsa::lexicon::{HUMAN_FILE, METAPHORS_FILE, TYPICALITY_FILE};
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// SHA-256 over the three dataset files, each framed by its name and length.
pub fn dataset_hash(dir: &Path) -> anyhow::Result<String> {
    let mut h = Sha256::new();
    for name in [TYPICALITY_FILE, METAPHORS_FILE, HUMAN_FILE] {
        let path = dir.join(name);
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        h.update(name.as_bytes());
        h.update([0u8]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}

/// JSON artifact: the resolved config and dataset hash followed by
/// `payload`'s fields.
pub fn envelope(config: &RunConfig, hash: &str, payload: impl Serialize) -> anyhow::Result<Value> {
    let mut map = Map::new();
    map.insert("config".into(), serde_json::to_value(config)?);
    map.insert("dataset_sha256".into(), json!(hash));
    match serde_json::to_value(payload)? {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("result".into(), other);
        }
    }
    Ok(Value::Object(map))
}

/// CSV body prefixed by `#` comment lines carrying the config and hash.
pub fn csv_with_header(config: &RunConfig, hash: &str, body: &str) -> anyhow::Result<Vec<u8>> {
    let mut out = format!("# config: {}\n# dataset_sha256: {hash}\n", serde_json::to_string(config)?);
    out.push_str(body);
    Ok(out.into_bytes())
}

/// Artifacts held in memory and written together, so a failed run leaves
/// nothing behind.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json(&mut self, name: &str, value: &Value) -> anyhow::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Write every file via a temporary name and rename into place. On any
    /// failure the files of this batch are removed.
    pub fn commit(self) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let tmp = |name: &str| self.dir.join(format!(".{name}.tmp"));
        let mut staged = Vec::new();
        let mut done = Vec::new();
        let result = (|| -> anyhow::Result<()> {
            for (name, bytes) in &self.files {
                let path = tmp(name);
                staged.push(path.clone());
                fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            }
            for (name, _) in &self.files {
                let dest = self.dir.join(name);
                fs::rename(tmp(name), &dest).with_context(|| format!("writing {}", dest.display()))?;
                done.push(dest);
            }
            Ok(())
        })();
        if let Err(e) = result {
            for p in staged.iter().chain(&done) {
                let _ = fs::remove_file(p);
            }
            return Err(e);
        }
        Ok(done)
    }
}
