//! Buffered outputs committed with temp-then-rename, plus run metadata.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use courl_core::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Files produced by one command, held in memory until every computation
/// has succeeded.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Render with a writer-based exporter into an in-memory file.
    pub fn add_with(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut bytes = Vec::new();
        write(&mut bytes)?;
        self.add(name, bytes);
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Write every file into `dir` via a temporary file and an atomic rename.
    pub fn commit(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, bytes) in &self.files {
            let target = dir.join(name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
            tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
            tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
            tmp.persist(&target).map_err(|e| Error::io(&target, e.error))?;
        }
        Ok(())
    }
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher).map_err(|e| Error::io(path, e))?;
    Ok(format!("{:x}", hasher.finalize()))
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to rerun a command: resolved parameters, input
/// digests, the seed and generator, and what was written.
#[derive(Debug, Serialize)]
pub struct RunMetadata<C: Serialize> {
    pub command: String,
    pub version: &'static str,
    pub created_unix: u64,
    pub threads: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub config: C,
    pub inputs: BTreeMap<String, InputDigest>,
    pub summary: serde_json::Value,
    pub outputs: Vec<String>,
}

pub fn digest_inputs(inputs: &[(&str, &Option<PathBuf>)]) -> Result<BTreeMap<String, InputDigest>> {
    let mut out = BTreeMap::new();
    for (key, path) in inputs {
        if let Some(path) = path {
            out.insert(
                key.to_string(),
                InputDigest {
                    path: path.clone(),
                    sha256: sha256_file(path)?,
                },
            );
        }
    }
    Ok(out)
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}
