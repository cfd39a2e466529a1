//! File output helpers. Commands stage every output in memory and commit the
//! whole set at the end, each file written to a temporary sibling and renamed
//! into place, so a failing run leaves no partial files behind.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Result;

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

pub fn to_json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, &to_json_bytes(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of one written file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

/// Files staged for an all-or-nothing commit.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_bytes(&mut self, path: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((path.into(), bytes));
    }

    pub fn add_json<T: Serialize + ?Sized>(&mut self, path: impl Into<PathBuf>, value: &T) -> Result<()> {
        self.add_bytes(path, to_json_bytes(value)?);
        Ok(())
    }

    /// Stages the output of a writer callback, e.g. a CSV serializer.
    pub fn add_with<F>(&mut self, path: impl Into<PathBuf>, f: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.add_bytes(path, buf);
        Ok(())
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Digests of the staged files, in staging order.
    pub fn digests(&self) -> Vec<OutputDigest> {
        self.files
            .iter()
            .map(|(p, b)| OutputDigest {
                path: p.clone(),
                sha256: sha256_hex(b),
                bytes: b.len(),
            })
            .collect()
    }

    /// Writes every staged file. Temporaries are all written before the
    /// first rename, so an I/O failure while staging leaves nothing behind.
    pub fn commit(self) -> Result<Vec<OutputDigest>> {
        let digests = self.digests();
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, bytes) in &self.files {
            let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let res = fs::create_dir_all(dir).and_then(|_| {
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
                fs::write(&tmp, bytes).map(|_| tmp)
            });
            match res {
                Ok(tmp) => staged.push((tmp, path.clone())),
                Err(e) => {
                    for (tmp, _) in &staged {
                        let _ = fs::remove_file(tmp);
                    }
                    return Err(e.into());
                }
            }
        }
        for (tmp, path) in staged {
            fs::rename(&tmp, &path)?;
        }
        Ok(digests)
    }
}

/// Record written next to every command's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full parameter set as parsed, enough to re-run the command.
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub threads: Option<usize>,
    pub tool_version: String,
    pub started_unix_s: f64,
    pub wall_clock_s: f64,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value, seed: u64, threads: Option<usize>) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters,
            seed,
            threads,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_s: unix_now(),
            wall_clock_s: 0.0,
            outputs: Vec::new(),
        }
    }

    /// Stamps the elapsed time and the digests of the staged outputs.
    pub fn finish(&mut self, outputs: &OutputSet) {
        self.wall_clock_s = (unix_now() - self.started_unix_s).max(0.0);
        self.outputs = outputs.digests();
    }

    /// Whether the files on disk still match the recorded digests.
    pub fn verify(&self) -> Result<bool> {
        for o in &self.outputs {
            let bytes = fs::read(&o.path)?;
            if sha256_hex(&bytes) != o.sha256 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/x.json");
        write_json(&p, &vec![1.5, 2.0]).unwrap();
        let v: Vec<f64> = read_json(&p).unwrap();
        assert_eq!(v, vec![1.5, 2.0]);
        let leftovers: Vec<_> = fs::read_dir(p.parent().unwrap()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn output_set_commits_all_files_with_digests() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = OutputSet::new();
        set.add_bytes(dir.path().join("a.csv"), b"x,y\n".to_vec());
        set.add_json(dir.path().join("a.json"), &[1, 2]).unwrap();
        let mut m = RunManifest::new("test", serde_json::json!({"k": 1}), 7, None);
        m.finish(&set);
        let d = set.commit().unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].sha256, sha256_hex(b"x,y\n"));
        assert!(m.verify().unwrap());
        fs::write(dir.path().join("a.csv"), b"changed").unwrap();
        assert!(!m.verify().unwrap());
    }
}
