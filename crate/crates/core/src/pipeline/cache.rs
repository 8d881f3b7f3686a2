//! Content-addressed file cache for trained models and evaluation
//! records.
//!
//! Keys are SHA-256 digests of a canonical JSON encoding of everything
//! that determines the artifact. Writes go to a temp file in the same
//! directory and rename into place, so concurrent jobs can only ever
//! observe complete entries.

use crate::data::hex;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trainer::{checkpoint, TrainedModel};
use serde::{de::DeserializeOwned, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(pub String);

impl std::fmt::Display for CacheKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Key over any serializable description; equal inputs give equal keys and
/// any field change gives a different key.
pub fn key_of<S: Serialize>(kind: &str, desc: &S) -> CacheKey {
    let mut hasher = Sha256::new();
    hasher.update(b"corrbench-cache-v1:");
    hasher.update(kind.as_bytes());
    hasher.update(b":");
    hasher.update(serde_json::to_vec(desc).expect("cache descriptor serializes"));
    CacheKey(hex(&hasher.finalize()))
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    /// A cache rooted at `dir`; `None` disables persistence (every lookup
    /// misses).
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(root) = &dir {
            for sub in ["models", "evals"] {
                let path = root.join(sub);
                fs::create_dir_all(&path)
                    .map_err(|e| Error::io(format!("creating cache dir {}", path.display()), e))?;
            }
        }
        Ok(Cache { dir })
    }

    pub fn disabled() -> Self {
        Cache { dir: None }
    }

    pub fn is_persistent(&self) -> bool {
        self.dir.is_some()
    }

    fn model_path(&self, key: &CacheKey) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join("models").join(format!("{key}.ckpt")))
    }

    fn eval_path(&self, key: &CacheKey) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join("evals").join(format!("{key}.json")))
    }

    pub fn get_model<T: Scalar>(&self, key: &CacheKey) -> Result<Option<TrainedModel<T>>> {
        let Some(path) = self.model_path(key) else {
            return Ok(None);
        };
        if !path.exists() {
            return Ok(None);
        }
        let bytes = fs::read(&path)
            .map_err(|e| Error::io(format!("reading cache entry {}", path.display()), e))?;
        checkpoint::decode(&bytes).map(Some).map_err(|e| Error::CacheCorrupt {
            key: key.0.clone(),
            message: e.to_string(),
        })
    }

    pub fn put_model<T: Scalar>(&self, key: &CacheKey, model: &TrainedModel<T>) -> Result<()> {
        let Some(path) = self.model_path(key) else {
            return Ok(());
        };
        atomic_write(&path, &checkpoint::encode(model))
    }

    pub fn get_json<V: DeserializeOwned>(&self, key: &CacheKey) -> Result<Option<V>> {
        let Some(path) = self.eval_path(key) else {
            return Ok(None);
        };
        if !path.exists() {
            return Ok(None);
        }
        let bytes = fs::read(&path)
            .map_err(|e| Error::io(format!("reading cache entry {}", path.display()), e))?;
        serde_json::from_slice(&bytes).map(Some).map_err(|e| Error::CacheCorrupt {
            key: key.0.clone(),
            message: e.to_string(),
        })
    }

    pub fn put_json<V: Serialize>(&self, key: &CacheKey, value: &V) -> Result<()> {
        let Some(path) = self.eval_path(key) else {
            return Ok(());
        };
        atomic_write(&path, &serde_json::to_vec(value).expect("record serializes"))
    }
}

/// Write-then-rename so readers never see partial entries.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().expect("cache paths have parents");
    let tmp = parent.join(format!(
        ".tmp-{}-{}",
        std::process::id(),
        path.file_name().and_then(|n| n.to_str()).unwrap_or("entry")
    ));
    fs::write(&tmp, bytes).map_err(|e| Error::io(format!("writing {}", tmp.display()), e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(format!("renaming into {}", path.display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;
    use tempfile::tempdir;

    #[derive(Serialize)]
    struct Desc<'a> {
        name: &'a str,
        seed: u64,
    }

    #[test]
    fn equal_descriptors_equal_keys() {
        let a = key_of("model", &Desc { name: "x", seed: 1 });
        let b = key_of("model", &Desc { name: "x", seed: 1 });
        let c = key_of("model", &Desc { name: "x", seed: 2 });
        let d = key_of("eval", &Desc { name: "x", seed: 1 });
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Rec {
        accuracy: f64,
    }

    #[test]
    fn json_round_trip_and_miss() {
        let dir = tempdir().unwrap();
        let cache = Cache::new(Some(dir.path().to_path_buf())).unwrap();
        let key = key_of("eval", &Desc { name: "e", seed: 9 });
        assert_eq!(cache.get_json::<Rec>(&key).unwrap(), None);
        cache.put_json(&key, &Rec { accuracy: 0.5 }).unwrap();
        assert_eq!(cache.get_json::<Rec>(&key).unwrap(), Some(Rec { accuracy: 0.5 }));
    }

    #[test]
    fn corrupt_entry_reports_key() {
        let dir = tempdir().unwrap();
        let cache = Cache::new(Some(dir.path().to_path_buf())).unwrap();
        let key = key_of("model", &Desc { name: "m", seed: 1 });
        fs::write(dir.path().join("models").join(format!("{key}.ckpt")), b"garbage").unwrap();
        match cache.get_model::<f32>(&key) {
            Err(Error::CacheCorrupt { key: k, .. }) => assert_eq!(k, key.0),
            other => panic!("expected cache corruption error, got {other:?}"),
        }
    }

    #[test]
    fn disabled_cache_always_misses() {
        let cache = Cache::disabled();
        let key = key_of("eval", &Desc { name: "e", seed: 9 });
        cache.put_json(&key, &Rec { accuracy: 0.5 }).unwrap();
        assert_eq!(cache.get_json::<Rec>(&key).unwrap(), None);
    }
}
