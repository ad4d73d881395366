use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::Result;
use crate::params::{DephasingSpec, DrivingParams};

/// Central-pair `λ_min` values from oracle solves, keyed by the exact
/// parameter tuple so an interrupted scan can resume.
///
/// Keys hold the bit patterns of the parameters; a value is only reused
/// for bit-identical inputs.
#[derive(Debug, Default)]
pub struct OracleCache {
    path: Option<PathBuf>,
    map: Mutex<BTreeMap<String, f64>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl OracleCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads `path` if it exists; [`save`](Self::save) writes back to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let map = if path.exists() {
            serde_json::from_str(&fs::read_to_string(&path)?)?
        } else {
            BTreeMap::new()
        };
        Ok(OracleCache {
            path: Some(path),
            map: Mutex::new(map),
            ..Default::default()
        })
    }

    pub fn key(n: usize, p: &DrivingParams, d: &DephasingSpec) -> String {
        format!(
            "n{n}:{:016x}:{:016x}:{:016x}:{:016x}:{:016x}",
            p.gamma_left.to_bits(),
            p.gamma_right.to_bits(),
            p.mu.to_bits(),
            p.mu_bar.to_bits(),
            d.gamma.to_bits()
        )
    }

    pub fn get_or_compute(
        &self,
        n: usize,
        p: &DrivingParams,
        d: &DephasingSpec,
        f: impl FnOnce() -> Result<f64>,
    ) -> Result<f64> {
        let key = Self::key(n, p, d);
        if let Some(&v) = self.map.lock().expect("cache lock").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let v = f()?;
        self.map.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(hits, misses)` since creation.
    pub fn stats(&self) -> (usize, usize) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    pub fn save(&self) -> Result<()> {
        if let Some(path) = &self.path {
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            let text = serde_json::to_string_pretty(&*self.map.lock().expect("cache lock"))?;
            fs::write(path, text)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        let p = DrivingParams::symmetric(1.0, 2.0, 0.0).unwrap();
        let d = DephasingSpec::new(0.1).unwrap();
        let c = OracleCache::open(&path).unwrap();
        assert_eq!(c.get_or_compute(6, &p, &d, || Ok(-0.25)).unwrap(), -0.25);
        c.save().unwrap();

        let c = OracleCache::open(&path).unwrap();
        let v = c.get_or_compute(6, &p, &d, || panic!("should be cached")).unwrap();
        assert_eq!(v, -0.25);
        assert_eq!(c.stats(), (1, 0));
        let other = DephasingSpec::new(0.1 + 1e-16).unwrap();
        assert_ne!(OracleCache::key(6, &p, &d), OracleCache::key(6, &p, &other));
    }
}
