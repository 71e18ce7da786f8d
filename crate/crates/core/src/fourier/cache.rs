//! Samples of `ψ` on arithmetic frequency grids, memoized in memory and,
//! when `LEVYKB_CACHE` names a directory, on disk.
//!
//! File layout (little endian): magic `LKBPSI01`, 16 ASCII bytes of spec
//! hash, `u64` grid hash, `u64` count, then `count` pairs `(re, im)`.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::measure::LevyMeasure;

const MAGIC: &[u8; 8] = b"LKBPSI01";

/// Frequencies `start + j·step`, `j = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl NodeGrid {
    pub fn node(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }

    /// Hash of `(start, step)`; longer grids with the same origin and step
    /// share a file.
    pub fn hash(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(self.start.to_bits().to_le_bytes());
        h.update(self.step.to_bits().to_le_bytes());
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
    }
}

pub struct PsiCache {
    spec_hash: String,
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<u64, Arc<Vec<Complex64>>>>,
}

impl PsiCache {
    /// Cache for one measure; the directory comes from `LEVYKB_CACHE`.
    pub fn new(m: &LevyMeasure) -> Self {
        let dir = std::env::var_os("LEVYKB_CACHE").map(PathBuf::from);
        Self::with_dir(m, dir)
    }

    pub fn with_dir(m: &LevyMeasure, dir: Option<PathBuf>) -> Self {
        Self { spec_hash: m.spec().hash_hex(), dir, memory: Mutex::new(HashMap::new()) }
    }

    fn path(&self, grid_hash: u64) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{}-{:016x}.psi", self.spec_hash, grid_hash)))
    }

    /// `ψ` on `grid`, reusing any cached prefix and extending it.
    pub fn samples(&self, m: &LevyMeasure, grid: NodeGrid) -> Result<Arc<Vec<Complex64>>> {
        let key = grid.hash();
        let mut have = self.memory.lock().expect("cache lock").get(&key).cloned();
        if have.as_ref().is_none_or(|v| v.len() < grid.count) {
            if let Some(path) = self.path(key) {
                if let Some(v) = read_file(&path, &self.spec_hash, key) {
                    if have.as_ref().is_none_or(|h| v.len() > h.len()) {
                        have = Some(Arc::new(v));
                    }
                }
            }
        }
        if let Some(v) = &have {
            if v.len() >= grid.count {
                return Ok(Arc::clone(v));
            }
        }
        let start = have.as_ref().map_or(0, |v| v.len());
        let fresh: Vec<Complex64> = (start..grid.count)
            .into_par_iter()
            .map(|j| m.psi(grid.node(j)))
            .collect::<Result<_>>()?;
        let mut all = have.map_or_else(Vec::new, |v| v.as_ref().clone());
        all.extend(fresh);
        let all = Arc::new(all);
        self.memory.lock().expect("cache lock").insert(key, Arc::clone(&all));
        if let Some(path) = self.path(key) {
            // a failed write only loses the cache
            let _ = write_file(&path, &self.spec_hash, key, &all);
        }
        Ok(all)
    }
}

fn write_file(path: &Path, spec_hash: &str, key: u64, v: &[Complex64]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut buf = Vec::with_capacity(40 + 16 * v.len());
    buf.extend_from_slice(MAGIC);
    let mut tag = [b' '; 16];
    for (d, s) in tag.iter_mut().zip(spec_hash.bytes()) {
        *d = s;
    }
    buf.extend_from_slice(&tag);
    buf.extend_from_slice(&key.to_le_bytes());
    buf.extend_from_slice(&(v.len() as u64).to_le_bytes());
    for z in v {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)?.write_all(&buf)?;
    fs::rename(tmp, path)
}

fn read_file(path: &Path, spec_hash: &str, key: u64) -> Option<Vec<Complex64>> {
    let mut buf = Vec::new();
    fs::File::open(path).ok()?.read_to_end(&mut buf).ok()?;
    if buf.len() < 40 || &buf[..8] != MAGIC {
        return None;
    }
    let tag = std::str::from_utf8(&buf[8..24]).ok()?.trim_end();
    let file_key = u64::from_le_bytes(buf[24..32].try_into().ok()?);
    let count = u64::from_le_bytes(buf[32..40].try_into().ok()?) as usize;
    if tag != spec_hash || file_key != key || buf.len() != 40 + 16 * count {
        return None;
    }
    let f = |i: usize| f64::from_le_bytes(buf[i..i + 8].try_into().expect("8 bytes"));
    Some((0..count).map(|j| Complex64::new(f(40 + 16 * j), f(48 + 16 * j))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::LevyMeasureSpec;

    #[test]
    fn disk_roundtrip_and_prefix_reuse() {
        let dir = std::env::temp_dir().join(format!("levykb-cache-test-{}", std::process::id()));
        let m = LevyMeasure::new(LevyMeasureSpec::stable(1.3)).unwrap();
        let grid = NodeGrid { start: 0.5, step: 0.25, count: 100 };
        let a = PsiCache::with_dir(&m, Some(dir.clone())).samples(&m, grid).unwrap();
        // a fresh cache reads the file back and extends it
        let longer = NodeGrid { count: 150, ..grid };
        let b = PsiCache::with_dir(&m, Some(dir.clone())).samples(&m, longer).unwrap();
        assert_eq!(&b[..100], &a[..]);
        for j in 0..150 {
            assert_eq!(b[j], m.psi(longer.node(j)).unwrap());
        }
        // corrupt file is ignored
        let path = PsiCache::with_dir(&m, Some(dir.clone())).path(grid.hash()).unwrap();
        fs::write(&path, b"garbage").unwrap();
        let c = PsiCache::with_dir(&m, Some(dir.clone())).samples(&m, grid).unwrap();
        assert_eq!(&c[..], &a[..]);
        fs::remove_dir_all(dir).unwrap();
    }
}
