//! On-disk memo of interpolated `h^0` values.
//!
//! One JSON file per entry, named by the SHA-256 of
//! `(surface, reduced class, prime, point-set hash)`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use pv_core::fatpoints::PointSet;
use pv_core::picard::DivisorClass;
use pv_core::vanishing::{H0Store, MemoryStore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "PV_CACHE_DIR";

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Content hash of a point set, independent of its name.
pub fn pointset_hash(points: &PointSet) -> String {
    let record = points.to_record();
    let mut h = Sha256::new();
    h.update(format!("{}|{}|", record.surface, record.prime));
    for p in &record.points {
        h.update(format!("{p:?};"));
    }
    hex(&h.finalize())
}

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    surface: String,
    divisor: Vec<i64>,
    prime: u32,
    pointset: String,
    h0: u64,
}

pub struct DiskStore {
    dir: PathBuf,
    prime: u32,
    pointset: String,
    memory: MemoryStore,
}

impl DiskStore {
    pub fn open(dir: impl AsRef<Path>, points: &PointSet) -> io::Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, prime: points.prime(), pointset: pointset_hash(points), memory: MemoryStore::default() })
    }

    /// The store named by `PV_CACHE_DIR`, if set.
    pub fn from_env(points: &PointSet) -> io::Result<Option<Self>> {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) if !dir.is_empty() => Self::open(dir, points).map(Some),
            _ => Ok(None),
        }
    }

    fn path(&self, d: &DivisorClass) -> PathBuf {
        let mut h = Sha256::new();
        h.update(format!("{}|{:?}|{}|{}", d.surface(), d.coeffs(), self.prime, self.pointset));
        self.dir.join(format!("{}.json", hex(&h.finalize())))
    }

    fn read(&self, d: &DivisorClass) -> Option<u64> {
        let text = fs::read_to_string(self.path(d)).ok()?;
        let entry: Entry = serde_json::from_str(&text).ok()?;
        let matches = entry.surface == d.surface().to_string()
            && entry.divisor == d.coeffs()
            && entry.prime == self.prime
            && entry.pointset == self.pointset;
        matches.then_some(entry.h0)
    }

    fn write(&self, d: &DivisorClass, h0: u64) -> io::Result<()> {
        let entry = Entry {
            surface: d.surface().to_string(),
            divisor: d.coeffs().to_vec(),
            prime: self.prime,
            pointset: self.pointset.clone(),
            h0,
        };
        let path = self.path(d);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(&entry)?)?;
        fs::rename(tmp, path)
    }
}

impl H0Store for DiskStore {
    fn lookup(&self, reduced: &DivisorClass) -> Option<u64> {
        if let Some(v) = self.memory.lookup(reduced) {
            return Some(v);
        }
        let v = self.read(reduced)?;
        self.memory.record(reduced, v);
        Some(v)
    }

    fn record(&self, reduced: &DivisorClass, h0: u64) {
        self.memory.record(reduced, h0);
        // a failed write only costs a recomputation next time
        let _ = self.write(reduced, h0);
    }
}
