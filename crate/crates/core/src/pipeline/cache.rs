//! On-disk feature cache: one binary table per
//! (subject, condition, band, method, window).
//!
//! File layout, all integers little-endian:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 8     | magic `EEGFEAT1`                          |
//! | 32    | SHA-256 of the producing inputs           |
//! | 4     | epoch count (u32)                         |
//! | 4     | values per epoch (u32)                    |
//! | 8·n   | f64 values, epoch-major                   |
//!
//! An entry whose stored digest differs from the expected one is stale and
//! is never returned.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::debug;
use sha2::{Digest, Sha256};

use crate::connectivity::Method;
use crate::dsp::Band;
use crate::edf::Condition;

const MAGIC: &[u8; 8] = b"EEGFEAT1";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CacheKey {
    pub subject_id: String,
    pub condition: Condition,
    pub band: Band,
    pub method: Method,
    pub window_s: f64,
}

impl CacheKey {
    fn relative_path(&self) -> PathBuf {
        PathBuf::from(&self.subject_id).join(format!(
            "{}_{}_{}_{}s.feat",
            self.condition, self.band, self.method, self.window_s
        ))
    }
}

/// Digest of everything a cached table depends on.
pub fn content_hash(
    recording_bytes: &[u8],
    key: &CacheKey,
    filter_order: usize,
    block_len: usize,
) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(FORMAT_VERSION.to_le_bytes());
    h.update(Sha256::digest(recording_bytes));
    let band = key.band.definition();
    h.update(band.low_hz.to_le_bytes());
    h.update(band.high_hz.to_le_bytes());
    h.update((filter_order as u64).to_le_bytes());
    h.update((block_len as u64).to_le_bytes());
    h.update(key.method.key().as_bytes());
    h.update(key.window_s.to_le_bytes());
    h.finalize().into()
}

#[derive(Debug, Clone)]
pub struct FeatureCache {
    root: PathBuf,
}

impl FeatureCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FeatureCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        self.root.join(key.relative_path())
    }

    /// Returns the table only if it exists, parses, and carries `hash`.
    pub fn load(&self, key: &CacheKey, hash: &[u8; 32]) -> Option<Vec<Vec<f64>>> {
        let path = self.path(key);
        let bytes = fs::read(&path).ok()?;
        let table = decode(&bytes, hash);
        if table.is_none() {
            debug!("stale or unreadable cache entry {}", path.display());
        }
        table
    }

    pub fn store(&self, key: &CacheKey, hash: &[u8; 32], rows: &[Vec<f64>]) -> std::io::Result<()> {
        let path = self.path(key);
        let dir = path.parent().unwrap_or(&self.root);
        fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(&encode(hash, rows))?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(())
    }
}

fn encode(hash: &[u8; 32], rows: &[Vec<f64>]) -> Vec<u8> {
    let width = rows.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(48 + rows.len() * width * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(hash);
    out.extend_from_slice(&(rows.len() as u32).to_le_bytes());
    out.extend_from_slice(&(width as u32).to_le_bytes());
    for row in rows {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn decode(bytes: &[u8], hash: &[u8; 32]) -> Option<Vec<Vec<f64>>> {
    if bytes.len() < 48 || &bytes[..8] != MAGIC || &bytes[8..40] != hash {
        return None;
    }
    let n_rows = u32::from_le_bytes(bytes[40..44].try_into().ok()?) as usize;
    let width = u32::from_le_bytes(bytes[44..48].try_into().ok()?) as usize;
    let body = &bytes[48..];
    if body.len() != n_rows * width * 8 {
        return None;
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if width == 0 {
        return Some(vec![Vec::new(); n_rows]);
    }
    Some(values.chunks(width).map(<[f64]>::to_vec).collect())
}
