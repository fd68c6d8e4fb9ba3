//! Binary parameter container.
//!
//! Layout (little-endian): magic `SCCKPT\0\0`, `u32` format version, `u32`
//! header length, JSON header, `u32` parameter count, then per parameter
//! `u32` name length, UTF-8 name, `u32` rank, `u64` extents, `f64` values.

use std::fs;
use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::NnError;
use crate::param::ParamStore;
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 8] = b"SCCKPT\0\0";
pub const FORMAT_VERSION: u32 = 1;

/// Hyperparameter header plus parameter values.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub header: Value,
    pub store: ParamStore,
}

impl Checkpoint {
    pub fn new(header: Value, store: ParamStore) -> Checkpoint {
        Checkpoint { header, store }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, NnError> {
        encode(&self.header, &self.store)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint, NnError> {
        decode(bytes)
    }

    /// Writes the file and returns its content hash.
    pub fn save(&self, path: &Path) -> Result<String, NnError> {
        let bytes = self.to_bytes()?;
        fs::write(path, &bytes)?;
        Ok(content_hash(&bytes))
    }

    pub fn load(path: &Path) -> Result<Checkpoint, NnError> {
        decode(&fs::read(path)?)
    }

    pub fn hash(&self) -> Result<String, NnError> {
        Ok(content_hash(&self.to_bytes()?))
    }
}

/// Hex SHA-256 of a serialized checkpoint.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn len_u32(n: usize, what: &str) -> Result<u32, NnError> {
    u32::try_from(n).map_err(|_| NnError::Checkpoint(format!("{what} too large: {n}")))
}

pub fn encode(header: &Value, store: &ParamStore) -> Result<Vec<u8>, NnError> {
    let header = serde_json::to_vec(header).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    let mut out = Vec::with_capacity(64 + header.len() + store.num_values() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&len_u32(header.len(), "header")?.to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&len_u32(store.len(), "parameter count")?.to_le_bytes());
    for (_, p) in store.iter() {
        p.value.ensure_finite(&p.name)?;
        out.extend_from_slice(&len_u32(p.name.len(), "name")?.to_le_bytes());
        out.extend_from_slice(p.name.as_bytes());
        out.extend_from_slice(&len_u32(p.value.shape().len(), "rank")?.to_le_bytes());
        for &d in p.value.shape() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for &v in p.value.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NnError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| NnError::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, NnError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint, NnError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(NnError::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(NnError::Checkpoint(format!("unsupported format version {version}")));
    }
    let header_len = r.u32()? as usize;
    let header: Value = serde_json::from_slice(r.take(header_len)?).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    let count = r.u32()?;
    let mut store = ParamStore::new();
    for _ in 0..count {
        let name_len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?).map_err(|e| NnError::Checkpoint(e.to_string()))?.to_string();
        let rank = r.u32()? as usize;
        let mut shape = Vec::with_capacity(rank.min(8));
        for _ in 0..rank {
            shape.push(usize::try_from(r.u64()?).map_err(|e| NnError::Checkpoint(e.to_string()))?);
        }
        let n = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let n = n.ok_or_else(|| NnError::Checkpoint(format!("{name}: shape overflow")))?;
        let raw = r.take(n.checked_mul(8).ok_or_else(|| NnError::Checkpoint("size overflow".into()))?)?;
        let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        store.add(&name, Tensor::new(shape, data)?)?;
    }
    if r.pos != bytes.len() {
        return Err(NnError::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(Checkpoint { header, store })
}
