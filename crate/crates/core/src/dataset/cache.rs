//! `EBW1` beat-window cache.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic        b"EBW1"
//! version      u16            (1)
//! n_windows    u32
//! n_leads      u16
//! window_len   u16
//! n_windows × {
//!     id_len   u8, record_id bytes (UTF-8)
//!     r_sample i64
//!     label    u8             (BeatClass encoding 0..=4)
//!     samples  f32 × n_leads × window_len, channel-major
//! }
//! ```

use std::path::Path;

use super::{BeatWindow, DatasetError};
use crate::atomic::write_atomic;
use crate::wfdb::BeatClass;
use crate::{Error, Result};

pub const CACHE_MAGIC: &[u8; 4] = b"EBW1";
pub const CACHE_VERSION: u16 = 1;

/// Serializes windows into the cache layout. All windows must share one
/// shape.
pub fn encode_cache(windows: &[BeatWindow]) -> Result<Vec<u8>, DatasetError> {
    let (n_leads, window_len) = windows.first().map_or((0, 0), |w| (w.n_leads, w.window_len()));
    if n_leads > u16::MAX as usize || window_len > u16::MAX as usize || windows.len() > u32::MAX as usize {
        return Err(DatasetError::Inconsistent("dimensions exceed the cache field widths".into()));
    }
    let mut out = Vec::with_capacity(16 + windows.len() * (16 + 4 * n_leads * window_len));
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(windows.len() as u32).to_le_bytes());
    out.extend_from_slice(&(n_leads as u16).to_le_bytes());
    out.extend_from_slice(&(window_len as u16).to_le_bytes());
    for w in windows {
        if w.n_leads != n_leads || w.samples.len() != n_leads * window_len {
            return Err(DatasetError::Inconsistent(format!(
                "window at {}:{} has shape {}×{}, expected {n_leads}×{window_len}",
                w.record_id,
                w.r_sample,
                w.n_leads,
                w.window_len()
            )));
        }
        let id = w.record_id.as_bytes();
        if id.len() > u8::MAX as usize {
            return Err(DatasetError::Inconsistent(format!("record id {:?} longer than 255 bytes", w.record_id)));
        }
        out.push(id.len() as u8);
        out.extend_from_slice(id);
        out.extend_from_slice(&w.r_sample.to_le_bytes());
        out.push(w.label as u8);
        for v in &w.samples {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DatasetError> {
        let s = self
            .buf
            .get(self.pos..self.pos + n)
            .ok_or(DatasetError::Truncated { offset: self.pos })?;
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, DatasetError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, DatasetError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, DatasetError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn i64(&mut self) -> Result<i64, DatasetError> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_cache(bytes: &[u8]) -> Result<Vec<BeatWindow>, DatasetError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4).map_err(|_| DatasetError::BadMagic)? != CACHE_MAGIC {
        return Err(DatasetError::BadMagic);
    }
    let version = r.u16()?;
    if version != CACHE_VERSION {
        return Err(DatasetError::UnsupportedVersion(version));
    }
    let n_windows = r.u32()? as usize;
    let n_leads = r.u16()? as usize;
    let window_len = r.u16()? as usize;
    if n_windows > 0 && (n_leads == 0 || window_len == 0) {
        return Err(DatasetError::Inconsistent("zero-sized windows".into()));
    }
    let mut windows = Vec::with_capacity(n_windows.min(bytes.len() / (4 * n_leads * window_len).max(1)));
    for _ in 0..n_windows {
        let id_len = r.u8()? as usize;
        let id_at = r.pos;
        let record_id = std::str::from_utf8(r.take(id_len)?)
            .map_err(|_| DatasetError::Inconsistent(format!("record id at offset {id_at} is not UTF-8")))?
            .to_string();
        let r_sample = r.i64()?;
        let label_at = r.pos;
        let label = BeatClass::from_index(r.u8()? as usize)
            .ok_or_else(|| DatasetError::Inconsistent(format!("bad label at offset {label_at}")))?;
        let samples = r
            .take(4 * n_leads * window_len)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        windows.push(BeatWindow {
            record_id,
            r_sample,
            label,
            n_leads,
            samples,
        });
    }
    if r.pos != bytes.len() {
        return Err(DatasetError::Inconsistent(format!(
            "{} trailing bytes after the last window",
            bytes.len() - r.pos
        )));
    }
    Ok(windows)
}

pub fn write_cache_file(path: &Path, windows: &[BeatWindow]) -> Result<()> {
    write_atomic(path, &encode_cache(windows)?)
}

pub fn read_cache_file(path: &Path) -> Result<Vec<BeatWindow>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode_cache(&bytes)?)
}
