//! `EBNC` checkpoint files.
//!
//! ```text
//! magic          b"EBNC"
//! version        u16
//! payload_len    u64            bytes that follow
//! payload:
//!   in_channels  u16
//!   window_len   u32
//!   model_seed   u64
//!   epoch        u32
//!   split_seed   u64
//!   step         u64
//!   n_params     u16
//!   n_params × { name_len u8, name, ndim u8, dims u32 × ndim, f32 × Π dims }
//! ```
//!
//! All integers and floats little-endian.

use std::path::Path;

use super::{ModelConfig, ModelError, Network};
use crate::atomic::write_atomic;
use crate::nn::Tensor;
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"EBNC";
pub const CHECKPOINT_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CheckpointMeta {
    pub epoch: u32,
    pub split_seed: u64,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub network: Network<f32>,
    pub meta: CheckpointMeta,
}

impl Checkpoint {
    pub fn config(&self) -> &ModelConfig {
        self.network.config()
    }
}

pub fn encode_checkpoint(net: &Network<f32>, meta: &CheckpointMeta) -> Vec<u8> {
    let cfg = net.config();
    let mut p = Vec::with_capacity(64 + 4 * net.param_count());
    p.extend_from_slice(&(cfg.in_channels as u16).to_le_bytes());
    p.extend_from_slice(&(cfg.window_len as u32).to_le_bytes());
    p.extend_from_slice(&cfg.seed.to_le_bytes());
    p.extend_from_slice(&meta.epoch.to_le_bytes());
    p.extend_from_slice(&meta.split_seed.to_le_bytes());
    p.extend_from_slice(&meta.step.to_le_bytes());
    p.extend_from_slice(&(net.params().len() as u16).to_le_bytes());
    for ((name, shape), param) in cfg.param_shapes().iter().zip(net.params()) {
        p.push(name.len() as u8);
        p.extend_from_slice(name.as_bytes());
        p.push(shape.len() as u8);
        for &d in shape {
            p.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in param.value.data() {
            p.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut out = Vec::with_capacity(14 + p.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(p.len() as u64).to_le_bytes());
    out.extend_from_slice(&p);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let s = self.buf.get(self.pos..self.pos.saturating_add(n)).ok_or_else(|| {
            ModelError::CorruptPayload(format!("needs {n} bytes at offset {}, {} left", self.pos, self.buf.len() - self.pos))
        })?;
        self.pos += n;
        Ok(s)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N], ModelError> {
        Ok(self.take(N)?.try_into().unwrap())
    }
    fn u8(&mut self) -> Result<u8, ModelError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, ModelError> {
        Ok(u16::from_le_bytes(self.array()?))
    }
    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.array()?))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint, ModelError> {
    if bytes.len() < 4 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(ModelError::BadMagic);
    }
    let mut r = Reader { buf: bytes, pos: 4 };
    let version = r.u16()?;
    if version != CHECKPOINT_VERSION {
        return Err(ModelError::VersionMismatch {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let payload_len = r.u64()?;
    let remaining = (bytes.len() - r.pos) as u64;
    if payload_len != remaining {
        return Err(ModelError::CorruptPayload(format!(
            "header declares {payload_len} payload bytes, file has {remaining}"
        )));
    }
    let config = ModelConfig {
        in_channels: r.u16()? as usize,
        window_len: r.u32()? as usize,
        seed: r.u64()?,
    };
    config
        .validate()
        .map_err(|e| ModelError::CorruptPayload(format!("stored config: {e}")))?;
    let meta = CheckpointMeta {
        epoch: r.u32()?,
        split_seed: r.u64()?,
        step: r.u64()?,
    };
    let expected = config.param_shapes();
    let n = r.u16()? as usize;
    if n != expected.len() {
        return Err(ModelError::CorruptPayload(format!("{n} parameter tensors, expected {}", expected.len())));
    }
    let mut values = Vec::with_capacity(n);
    for (want_name, want_shape) in &expected {
        let len = r.u8()? as usize;
        let name = r.take(len)?;
        let ndim = r.u8()? as usize;
        let shape: Vec<usize> = (0..ndim).map(|_| r.u32().map(|d| d as usize)).collect::<Result<_, _>>()?;
        if name != want_name.as_bytes() || &shape != want_shape {
            return Err(ModelError::CorruptPayload(format!(
                "parameter {:?} {shape:?}, expected {want_name:?} {want_shape:?}",
                String::from_utf8_lossy(name)
            )));
        }
        let count: usize = shape.iter().product();
        let data = r
            .take(4 * count)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        values.push(Tensor::from_vec(&shape, data)?);
    }
    if r.pos != bytes.len() {
        return Err(ModelError::CorruptPayload(format!("{} unread bytes", bytes.len() - r.pos)));
    }
    Ok(Checkpoint {
        network: Network::from_values(&config, values)?,
        meta,
    })
}

pub fn save_checkpoint(path: &Path, net: &Network<f32>, meta: &CheckpointMeta) -> Result<()> {
    write_atomic(path, &encode_checkpoint(net, meta))
}

/// Reads a checkpoint without checking it against any config.
pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode_checkpoint(&bytes)?)
}

/// Reads a checkpoint and checks that its architecture (input channels and
/// window length) matches `expected`.
pub fn load_checkpoint(path: &Path, expected: &ModelConfig) -> Result<Checkpoint> {
    let ck = read_checkpoint(path)?;
    let found = ck.config();
    if found.in_channels != expected.in_channels || found.window_len != expected.window_len {
        return Err(ModelError::ConfigMismatch {
            found: format!("{} leads × {} samples", found.in_channels, found.window_len),
            expected: format!("{} leads × {} samples", expected.in_channels, expected.window_len),
        }
        .into());
    }
    Ok(ck)
}
