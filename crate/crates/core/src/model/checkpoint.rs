//! Binary checkpoint: magic, version, JSON-encoded `ModelConfig`, then the flat
//! parameter vector as little-endian `f64`.
//!
//! ```text
//! "AFTRCKPT" | u32 version | u32 config_len | config json | u64 n_params | n_params x f64
//! ```

use std::path::Path;

use super::{Model, ModelConfig};
use crate::error::{Error, Result};
use crate::io::write_file;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"AFTRCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint(model: &Model) -> Vec<u8> {
    let cfg = serde_json::to_vec(model.config()).expect("ModelConfig serializes");
    let params = model.params();
    let mut out = Vec::with_capacity(24 + cfg.len() + 8 * params.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(cfg.len() as u32).to_le_bytes());
    out.extend_from_slice(&cfg);
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len()).ok_or_else(|| {
            Error::Checkpoint(format!("truncated at byte {} (need {n} more)", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<Model> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    if c.take(8)? != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic".to_string()));
    }
    let version = c.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {version} (expected {CHECKPOINT_VERSION})"
        )));
    }
    let cfg_len = c.u32()? as usize;
    let cfg: ModelConfig = serde_json::from_slice(c.take(cfg_len)?)
        .map_err(|e| Error::Checkpoint(format!("config: {e}")))?;
    let n = c.u64()? as usize;
    if n != cfg.param_count() {
        return Err(Error::Checkpoint(format!(
            "config implies {} parameters, file holds {n}",
            cfg.param_count()
        )));
    }
    let raw = c.take(n.checked_mul(8).ok_or_else(|| Error::Checkpoint("size overflow".to_string()))?)?;
    if c.pos != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    let params = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    Model::from_params(cfg, params).map_err(|e| Error::Checkpoint(e.to_string()))
}

pub fn save_checkpoint(model: &Model, path: &Path) -> Result<()> {
    write_file(path, &write_checkpoint(model))
}

pub fn load_checkpoint(path: &Path) -> Result<Model> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Model {
        Model::init(ModelConfig {
            hidden_dim: 4,
            temporal_layers: 1,
            kernel_size: 3,
            seed: 9,
            ..ModelConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let m = small();
        assert_eq!(read_checkpoint(&write_checkpoint(&m)).unwrap(), m);
    }

    #[test]
    fn corruption_is_rejected() {
        let bytes = write_checkpoint(&small());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(read_checkpoint(&bad), Err(Error::Checkpoint(_))));
        assert!(matches!(read_checkpoint(&bytes[..bytes.len() - 3]), Err(Error::Checkpoint(_))));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(read_checkpoint(&long), Err(Error::Checkpoint(_))));
        let mut ver = bytes;
        ver[8] = 7;
        assert!(matches!(read_checkpoint(&ver), Err(Error::Checkpoint(_))));
    }
}
