//! Checkpoint serialization.
//!
//! Layout: magic bytes `SAZ1`, a format version byte, the manifest (array
//! count, then per array a role tag and `rows x cols` shape), then every
//! parameter array as row-major 64-bit little-endian floats in manifest
//! order. Write → read → write must be byte-identical.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{ArraySpec, NetConfig, Network, Params, Real};

pub const MAGIC: [u8; 4] = *b"SAZ1";
pub const FORMAT_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes; not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint format version {0}")]
    UnsupportedVersion(u8),
    #[error("checkpoint manifest does not match the configured architecture: {0}")]
    ManifestMismatch(String),
    #[error("checkpoint holds a non-finite parameter")]
    NonFinite,
}

impl<T: Real> Network<T> {
    /// Writes the parameters to `path` in the checkpoint format.
    pub fn save_checkpoint(&self, path: &Path) -> Result<(), CheckpointError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&MAGIC)?;
        w.write_all(&[FORMAT_VERSION])?;
        let specs = self.params.specs();
        w.write_all(&(specs.len() as u32).to_le_bytes())?;
        for spec in &specs {
            w.write_all(&[spec.tag])?;
            w.write_all(&spec.rows.to_le_bytes())?;
            w.write_all(&spec.cols.to_le_bytes())?;
        }
        for arr in self.params.arrays() {
            for v in arr {
                w.write_all(&v.as_f64().to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a checkpoint written by [`Network::save_checkpoint`]. The
    /// manifest must match the architecture implied by `cfg` exactly.
    pub fn load_checkpoint(cfg: NetConfig, path: &Path) -> Result<Self, CheckpointError> {
        cfg.validate().map_err(CheckpointError::ManifestMismatch)?;
        let mut r = BufReader::new(File::open(path)?);

        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != FORMAT_VERSION {
            return Err(CheckpointError::UnsupportedVersion(version[0]));
        }

        let mut count_bytes = [0u8; 4];
        r.read_exact(&mut count_bytes)?;
        let count = u32::from_le_bytes(count_bytes) as usize;

        let mut manifest = Vec::with_capacity(count);
        for _ in 0..count {
            let mut tag = [0u8; 1];
            r.read_exact(&mut tag)?;
            let mut rows = [0u8; 4];
            r.read_exact(&mut rows)?;
            let mut cols = [0u8; 4];
            r.read_exact(&mut cols)?;
            manifest.push(ArraySpec {
                tag: tag[0],
                rows: u32::from_le_bytes(rows),
                cols: u32::from_le_bytes(cols),
            });
        }

        // Shape check against the configured architecture before reading data.
        let mut net = Network {
            params: Params::<T>::zeros(&cfg),
            cfg,
        };
        let expected = net.params.specs();
        if manifest.len() != expected.len() {
            return Err(CheckpointError::ManifestMismatch(format!(
                "expected {} arrays, file has {}",
                expected.len(),
                manifest.len()
            )));
        }
        for (i, (a, b)) in expected.iter().zip(&manifest).enumerate() {
            if a != b {
                return Err(CheckpointError::ManifestMismatch(format!(
                    "array {i}: expected tag {:#04x} shape {}x{}, file has tag {:#04x} shape {}x{}",
                    a.tag, a.rows, a.cols, b.tag, b.rows, b.cols
                )));
            }
        }

        for arr in net.params.arrays_mut() {
            for v in arr.iter_mut() {
                let mut bytes = [0u8; 8];
                r.read_exact(&mut bytes)?;
                let x = f64::from_le_bytes(bytes);
                if !x.is_finite() {
                    return Err(CheckpointError::NonFinite);
                }
                *v = T::from_f64(x);
            }
        }
        Ok(net)
    }
}
