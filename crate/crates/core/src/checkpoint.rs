//! Versioned binary checkpoint format for trained models.
//!
//! Layout, all little-endian after the magic:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "MLPCHKPT"
//! 8       4     format version (u32, currently 1)
//! 12      4     hidden size H (u32)
//! 16      8*..  w1 (H*784 f64, row-major), b1 (H), w2 (H), b2 (1)
//! ```
//!
//! `load(save(m))` reproduces `m` bit for bit.

use alloc::vec::Vec;
use core::fmt;

use crate::data::INPUT_DIM;
use crate::mat::Mat;
use crate::mlp::Mlp;

pub const MAGIC: [u8; 8] = *b"MLPCHKPT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckpointError {
    BadMagic,
    VersionUnsupported(u32),
    Truncated { needed: usize, available: usize },
    TrailingBytes { extra: usize },
    ZeroHiddenSize,
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckpointError::BadMagic => f.write_str("not a model checkpoint (bad magic)"),
            CheckpointError::VersionUnsupported(v) => {
                write!(f, "unsupported checkpoint version {v}")
            }
            CheckpointError::Truncated { needed, available } => {
                write!(f, "truncated checkpoint: need {needed} bytes, have {available}")
            }
            CheckpointError::TrailingBytes { extra } => {
                write!(f, "checkpoint has {extra} trailing bytes")
            }
        }
    }
}

impl core::error::Error for CheckpointError {}

/// Expected total byte length for a given hidden size.
pub fn checkpoint_len(hidden: usize) -> usize {
    16 + 8 * (hidden * INPUT_DIM + hidden + hidden + 1)
}

pub fn save_checkpoint(model: &Mlp) -> Vec<u8> {
    let mut out = Vec::with_capacity(checkpoint_len(model.hidden_size()));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.hidden_size() as u32).to_le_bytes());
    let values = model
        .w1()
        .as_slice()
        .iter()
        .chain(model.b1())
        .chain(model.w2())
        .chain(core::iter::once(&model.b2()));
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn load_checkpoint(bytes: &[u8]) -> Result<Mlp, CheckpointError> {
    if bytes.len() < 16 {
        return Err(CheckpointError::Truncated {
            needed: 16,
            available: bytes.len(),
        });
    }
    if bytes[..8] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(CheckpointError::VersionUnsupported(version));
    }
    let hidden = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let needed = checkpoint_len(hidden);
    if bytes.len() < needed {
        return Err(CheckpointError::Truncated {
            needed,
            available: bytes.len(),
        });
    }
    if bytes.len() > needed {
        return Err(CheckpointError::TrailingBytes {
            extra: bytes.len() - needed,
        });
    }
    let mut floats = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let w1: Vec<f64> = floats.by_ref().take(hidden * INPUT_DIM).collect();
    let b1: Vec<f64> = floats.by_ref().take(hidden).collect();
    let w2: Vec<f64> = floats.by_ref().take(hidden).collect();
    let b2 = floats.next().expect("length checked above");
    Mlp::from_parts(Mat::from_vec(hidden, INPUT_DIM, w1), b1, w2, b2)
        .map_err(|_| CheckpointError::BadMagic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::init_mlp;

    #[test]
    fn round_trip_is_bit_identical() {
        let m = init_mlp(5, 42).unwrap();
        let bytes = save_checkpoint(&m);
        assert_eq!(load_checkpoint(&bytes).unwrap(), m);
    }

    #[test]
    fn h24_payload_length() {
        let m = init_mlp(24, 0).unwrap();
        assert_eq!(save_checkpoint(&m).len(), 150_936);
        assert_eq!(checkpoint_len(24), 8 + 4 + 4 + 8 * (24 * 784 + 24 + 24 + 1));
    }

    #[test]
    fn detects_truncation_and_trailing() {
        let m = init_mlp(2, 1).unwrap();
        let bytes = save_checkpoint(&m);
        assert!(matches!(
            load_checkpoint(&bytes[..bytes.len() - 1]),
            Err(CheckpointError::Truncated { .. })
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert_eq!(
            load_checkpoint(&extra),
            Err(CheckpointError::TrailingBytes { extra: 1 })
        );
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let m = init_mlp(2, 1).unwrap();
        let mut bytes = save_checkpoint(&m);
        bytes[0] = b'X';
        assert_eq!(load_checkpoint(&bytes), Err(CheckpointError::BadMagic));
        let mut bytes = save_checkpoint(&m);
        bytes[8] = 9;
        assert_eq!(
            load_checkpoint(&bytes),
            Err(CheckpointError::VersionUnsupported(9))
        );
    }
}
