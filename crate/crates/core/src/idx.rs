//! Parser and serializer for the IDX container format MNIST ships in.
//!
//! Only the two record types MNIST uses are supported: unsigned-byte
//! image tensors (magic 2051) and unsigned-byte label vectors (magic
//! 2049). All header fields are big-endian. Pixel bytes are normalized
//! to `[0, 1]` on parse and recovered by rounding on serialize, so a
//! parse/serialize round trip is bit-exact.

use alloc::vec::Vec;
use core::fmt;

use crate::mat::Mat;

pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;

/// One parsed IDX file: either an image tensor or a label vector.
#[derive(Debug, Clone, PartialEq)]
pub enum IdxContent {
    /// `count` images of `rows x cols` pixels, flattened row-major and
    /// normalized to `[0, 1]`.
    Images {
        rows: usize,
        cols: usize,
        pixels: Mat,
    },
    Labels(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxError {
    /// Leading magic number is neither 2051 nor 2049.
    BadMagic(u32),
    /// Header declares more payload than the byte sequence contains.
    Truncated { needed: usize, available: usize },
}

impl fmt::Display for IdxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdxError::BadMagic(m) => write!(f, "bad IDX magic number {m:#010x}"),
            IdxError::Truncated { needed, available } => {
                write!(f, "truncated IDX data: need {needed} bytes, have {available}")
            }
        }
    }
}

impl core::error::Error for IdxError {}

fn read_u32_be(bytes: &[u8], offset: usize) -> Result<u32, IdxError> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(IdxError::Truncated {
            needed: end,
            available: bytes.len(),
        });
    }
    let mut buf = [0u8; 4];
    buf.copy_from_slice(&bytes[offset..end]);
    Ok(u32::from_be_bytes(buf))
}

/// Parses one IDX byte sequence into images or labels.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxContent, IdxError> {
    let magic = read_u32_be(bytes, 0)?;
    match magic {
        IMAGE_MAGIC => {
            let count = read_u32_be(bytes, 4)? as usize;
            let rows = read_u32_be(bytes, 8)? as usize;
            let cols = read_u32_be(bytes, 12)? as usize;
            let needed = 16 + count * rows * cols;
            if bytes.len() < needed {
                return Err(IdxError::Truncated {
                    needed,
                    available: bytes.len(),
                });
            }
            let pixels: Vec<f64> = bytes[16..needed].iter().map(|&b| b as f64 / 255.0).collect();
            Ok(IdxContent::Images {
                rows,
                cols,
                pixels: Mat::from_vec(count, rows * cols, pixels),
            })
        }
        LABEL_MAGIC => {
            let count = read_u32_be(bytes, 4)? as usize;
            let needed = 8 + count;
            if bytes.len() < needed {
                return Err(IdxError::Truncated {
                    needed,
                    available: bytes.len(),
                });
            }
            Ok(IdxContent::Labels(bytes[8..needed].to_vec()))
        }
        other => Err(IdxError::BadMagic(other)),
    }
}

/// Serializes normalized images back to IDX bytes.
///
/// Pixels are mapped back to bytes with `round(p * 255)`, the exact
/// inverse of the normalization applied by [`parse_idx`].
pub fn serialize_images(rows: usize, cols: usize, pixels: &Mat) -> Vec<u8> {
    assert_eq!(pixels.cols(), rows * cols);
    let count = pixels.rows();
    let mut out = Vec::with_capacity(16 + count * rows * cols);
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(count as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    out.extend(pixels.as_slice().iter().map(|&p| libm::round(p * 255.0) as u8));
    out
}

/// Serializes labels back to IDX bytes.
pub fn serialize_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
