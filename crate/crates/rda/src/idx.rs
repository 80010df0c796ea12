//! IDX files: big-endian `u32` magic and dimensions followed by raw bytes.
//!
//! ```text
//! images: 0x00000803  N  H  W  pixels[N·H·W]
//! labels: 0x00000801  N  labels[N]
//! ```

use std::fs;
use std::path::Path;

use rda_core::datasets::RawImageSet;
use thiserror::Error;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IdxError {
    #[error("bad magic {found:#010x} at offset 0, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("file ends at offset {len} but {needed} bytes are needed")]
    Truncated { needed: usize, len: usize },
    #[error("{extra} trailing bytes after offset {offset}")]
    Trailing { offset: usize, extra: usize },
    #[error("zero image dimension at offset {offset}")]
    ZeroDimension { offset: usize },
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32, IdxError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(IdxError::Truncated {
            needed: offset + 4,
            len: bytes.len(),
        })
}

fn expect_magic(bytes: &[u8], expected: u32) -> Result<(), IdxError> {
    let found = read_u32(bytes, 0)?;
    if found != expected {
        return Err(IdxError::BadMagic { expected, found });
    }
    Ok(())
}

fn payload(bytes: &[u8], offset: usize, count: usize) -> Result<&[u8], IdxError> {
    let end = offset.checked_add(count).ok_or(IdxError::Truncated {
        needed: usize::MAX,
        len: bytes.len(),
    })?;
    if bytes.len() < end {
        return Err(IdxError::Truncated {
            needed: end,
            len: bytes.len(),
        });
    }
    if bytes.len() > end {
        return Err(IdxError::Trailing {
            offset: end,
            extra: bytes.len() - end,
        });
    }
    Ok(&bytes[offset..end])
}

/// `(count, height, width, pixels)` of an image file.
pub fn parse_images(bytes: &[u8]) -> Result<(usize, usize, usize, Vec<u8>), IdxError> {
    expect_magic(bytes, IMAGE_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let height = read_u32(bytes, 8)? as usize;
    let width = read_u32(bytes, 12)? as usize;
    if height == 0 {
        return Err(IdxError::ZeroDimension { offset: 8 });
    }
    if width == 0 {
        return Err(IdxError::ZeroDimension { offset: 12 });
    }
    let size = count
        .checked_mul(height)
        .and_then(|v| v.checked_mul(width))
        .ok_or(IdxError::Truncated {
            needed: usize::MAX,
            len: bytes.len(),
        })?;
    Ok((count, height, width, payload(bytes, 16, size)?.to_vec()))
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>, IdxError> {
    expect_magic(bytes, LABEL_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    Ok(payload(bytes, 8, count)?.to_vec())
}

pub fn encode_images(set: &RawImageSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + set.pixels().len());
    for v in [IMAGE_MAGIC, set.len() as u32, set.height() as u32, set.width() as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(set.pixels());
    out
}

/// Labels above 255 do not fit the format and are rejected.
pub fn encode_labels(labels: &[u32]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    for &l in labels {
        out.push(u8::try_from(l).map_err(|_| Error::Config(format!("label {l} does not fit in a byte")))?);
    }
    Ok(out)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<RawImageSet> {
    let (count, height, width, pixels) = parse_images(&read(images_path)?).map_err(|source| Error::Idx {
        path: images_path.to_path_buf(),
        source,
    })?;
    let labels = parse_labels(&read(labels_path)?).map_err(|source| Error::Idx {
        path: labels_path.to_path_buf(),
        source,
    })?;
    if labels.len() != count {
        return Err(Error::Config(format!(
            "{} holds {count} images but {} holds {} labels",
            images_path.display(),
            labels_path.display(),
            labels.len()
        )));
    }
    Ok(RawImageSet::new(
        pixels,
        count,
        height,
        width,
        labels.into_iter().map(u32::from).collect(),
    )?)
}

pub fn write_idx(images_path: &Path, labels_path: &Path, set: &RawImageSet) -> Result<()> {
    let labels = encode_labels(set.labels())?;
    fs::write(images_path, encode_images(set)).map_err(|e| Error::io(images_path, e))?;
    fs::write(labels_path, labels).map_err(|e| Error::io(labels_path, e))
}
