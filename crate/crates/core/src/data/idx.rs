//! Big-endian IDX containers: `u32` magic (`0x0803` images, `0x0801`
//! labels), one `u32` per dimension, then raw bytes. Gzipped files are
//! detected by their `1f 8b` prefix.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use super::{PIXELS, SIDE};
use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

pub type RawImage = [u8; PIXELS];

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(bytes.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(bytes)
    }
}

fn header(bytes: &[u8], magic: u32, dims: usize) -> Result<Vec<usize>> {
    let need = 4 * (1 + dims);
    if bytes.len() < need {
        return Err(Error::Length {
            needed: need,
            available: bytes.len(),
        });
    }
    let word = |i: usize| u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().expect("4 bytes"));
    let found = word(0);
    if found != magic {
        return Err(Error::Format(format!(
            "magic {found:#010x}, expected {magic:#010x}"
        )));
    }
    Ok((1..=dims).map(|i| word(i) as usize).collect())
}

fn payload(bytes: &[u8], offset: usize, len: usize) -> Result<&[u8]> {
    let available = bytes.len() - offset;
    if available < len {
        return Err(Error::Length {
            needed: len,
            available,
        });
    }
    if available > len {
        return Err(Error::Format(format!("{} trailing bytes", available - len)));
    }
    Ok(&bytes[offset..])
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<RawImage>> {
    let dims = header(bytes, IMAGES_MAGIC, 3)?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    if rows != SIDE || cols != SIDE {
        return Err(Error::Format(format!("images are {rows}×{cols}, expected 28×28")));
    }
    let data = payload(bytes, 16, count * PIXELS)?;
    Ok(data
        .chunks_exact(PIXELS)
        .map(|c| c.try_into().expect("PIXELS bytes"))
        .collect())
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let count = header(bytes, LABELS_MAGIC, 1)?[0];
    let data = payload(bytes, 8, count)?;
    if let Some(&bad) = data.iter().find(|&&l| l > 9) {
        return Err(Error::Format(format!("label {bad} is not a digit")));
    }
    Ok(data.to_vec())
}

pub fn encode_idx_images(images: &[RawImage]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * PIXELS);
    for word in [IMAGES_MAGIC, images.len() as u32, SIDE as u32, SIDE as u32] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    for img in images {
        out.extend_from_slice(img);
    }
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<Vec<RawImage>> {
    parse_idx_images(&read_maybe_gz(path.as_ref())?)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&read_maybe_gz(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_a_length_error() {
        assert!(matches!(parse_idx_images(&[]), Err(Error::Length { .. })));
        assert!(matches!(parse_idx_labels(&[]), Err(Error::Length { .. })));
    }

    #[test]
    fn wrong_type_code() {
        let mut bytes = encode_idx_labels(&[1, 2]);
        bytes[3] = 0x02;
        assert!(matches!(parse_idx_labels(&bytes), Err(Error::Format(_))));
        let mut bytes = encode_idx_images(&[[0; PIXELS]]);
        bytes[3] = 0x02;
        assert!(matches!(parse_idx_images(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_non_digit_labels_and_trailing_bytes() {
        assert!(parse_idx_labels(&encode_idx_labels(&[3, 11])).is_err());
        let mut bytes = encode_idx_labels(&[3]);
        bytes.push(0);
        assert!(matches!(parse_idx_labels(&bytes), Err(Error::Format(_))));
    }
}
