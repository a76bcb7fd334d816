//! Native cache of augmented examples.
//!
//! `"GLDS" | version: u32 LE | count: u64 LE`, then per example a label
//! byte followed by 784 little-endian `f64` pixels.

use std::fs;
use std::path::Path;

use super::{LabeledImage, PIXELS};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GLDS";
pub const VERSION: u32 = 1;
const RECORD: usize = 1 + 8 * PIXELS;

pub fn encode(examples: &[LabeledImage]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + examples.len() * RECORD);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(examples.len() as u64).to_le_bytes());
    for ex in examples {
        out.push(ex.label());
        for p in ex.pixels() {
            out.extend_from_slice(&p.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Vec<LabeledImage>> {
    if bytes.len() < 16 {
        return Err(Error::Length {
            needed: 16,
            available: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("not a GLDS dataset cache".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::Format(format!("unsupported cache version {version}")));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = &bytes[16..];
    let needed = count
        .checked_mul(RECORD)
        .ok_or_else(|| Error::Format(format!("count {count} too large")))?;
    if body.len() != needed {
        return Err(Error::Length {
            needed,
            available: body.len(),
        });
    }
    body.chunks_exact(RECORD)
        .map(|rec| {
            let pixels = rec[1..]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            LabeledImage::new(pixels, rec[0])
        })
        .collect()
}

pub fn save(path: impl AsRef<Path>, examples: &[LabeledImage]) -> Result<()> {
    Ok(fs::write(path, encode(examples))?)
}

pub fn load(path: impl AsRef<Path>) -> Result<Vec<LabeledImage>> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let ex: Vec<_> = (0..3)
            .map(|i| LabeledImage::new(vec![i as f64 / 3.0; PIXELS], i).unwrap())
            .collect();
        let bytes = encode(&ex);
        assert_eq!(bytes.len(), 16 + 3 * RECORD);
        assert_eq!(decode(&bytes).unwrap(), ex);
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(Error::Length { .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(Error::Format(_))));
    }
}
