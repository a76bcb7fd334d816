use std::io::Write;

use flate2::write::GzEncoder;
use flate2::Compression;
use glnn::data::idx::{self, RawImage};
use glnn::data::{load_labeled, PIXELS};
use glnn::Error;

/// Four 28×28 images written out byte by byte: image k has value
/// `(k * 60 + row + col) % 256` at (row, col); labels 3, 1, 4, 1.
fn fixture() -> (Vec<u8>, Vec<u8>) {
    let mut images = vec![0x00, 0x00, 0x08, 0x03, 0, 0, 0, 4, 0, 0, 0, 28, 0, 0, 0, 28];
    for k in 0..4usize {
        for row in 0..28 {
            for col in 0..28 {
                images.push(((k * 60 + row + col) % 256) as u8);
            }
        }
    }
    let labels = vec![0x00, 0x00, 0x08, 0x01, 0, 0, 0, 4, 3, 1, 4, 1];
    (images, labels)
}

#[test]
fn parses_known_pixels() {
    let (images, labels) = fixture();
    let parsed = idx::parse_idx_images(&images).unwrap();
    assert_eq!(parsed.len(), 4);
    assert_eq!(parsed[0][0], 0);
    assert_eq!(parsed[0][27], 27);
    assert_eq!(parsed[1][28 * 5 + 7], 72);
    assert_eq!(parsed[3][PIXELS - 1], (180 + 54) as u8);
    assert_eq!(idx::parse_idx_labels(&labels).unwrap(), vec![3, 1, 4, 1]);
}

#[test]
fn reserializes_byte_identically() {
    let (images, labels) = fixture();
    let parsed: Vec<RawImage> = idx::parse_idx_images(&images).unwrap();
    assert_eq!(idx::encode_idx_images(&parsed), images);
    assert_eq!(idx::encode_idx_labels(&idx::parse_idx_labels(&labels).unwrap()), labels);
}

#[test]
fn corrupt_magic() {
    let (mut images, mut labels) = fixture();
    images[2] = 0x09;
    labels[0] = 0xff;
    assert!(matches!(idx::parse_idx_images(&images), Err(Error::Format(_))));
    assert!(matches!(idx::parse_idx_labels(&labels), Err(Error::Format(_))));
}

#[test]
fn truncated_files() {
    let (images, labels) = fixture();
    for cut in [3, 15, 16, images.len() - 1] {
        assert!(
            matches!(idx::parse_idx_images(&images[..cut]), Err(Error::Length { .. })),
            "cut at {cut}"
        );
    }
    assert!(matches!(
        idx::parse_idx_labels(&labels[..labels.len() - 2]),
        Err(Error::Length { needed: 4, available: 2 })
    ));
}

#[test]
fn plain_and_gzipped_files_load_the_same() {
    let (images, labels) = fixture();
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("images.idx");
    let zipped = dir.path().join("images.idx.gz");
    std::fs::write(&plain, &images).unwrap();
    let mut enc = GzEncoder::new(Vec::new(), Compression::default());
    enc.write_all(&images).unwrap();
    std::fs::write(&zipped, enc.finish().unwrap()).unwrap();
    assert_eq!(idx::load_idx_images(&plain).unwrap(), idx::load_idx_images(&zipped).unwrap());

    let label_path = dir.path().join("labels.idx");
    std::fs::write(&label_path, &labels).unwrap();
    let examples = load_labeled(&zipped, &label_path).unwrap();
    assert_eq!(examples.len(), 4);
    assert_eq!(examples[2].label(), 4);
    assert_eq!(examples[1].pixel(0, 1), 61.0 / 255.0);
}

#[test]
fn mismatched_counts_are_a_pairing_error() {
    let (images, _) = fixture();
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("i");
    let lab = dir.path().join("l");
    std::fs::write(&img, &images).unwrap();
    std::fs::write(&lab, idx::encode_idx_labels(&[1, 2, 3])).unwrap();
    assert!(matches!(
        load_labeled(&img, &lab),
        Err(Error::Pairing { images: 4, labels: 3 })
    ));
}

#[test]
fn missing_file_is_io() {
    assert!(matches!(idx::load_idx_images("/nonexistent/x.idx"), Err(Error::Io(_))));
}
