//! Digit images: IDX ingestion, rotation augmentation, k-fold plans and a
//! native cache of augmented examples.

pub mod cache;
pub mod folds;
pub mod idx;
pub mod rotate;

use std::path::Path;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::seed::{self, Purpose};
use crate::tensor::Tensor;

pub use folds::{kfold_split, FoldPlan};
pub use rotate::{random_rotation, rotate_image};

pub const SIDE: usize = 28;
pub const PIXELS: usize = SIDE * SIDE;
pub const CLASSES: usize = 10;

/// A 28×28 grayscale image with pixels in `[0, 1]` and a digit label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pixels: Vec<f64>,
    label: u8,
}

impl LabeledImage {
    pub fn new(pixels: Vec<f64>, label: u8) -> Result<Self> {
        if pixels.len() != PIXELS {
            return Err(Error::shape(&[PIXELS], &[pixels.len()]));
        }
        if let Some(&p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain {
                value: p,
                domain: "[0, 1]",
            });
        }
        if usize::from(label) >= CLASSES {
            return Err(Error::InvalidArgument(format!("label {label} is not a digit")));
        }
        Ok(Self { pixels, label })
    }

    /// Raw IDX bytes scaled by `1/255`.
    pub fn from_raw(raw: &idx::RawImage, label: u8) -> Result<Self> {
        Self::new(raw.iter().map(|&b| f64::from(b) / 255.0).collect(), label)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * SIDE + col]
    }

    pub fn label(&self) -> u8 {
        self.label
    }
}

/// Unit basis vector for `label`.
pub fn one_hot(label: u8) -> Result<[f64; CLASSES]> {
    let idx = usize::from(label);
    if idx >= CLASSES {
        return Err(Error::InvalidArgument(format!("label {label} is not a digit")));
    }
    let mut v = [0.0; CLASSES];
    v[idx] = 1.0;
    Ok(v)
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Reads an image file and a label file (optionally gzipped) and pairs them.
pub fn load_labeled(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Vec<LabeledImage>> {
    let raw = idx::load_idx_images(images)?;
    let lab = idx::load_idx_labels(labels)?;
    if raw.len() != lab.len() {
        return Err(Error::Pairing {
            images: raw.len(),
            labels: lab.len(),
        });
    }
    raw.iter()
        .zip(lab)
        .map(|(r, l)| LabeledImage::from_raw(r, l))
        .collect()
}

/// Seeded selection of `count` examples, kept in their original order.
pub fn select_subset(examples: &[LabeledImage], count: usize, seed: u64) -> Result<Vec<LabeledImage>> {
    if count > examples.len() {
        return Err(Error::InvalidArgument(format!(
            "asked for {count} examples, only {} available",
            examples.len()
        )));
    }
    let mut picked = index::sample(&mut seed::stream(seed, Purpose::Subset, 0), examples.len(), count)
        .into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| examples[i].clone()).collect())
}

/// Rotates every example by its own uniform angle in `[−max, max]` degrees.
/// Example `i` always draws from stream `i`, so the result does not depend
/// on processing order.
pub fn augment_rotations(
    examples: &[LabeledImage],
    max_angle_deg: f64,
    seed: u64,
) -> Result<Vec<LabeledImage>> {
    let rotate_one = |(i, img): (usize, &LabeledImage)| {
        let mut rng = seed::stream(seed, Purpose::Rotation, i as u64);
        random_rotation(img, max_angle_deg, &mut rng)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        examples.par_iter().enumerate().map(rotate_one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        examples.iter().enumerate().map(rotate_one).collect()
    }
}

/// `N × 1 × 28 × 28` input tensor and `N × 10` one-hot targets.
pub fn to_batch<'a>(examples: impl IntoIterator<Item = &'a LabeledImage>) -> (Tensor, Tensor) {
    let mut pixels = Vec::new();
    let mut targets = Vec::new();
    let mut n = 0;
    for ex in examples {
        pixels.extend_from_slice(&ex.pixels);
        targets.extend(one_hot(ex.label).expect("label validated on construction"));
        n += 1;
    }
    assert!(n > 0, "empty batch");
    (
        Tensor::from_vec([n, 1, SIDE, SIDE], pixels).expect("pixel count"),
        Tensor::from_vec([n, CLASSES], targets).expect("target count"),
    )
}
