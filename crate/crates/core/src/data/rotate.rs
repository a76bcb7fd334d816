use rand::Rng;

use super::{LabeledImage, SIDE};
use crate::error::{Error, Result};

pub const MAX_ANGLE_DEG: f64 = 45.0;

/// Pixel-centre coordinate of the image centre.
const CENTER: f64 = (SIDE as f64 - 1.0) / 2.0;

fn check_angle(angle_deg: f64) -> Result<()> {
    if (-MAX_ANGLE_DEG..=MAX_ANGLE_DEG).contains(&angle_deg) {
        Ok(())
    } else {
        Err(Error::Domain {
            value: angle_deg,
            domain: "[-45, 45] degrees",
        })
    }
}

/// Rotates about the image centre with bilinear sampling. Samples falling
/// outside the source read as background (0). Positive angles turn the
/// digit counter-clockwise as displayed (rows growing downwards).
pub fn rotate_image(img: &LabeledImage, angle_deg: f64) -> Result<LabeledImage> {
    check_angle(angle_deg)?;
    let (sin, cos) = angle_deg.to_radians().sin_cos();
    let src = |r: isize, c: isize| -> f64 {
        if (0..SIDE as isize).contains(&r) && (0..SIDE as isize).contains(&c) {
            img.pixel(r as usize, c as usize)
        } else {
            0.0
        }
    };
    let mut out = vec![0.0; SIDE * SIDE];
    for row in 0..SIDE {
        for col in 0..SIDE {
            let dx = col as f64 - CENTER;
            let dy = row as f64 - CENTER;
            // Inverse map: where in the source does this output pixel come from.
            let sx = CENTER + cos * dx - sin * dy;
            let sy = CENTER + sin * dx + cos * dy;
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let (x0, y0) = (x0 as isize, y0 as isize);
            let v = (1.0 - fy) * ((1.0 - fx) * src(y0, x0) + fx * src(y0, x0 + 1))
                + fy * ((1.0 - fx) * src(y0 + 1, x0) + fx * src(y0 + 1, x0 + 1));
            out[row * SIDE + col] = v.clamp(0.0, 1.0);
        }
    }
    LabeledImage::new(out, img.label())
}

/// Rotation by an angle drawn uniformly from `[−max, max]` degrees.
pub fn random_rotation(
    img: &LabeledImage,
    max_angle_deg: f64,
    rng: &mut impl Rng,
) -> Result<LabeledImage> {
    check_angle(max_angle_deg)?;
    if max_angle_deg < 0.0 {
        return Err(Error::Domain {
            value: max_angle_deg,
            domain: "[0, 45] degrees",
        });
    }
    let angle = if max_angle_deg == 0.0 {
        0.0
    } else {
        rng.gen_range(-max_angle_deg..=max_angle_deg)
    };
    rotate_image(img, angle)
}
