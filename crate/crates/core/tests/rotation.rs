use std::path::PathBuf;

use glnn::data::{load_labeled, rotate_image, LabeledImage, PIXELS, SIDE};

const ANGLES: [f64; 6] = [-45.0, -30.0, -10.0, 5.0, 22.5, 45.0];

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn round_trip(img: &LabeledImage, angle: f64) -> LabeledImage {
    rotate_image(&rotate_image(img, angle).unwrap(), -angle).unwrap()
}

fn abs_errors<'a>(a: &'a LabeledImage, b: &'a LabeledImage) -> impl Iterator<Item = f64> + 'a {
    a.pixels().iter().zip(b.pixels()).map(|(x, y)| (x - y).abs())
}

#[test]
fn smooth_image_round_trip_is_tight() {
    let c = (SIDE as f64 - 1.0) / 2.0;
    let blob: Vec<f64> = (0..PIXELS)
        .map(|i| {
            let (r, col) = ((i / SIDE) as f64 - c, (i % SIDE) as f64 - c);
            (-(r * r + col * col) / 18.0).exp()
        })
        .collect();
    let blob = LabeledImage::new(blob, 0).unwrap();
    for angle in ANGLES {
        let worst = abs_errors(&blob, &round_trip(&blob, angle)).fold(0.0, f64::max);
        assert!(worst < 0.15, "{angle}°: {worst}");
    }
}

// Single-pixel strokes blur under two bilinear resamplings, so real digits
// are held to mean error and conserved ink rather than a per-pixel bound.
#[test]
fn real_digit_round_trip_keeps_shape_and_ink() {
    let digits = load_labeled(
        data_dir().join("digits-images-idx3-ubyte.gz"),
        data_dir().join("digits-labels-idx1-ubyte.gz"),
    )
    .unwrap();
    for img in digits.iter().take(300) {
        let ink: f64 = img.pixels().iter().sum();
        for angle in ANGLES {
            let back = round_trip(img, angle);
            let mae = abs_errors(img, &back).sum::<f64>() / PIXELS as f64;
            assert!(mae < 0.06, "{angle}°: mean error {mae}");
            let kept: f64 = back.pixels().iter().sum();
            assert!((kept / ink - 1.0).abs() < 0.06, "{angle}°: ink {ink} -> {kept}");
            assert_eq!(back.label(), img.label());
        }
    }
}
