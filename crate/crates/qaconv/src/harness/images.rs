//! Bundled test images and the toy classification dataset.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convolution::ImageGrid;
use crate::error::{Error, Result};
use crate::grid::Grid;

pub fn builtin_image_names() -> [&'static str; 3] {
    ["gradient", "checkerboard", "disk"]
}

/// Deterministic 8x8 images with pixel values in 0..=255.
pub fn builtin_image(name: &str) -> Result<ImageGrid> {
    let pixel: Box<dyn Fn(usize, usize) -> f64> = match name {
        "gradient" => Box::new(|r, c| ((r + c) as f64 * 255.0 / 14.0).round()),
        "checkerboard" => Box::new(|r, c| if (r + c) % 2 == 0 { 255.0 } else { 0.0 }),
        "disk" => Box::new(|r, c| {
            let (dr, dc) = (r as f64 - 3.5, c as f64 - 3.5);
            if dr * dr + dc * dc <= 3.2f64.powi(2) {
                255.0
            } else {
                0.0
            }
        }),
        _ => {
            return Err(Error::Input(format!(
                "unknown builtin image `{name}`; available: {}",
                builtin_image_names().join(", ")
            )))
        }
    };
    let mut data = Vec::with_capacity(64);
    for r in 0..8 {
        for c in 0..8 {
            data.push(pixel(r, c));
        }
    }
    Ok(ImageGrid::new(Grid::new(8, 8, data)?))
}

/// Number of images in the toy dataset.
pub const TOY_DATASET_SIZE: usize = 16;

/// Fixed two-class dataset: 6x6 images that are bright on the left
/// (label 0) or bright on the right (label 1), with deterministic pixel
/// jitter. The same images come back on every call.
pub fn toy_dataset() -> (Vec<ImageGrid>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD5);
    let mut images = Vec::with_capacity(TOY_DATASET_SIZE);
    let mut labels = Vec::with_capacity(TOY_DATASET_SIZE);
    for sample in 0..TOY_DATASET_SIZE {
        let label = (sample % 2) as u8;
        let mut data = Vec::with_capacity(36);
        for _r in 0..6 {
            for c in 0..6 {
                let bright_half = if label == 0 { c < 3 } else { c >= 3 };
                let base = if bright_half { 200.0 } else { 30.0 };
                let jitter = (rng.random::<f64>() - 0.5) * 60.0;
                data.push((base + jitter).clamp(0.0, 255.0));
            }
        }
        images.push(ImageGrid::new(Grid::new(6, 6, data).unwrap()));
        labels.push(label);
    }
    (images, labels)
}
