use std::path::Path;

use anyhow::{Context, Result};
use image::GrayImage;
use percept_core::dataset::FloatImage;

/// Writes a grayscale PNG; values map from [-0.5, 0.5] to [0, 255].
pub fn write_png(img: &FloatImage, path: &Path) -> Result<()> {
    let px: Vec<u8> = img
        .values
        .iter()
        .map(|&v| ((v + 0.5).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    GrayImage::from_raw(img.width as u32, img.height as u32, px)
        .context("image buffer size")?
        .save(path)
        .with_context(|| format!("writing {}", path.display()))
}
