use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StimulusRng;
use crate::stimuli::Canvas;

/// Upper bound (exclusive) of the per-pixel noise magnitude.
pub const NOISE_AMPLITUDE: f32 = 0.05;

/// Input resolution expected by transformer consumers.
pub const VIT_INPUT_SIZE: usize = 224;

/// Row-major float image with values in `[-0.5, 0.5]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloatImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f32>,
}

impl FloatImage {
    pub fn filled(width: usize, height: usize, v: f32) -> Self {
        FloatImage {
            width,
            height,
            values: vec![v; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }
}

/// Maps a binary canvas into `[-0.5, 0.5]` and pushes every pixel inward by
/// `u ~ U[0, 0.05)`: background lands in `[-0.5, -0.45)`, marks in
/// `(0.45, 0.5]`.
///
/// `u` is quantized to multiples of 2⁻²⁵ so that `±0.5 ∓ u` is exact in
/// `f32` and the band edges hold without rounding surprises.
pub fn normalize_and_noise(canvas: &Canvas, rng: &mut StimulusRng) -> FloatImage {
    normalize_with_amplitude(canvas, rng, NOISE_AMPLITUDE)
}

/// [`normalize_and_noise`] with an explicit amplitude (0 disables noise but
/// still consumes one draw per pixel).
pub fn normalize_with_amplitude(canvas: &Canvas, rng: &mut StimulusRng, amplitude: f32) -> FloatImage {
    const STEP: f32 = 1.0 / (1u32 << 25) as f32;
    let levels = (amplitude.max(0.0) as f64 * (1u64 << 25) as f64).floor() as u64;
    let values = canvas
        .cells()
        .iter()
        .map(|&bit| {
            let u = ((rng.gen::<u32>() as u64 * levels) >> 32) as f32 * STEP;
            if bit == 0 {
                -0.5 + u
            } else {
                0.5 - u
            }
        })
        .collect();
    FloatImage {
        width: canvas.width(),
        height: canvas.height(),
        values,
    }
}

/// Nearest-neighbour upsampling to `target`×`target`. Output values are a
/// subset of the input values.
pub fn resize_image(image: &FloatImage, target: usize) -> Result<FloatImage> {
    if image.width != image.height {
        return Err(Error::Shape(format!(
            "resize expects a square image, got {}x{}",
            image.width, image.height
        )));
    }
    if target < image.width || target > 4096 {
        return Err(Error::Shape(format!(
            "unsupported resize target {target} for a {}px source (upsampling to at most 4096 only)",
            image.width
        )));
    }
    let src = image.width;
    let map: Vec<usize> = (0..target).map(|i| i * src / target).collect();
    let mut values = Vec::with_capacity(target * target);
    for &sy in &map {
        let row = &image.values[sy * src..(sy + 1) * src];
        values.extend(map.iter().map(|&sx| row[sx]));
    }
    Ok(FloatImage {
        width: target,
        height: target,
        values,
    })
}
