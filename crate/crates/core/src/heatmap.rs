//! Overlap-matrix heatmap rendering to PPM.
//!
//! The color ramp has 256 steps linearly interpolated between
//! `RAMP_LOW` (score 0.0, dark blue) and `RAMP_HIGH` (score 1.0, warm
//! yellow); scores outside [0, 1] clamp to the ramp ends, and invalid
//! cells render mid-gray. Each matrix cell becomes a solid
//! `cell_px x cell_px` square, no decorations.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scores::OverlapMatrix;

/// Ramp endpoint for score 0.0.
pub const RAMP_LOW: [u8; 3] = [16, 16, 64];
/// Ramp endpoint for score 1.0.
pub const RAMP_HIGH: [u8; 3] = [240, 240, 32];
/// Fill for cells without a valid score.
pub const INVALID_GRAY: [u8; 3] = [128, 128, 128];

/// The 256-step ramp: index = round(clamp(score, 0, 1) * 255).
pub fn ramp_color(score: f64) -> [u8; 3] {
    let index = (score.clamp(0.0, 1.0) * 255.0).round() as u32;
    let mut out = [0u8; 3];
    for ch in 0..3 {
        let lo = RAMP_LOW[ch] as u32;
        let hi = RAMP_HIGH[ch] as u32;
        out[ch] = ((lo * (255 - index) + hi * index + 127) / 255) as u8;
    }
    out
}

/// Renders the matrix to an RGB image of `n*cell_px` pixels square.
pub fn render_heatmap(matrix: &OverlapMatrix, cell_px: usize) -> Result<Image<f64>> {
    if cell_px == 0 {
        return Err(Error::validation("cell size must be >= 1"));
    }
    let n = matrix.n();
    if n == 0 {
        return Err(Error::validation("matrix is empty"));
    }
    let side = n * cell_px;
    let mut img = Image::<f64>::zeros(side, side, 3);
    for i in 0..n {
        for j in 0..n {
            let rgb = match matrix.cell(i, j).score {
                Some(s) => ramp_color(s),
                None => INVALID_GRAY,
            };
            let rgbf = [
                rgb[0] as f64 / 255.0,
                rgb[1] as f64 / 255.0,
                rgb[2] as f64 / 255.0,
            ];
            for y in i * cell_px..(i + 1) * cell_px {
                for x in j * cell_px..(j + 1) * cell_px {
                    for ch in 0..3 {
                        img.set(y, x, ch, rgbf[ch]);
                    }
                }
            }
        }
    }
    Ok(img)
}
