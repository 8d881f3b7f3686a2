//! Blur-family corruptions: defocus, motion, zoom, glass.

use crate::error::{Error, Result};
use crate::image::{clamp01, Image};
use crate::kernel::Kernel;
use crate::rng::SeededRng;
use crate::scalar::Scalar;

/// Convolution with a normalized flat disk; edge replication at borders.
/// Radius 0 is the exact identity.
pub fn defocus_blur<T: Scalar>(image: &Image<T>, radius: f64) -> Result<Image<T>> {
    let kernel = Kernel::disk(radius)?;
    Ok(clamp01(kernel.convolve(image)?))
}

/// Convolution with a normalized line kernel of the given pixel length and
/// angle (radians, measured from the x axis). Length 1 is the identity.
pub fn motion_blur<T: Scalar>(image: &Image<T>, length: usize, angle: f64) -> Result<Image<T>> {
    if length < 1 {
        return Err(Error::validation("motion length must be >= 1"));
    }
    let kernel = Kernel::line(length, angle)?;
    Ok(clamp01(kernel.convolve(image)?))
}

/// Pixel-wise mean of the image rescaled about its center by factors
/// linearly spaced in `[1, z_max]` (bilinear sampling, edge clamp).
/// `z_max == 1` is the exact identity.
pub fn zoom_blur<T: Scalar>(image: &Image<T>, z_max: f64, steps: usize) -> Result<Image<T>> {
    if z_max < 1.0 {
        return Err(Error::validation(format!("zoom factor must be >= 1, got {z_max}")));
    }
    if steps < 1 {
        return Err(Error::validation("zoom steps must be >= 1"));
    }
    if z_max == 1.0 {
        return Ok(image.clone());
    }
    let factors: Vec<f64> = if steps == 1 {
        vec![z_max]
    } else {
        (0..steps)
            .map(|i| 1.0 + (z_max - 1.0) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    let h = image.height();
    let w = image.width();
    let c = image.channels();
    let cy = (h - 1) as f64 / 2.0;
    let cx = (w - 1) as f64 / 2.0;
    let mut acc = vec![0.0f64; h * w * c];
    for &z in &factors {
        for y in 0..h {
            let sy = cy + (y as f64 - cy) / z;
            for x in 0..w {
                let sx = cx + (x as f64 - cx) / z;
                for ch in 0..c {
                    acc[(y * w + x) * c + ch] += image.sample_bilinear(sy, sx, ch).as_f64();
                }
            }
        }
    }
    let n = factors.len() as f64;
    let data = acc.into_iter().map(|v| T::from_f64_lossy(v / n)).collect();
    Ok(clamp01(Image::new(h, w, c, data)?))
}

/// Swaps each pixel with a random neighbor at an offset uniform in
/// `[-d, d]^2`, `iterations` times, in row-major scan order. Whole pixels
/// (all channels) are swapped and out-of-bounds targets are skipped, so the
/// per-channel value multiset is preserved exactly. `d == 0` is the
/// identity.
pub fn glass_blur<T: Scalar>(
    image: &Image<T>,
    d: usize,
    iterations: usize,
    rng: &mut SeededRng,
) -> Result<Image<T>> {
    let h = image.height();
    let w = image.width();
    let c = image.channels();
    if d >= h.min(w) {
        return Err(Error::validation(format!(
            "glass offset {d} must be smaller than the min side {}",
            h.min(w)
        )));
    }
    let mut out = image.clone();
    let span = 2 * d as u32;
    for _ in 0..iterations {
        for y in 0..h {
            for x in 0..w {
                // one draw for dy then one for dx, even when d == 0, so the
                // stream layout does not depend on the offset value
                let dy = rng.uniform_int(0, span) as i64 - d as i64;
                let dx = rng.uniform_int(0, span) as i64 - d as i64;
                let ty = y as i64 + dy;
                let tx = x as i64 + dx;
                if ty < 0 || ty >= h as i64 || tx < 0 || tx >= w as i64 {
                    continue;
                }
                let (ty, tx) = (ty as usize, tx as usize);
                for ch in 0..c {
                    let a = out.idx(y, x, ch);
                    let b = out.idx(ty, tx, ch);
                    out.data_mut().swap(a, b);
                }
            }
        }
    }
    Ok(out)
}
