//! Normalized 2D convolution kernels and edge-replicated convolution.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;

/// Square convolution kernel with odd side and weights summing to 1.
#[derive(Debug, Clone)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size % 2 == 0 || size == 0 {
            return Err(Error::validation(format!("kernel size {size} must be odd")));
        }
        if weights.len() != size * size {
            return Err(Error::validation("kernel weights length mismatch"));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::validation("kernel weights must be nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!("kernel weights sum {sum} != 1")));
        }
        Ok(Kernel { size, weights })
    }

    /// Normalizes raw nonnegative weights to sum 1.
    pub fn normalized(size: usize, raw: Vec<f64>) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::validation("kernel has zero total weight"));
        }
        Kernel::new(size, raw.into_iter().map(|w| w / sum).collect())
    }

    /// Flat disk of the given radius; radius 0 is the 1x1 identity kernel.
    pub fn disk(radius: f64) -> Result<Self> {
        if radius < 0.0 {
            return Err(Error::validation("disk radius must be >= 0"));
        }
        let r = radius.ceil() as i64;
        let size = (2 * r + 1) as usize;
        let mut raw = vec![0.0; size * size];
        let r2 = radius * radius;
        for dy in -r..=r {
            for dx in -r..=r {
                if (dy * dy + dx * dx) as f64 <= r2 + 1e-9 {
                    raw[((dy + r) * size as i64 + (dx + r)) as usize] = 1.0;
                }
            }
        }
        Kernel::normalized(size, raw)
    }

    /// Line of the given length (in pixels) at `angle` radians, rasterized
    /// by bilinear splatting of evenly spaced points along the segment.
    /// Length 1 is the identity kernel.
    pub fn line(length: usize, angle: f64) -> Result<Self> {
        if length == 0 {
            return Err(Error::validation("line length must be >= 1"));
        }
        if length == 1 {
            return Kernel::new(1, vec![1.0]);
        }
        let half = (length - 1) as f64 / 2.0;
        let r = half.ceil() as i64;
        let size = (2 * r + 1) as usize;
        let mut raw = vec![0.0; size * size];
        let (sin, cos) = angle.sin_cos();
        // 4 samples per pixel of length keeps the rasterized line connected
        let samples = length * 4;
        for i in 0..samples {
            let t = -half + (i as f64 / (samples - 1) as f64) * (2.0 * half);
            let x = t * cos + r as f64;
            let y = t * sin + r as f64;
            let x0 = x.floor() as i64;
            let y0 = y.floor() as i64;
            let fx = x - x0 as f64;
            let fy = y - y0 as f64;
            for (dy, dx, w) in [
                (0, 0, (1.0 - fy) * (1.0 - fx)),
                (0, 1, (1.0 - fy) * fx),
                (1, 0, fy * (1.0 - fx)),
                (1, 1, fy * fx),
            ] {
                let yy = y0 + dy;
                let xx = x0 + dx;
                if yy >= 0 && (yy as usize) < size && xx >= 0 && (xx as usize) < size && w > 0.0 {
                    raw[yy as usize * size + xx as usize] += w;
                }
            }
        }
        Kernel::normalized(size, raw)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Convolves with edge replication: out-of-bounds taps read the nearest
    /// border pixel.
    pub fn convolve<T: Scalar>(&self, image: &Image<T>) -> Result<Image<T>> {
        let h = image.height();
        let w = image.width();
        let c = image.channels();
        if self.size > h.min(w) {
            return Err(Error::validation(format!(
                "kernel size {} exceeds image min side {}",
                self.size,
                h.min(w)
            )));
        }
        if self.size == 1 {
            return Ok(image.clone());
        }
        let r = (self.size / 2) as i64;
        let kw: Vec<T> = self.weights.iter().map(|&v| T::from_f64_lossy(v)).collect();
        let mut out = vec![T::zero(); h * w * c];
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                for ch in 0..c {
                    let mut acc = T::zero();
                    let mut ki = 0usize;
                    for dy in -r..=r {
                        let sy = (y + dy).clamp(0, h as i64 - 1) as usize;
                        for dx in -r..=r {
                            let weight = kw[ki];
                            ki += 1;
                            if weight == T::zero() {
                                continue;
                            }
                            let sx = (x + dx).clamp(0, w as i64 - 1) as usize;
                            acc += weight * image.get(sy, sx, ch);
                        }
                    }
                    out[(y as usize * w + x as usize) * c + ch] = acc;
                }
            }
        }
        Image::new(h, w, c, out)
    }
}
