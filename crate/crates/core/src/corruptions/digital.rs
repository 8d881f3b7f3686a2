//! Digital-artifact corruptions: pixelate, DCT-quantization compression
//! artifacts, elastic warp.

use crate::error::{Error, Result};
use crate::image::{clamp01, Image};
use crate::rng::SeededRng;
use crate::scalar::Scalar;
use std::sync::OnceLock;

/// Box-downsamples by `factor` (partial edge blocks average over their
/// actual extent) and upsamples back by block replication. `factor == 1`
/// is the exact identity.
pub fn pixelate<T: Scalar>(image: &Image<T>, factor: usize) -> Result<Image<T>> {
    if factor < 1 {
        return Err(Error::validation("pixelate factor must be >= 1"));
    }
    if factor > image.min_side() {
        return Err(Error::validation(format!(
            "pixelate factor {factor} exceeds image min side {}",
            image.min_side()
        )));
    }
    let h = image.height();
    let w = image.width();
    let c = image.channels();
    let mut out = image.clone();
    for by in (0..h).step_by(factor) {
        let y1 = (by + factor).min(h);
        for bx in (0..w).step_by(factor) {
            let x1 = (bx + factor).min(w);
            let count = T::from_f64_lossy(((y1 - by) * (x1 - bx)) as f64);
            for ch in 0..c {
                let mut sum = T::zero();
                for y in by..y1 {
                    for x in bx..x1 {
                        sum += image.get(y, x, ch);
                    }
                }
                let mean = sum / count;
                for y in by..y1 {
                    for x in bx..x1 {
                        out.set(y, x, ch, mean);
                    }
                }
            }
        }
    }
    Ok(clamp01(out))
}

/// JPEG Annex K luminance quantization table.
const LUMA_QUANT: [f64; 64] = [
    16.0, 11.0, 10.0, 16.0, 24.0, 40.0, 51.0, 61.0, //
    12.0, 12.0, 14.0, 19.0, 26.0, 58.0, 60.0, 55.0, //
    14.0, 13.0, 16.0, 24.0, 40.0, 57.0, 69.0, 56.0, //
    14.0, 17.0, 22.0, 29.0, 51.0, 87.0, 80.0, 62.0, //
    18.0, 22.0, 37.0, 56.0, 68.0, 109.0, 103.0, 77.0, //
    24.0, 35.0, 55.0, 64.0, 81.0, 104.0, 113.0, 92.0, //
    49.0, 64.0, 78.0, 87.0, 103.0, 121.0, 120.0, 101.0, //
    72.0, 92.0, 95.0, 98.0, 112.0, 100.0, 103.0, 99.0,
];

/// 8x8 orthonormal DCT-II basis, D[k][n] = c(k) cos((2n+1)k pi / 16).
fn dct_matrix() -> &'static [f64; 64] {
    static M: OnceLock<[f64; 64]> = OnceLock::new();
    M.get_or_init(|| {
        let mut m = [0.0f64; 64];
        for k in 0..8 {
            let ck = if k == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
            for n in 0..8 {
                m[k * 8 + n] =
                    ck * ((2.0 * n as f64 + 1.0) * k as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        m
    })
}

/// Scales the base quantization table by the libjpeg quality convention:
/// q < 50 uses 5000/q, otherwise 200 - 2q; entries clamp to [1, 255].
fn scaled_quant(quality: f64) -> [f64; 64] {
    let s = if quality < 50.0 { 5000.0 / quality } else { 200.0 - 2.0 * quality };
    let mut q = [0.0f64; 64];
    for i in 0..64 {
        q[i] = ((LUMA_QUANT[i] * s + 50.0) / 100.0).floor().clamp(1.0, 255.0);
    }
    q
}

/// Compression-artifact model: per-channel 8x8 block DCT, quantization by
/// the standard luminance table scaled by `quality` in [1, 100], inverse
/// DCT. No entropy coding; this reproduces blocking and ringing, not a
/// codec. Images whose sides are not multiples of 8 are padded by edge
/// replication and cropped back.
pub fn jpeg_proxy<T: Scalar>(image: &Image<T>, quality: f64) -> Result<Image<T>> {
    if !(1.0..=100.0).contains(&quality) {
        return Err(Error::validation(format!("jpeg quality must be in [1, 100], got {quality}")));
    }
    let h = image.height();
    let w = image.width();
    let c = image.channels();
    let ph = h.div_ceil(8) * 8;
    let pw = w.div_ceil(8) * 8;
    let quant = scaled_quant(quality);
    let dct = dct_matrix();
    let mut out = image.clone();
    let mut block = [0.0f64; 64];
    let mut tmp = [0.0f64; 64];
    let mut coef = [0.0f64; 64];
    for ch in 0..c {
        for by in (0..ph).step_by(8) {
            for bx in (0..pw).step_by(8) {
                // load with edge replication and shift to [-128, 127]
                for y in 0..8 {
                    let sy = (by + y).min(h - 1);
                    for x in 0..8 {
                        let sx = (bx + x).min(w - 1);
                        block[y * 8 + x] = image.get(sy, sx, ch).as_f64() * 255.0 - 128.0;
                    }
                }
                // coef = D * block * D^T
                for k in 0..8 {
                    for x in 0..8 {
                        let mut acc = 0.0;
                        for n in 0..8 {
                            acc += dct[k * 8 + n] * block[n * 8 + x];
                        }
                        tmp[k * 8 + x] = acc;
                    }
                }
                for k in 0..8 {
                    for l in 0..8 {
                        let mut acc = 0.0;
                        for n in 0..8 {
                            acc += tmp[k * 8 + n] * dct[l * 8 + n];
                        }
                        coef[k * 8 + l] = acc;
                    }
                }
                for i in 0..64 {
                    coef[i] = (coef[i] / quant[i]).round() * quant[i];
                }
                // block = D^T * coef * D
                for n in 0..8 {
                    for l in 0..8 {
                        let mut acc = 0.0;
                        for k in 0..8 {
                            acc += dct[k * 8 + n] * coef[k * 8 + l];
                        }
                        tmp[n * 8 + l] = acc;
                    }
                }
                for n in 0..8 {
                    for m in 0..8 {
                        let mut acc = 0.0;
                        for l in 0..8 {
                            acc += tmp[n * 8 + l] * dct[l * 8 + m];
                        }
                        block[n * 8 + m] = acc;
                    }
                }
                for y in 0..8 {
                    if by + y >= h {
                        break;
                    }
                    for x in 0..8 {
                        if bx + x >= w {
                            break;
                        }
                        let v = (block[y * 8 + x] + 128.0) / 255.0;
                        out.set(by + y, bx + x, ch, T::from_f64_lossy(v));
                    }
                }
            }
        }
    }
    Ok(clamp01(out))
}

/// Bilinear warp by a Gaussian-smoothed random displacement field. The raw
/// field is one uniform(-1, 1) draw per pixel for dx (row-major) then one
/// per pixel for dy; after smoothing with a separable Gaussian of sigma
/// `smoothness`, the field is rescaled so its largest component magnitude
/// equals `amplitude` pixels. `amplitude == 0` is the exact identity.
pub fn elastic<T: Scalar>(
    image: &Image<T>,
    amplitude: f64,
    smoothness: f64,
    rng: &mut SeededRng,
) -> Result<Image<T>> {
    if amplitude < 0.0 {
        return Err(Error::validation(format!("elastic amplitude must be >= 0, got {amplitude}")));
    }
    if smoothness < 0.0 {
        return Err(Error::validation("elastic smoothness must be >= 0"));
    }
    if amplitude == 0.0 {
        return Ok(image.clone());
    }
    let h = image.height();
    let w = image.width();
    let c = image.channels();
    let mut dx: Vec<f64> = (0..h * w).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let mut dy: Vec<f64> = (0..h * w).map(|_| rng.uniform(-1.0, 1.0)).collect();
    smooth_gaussian(&mut dx, h, w, smoothness);
    smooth_gaussian(&mut dy, h, w, smoothness);
    let peak = dx
        .iter()
        .chain(dy.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            let sy = y as f64 + dy[y * w + x] * scale;
            let sx = x as f64 + dx[y * w + x] * scale;
            for ch in 0..c {
                out.set(y, x, ch, image.sample_bilinear(sy, sx, ch));
            }
        }
    }
    Ok(clamp01(out))
}

/// Separable Gaussian smoothing with edge replication; kernel radius 3*sigma.
fn smooth_gaussian(field: &mut [f64], h: usize, w: usize, sigma: f64) {
    if sigma <= 0.0 {
        return;
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity(2 * radius as usize + 1);
    for i in -radius..=radius {
        kernel.push((-0.5 * (i as f64 / sigma).powi(2)).exp());
    }
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }
    let mut tmp = vec![0.0f64; h * w];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut acc = 0.0;
            for (ki, k) in kernel.iter().enumerate() {
                let sx = (x + ki as i64 - radius).clamp(0, w as i64 - 1);
                acc += k * field[y as usize * w + sx as usize];
            }
            tmp[y as usize * w + x as usize] = acc;
        }
    }
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut acc = 0.0;
            for (ki, k) in kernel.iter().enumerate() {
                let sy = (y + ki as i64 - radius).clamp(0, h as i64 - 1);
                acc += k * tmp[sy as usize * w + x as usize];
            }
            field[y as usize * w + x as usize] = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_image() -> Image<f64> {
        let mut rng = SeededRng::new(12);
        let data: Vec<f64> = (0..32 * 32 * 3).map(|_| rng.uniform(0.0, 1.0)).collect();
        Image::new(32, 32, 3, data).unwrap()
    }

    #[test]
    fn pixelate_factor_one_is_identity() {
        let img = test_image();
        assert_eq!(pixelate(&img, 1).unwrap(), img);
    }

    #[test]
    fn pixelate_constant_within_blocks() {
        let img = test_image();
        let out = pixelate(&img, 4).unwrap();
        for ch in 0..3 {
            let corner = out.get(0, 0, ch);
            for y in 0..4 {
                for x in 0..4 {
                    assert_eq!(out.get(y, x, ch), corner);
                }
            }
        }
    }

    // Oracle: at quality 100 the scaled quantization table is all ones, so
    // the round trip error is bounded by half a quantization step pushed
    // through the inverse DCT — comfortably below 0.02 per pixel.
    #[test]
    fn jpeg_quality_100_nearly_lossless() {
        let img = test_image();
        let out = jpeg_proxy(&img, 100.0).unwrap();
        let max_diff = img
            .data()
            .iter()
            .zip(out.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_diff <= 0.02, "max diff {max_diff}");
    }

    #[test]
    fn jpeg_low_quality_changes_image_but_stays_in_range() {
        let img = test_image();
        let out = jpeg_proxy(&img, 7.0).unwrap();
        assert_ne!(out, img);
        assert!(out.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn jpeg_handles_non_multiple_of_eight_sides() {
        let mut rng = SeededRng::new(3);
        let data: Vec<f64> = (0..13 * 11 * 3).map(|_| rng.uniform(0.0, 1.0)).collect();
        let img = Image::new(13, 11, 3, data).unwrap();
        let out = jpeg_proxy(&img, 50.0).unwrap();
        assert_eq!((out.height(), out.width()), (13, 11));
    }

    #[test]
    fn elastic_zero_amplitude_is_identity() {
        let img = test_image();
        let out = elastic(&img, 0.0, 4.0, &mut SeededRng::new(1)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn elastic_is_deterministic() {
        let img = test_image();
        let a = elastic(&img, 2.0, 4.0, &mut SeededRng::new(9)).unwrap();
        let b = elastic(&img, 2.0, 4.0, &mut SeededRng::new(9)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, img);
    }

    #[test]
    fn quality_scaling_is_all_ones_at_100() {
        assert!(scaled_quant(100.0).iter().all(|&q| q == 1.0));
        assert!(scaled_quant(7.0).iter().all(|&q| q >= 1.0));
    }
}
