//! Photometric corruptions: brightness, contrast, fog.

use crate::error::{Error, Result};
use crate::image::{clamp01, Image};
use crate::rng::SeededRng;
use crate::scalar::Scalar;

/// Adds `beta` to every component, then clamps. `beta == 0` is the exact
/// identity; `beta == 1` saturates any image to all ones.
pub fn brightness<T: Scalar>(image: &Image<T>, beta: f64) -> Result<Image<T>> {
    let b = T::from_f64_lossy(beta);
    let mut out = image.clone();
    for v in out.data_mut() {
        *v = *v + b;
    }
    Ok(clamp01(out))
}

/// Rescales each channel about its mean: v -> mean + alpha * (v - mean).
/// `alpha == 1` short-circuits to the exact identity; `alpha == 0`
/// flattens each channel to its mean.
pub fn contrast<T: Scalar>(image: &Image<T>, alpha: f64) -> Result<Image<T>> {
    if alpha < 0.0 {
        return Err(Error::validation(format!("contrast alpha must be >= 0, got {alpha}")));
    }
    if alpha == 1.0 {
        return Ok(image.clone());
    }
    let a = T::from_f64_lossy(alpha);
    let c = image.channels();
    let means: Vec<T> = (0..c).map(|ch| image.channel_mean(ch)).collect();
    let mut out = image.clone();
    let h = out.height();
    let w = out.width();
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let v = out.get(y, x, ch);
                out.set(y, x, ch, means[ch] + a * (v - means[ch]));
            }
        }
    }
    Ok(clamp01(out))
}

/// Blends toward a smooth bright haze field: v -> (1-t)v + t*h, where h
/// comes from midpoint-displacement (plasma) noise normalized to [0, 1]
/// and mapped into the haze brightness range [0.6, 1.0]. The same field is
/// shared by all channels. `t == 0` is the exact identity.
pub fn fog<T: Scalar>(image: &Image<T>, t: f64, rng: &mut SeededRng) -> Result<Image<T>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::validation(format!("fog t must be in [0, 1], got {t}")));
    }
    let h = image.height();
    let w = image.width();
    let c = image.channels();
    let haze = plasma_field(h, w, rng);
    let tt = T::from_f64_lossy(t);
    let one = T::one();
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            let hz = T::from_f64_lossy(0.6 + 0.4 * haze[y * w + x]);
            for ch in 0..c {
                let v = out.get(y, x, ch);
                out.set(y, x, ch, v * (one - tt) + hz * tt);
            }
        }
    }
    Ok(clamp01(out))
}

/// Diamond-square plasma noise on the smallest (2^k + 1) grid covering the
/// image, normalized to [0, 1] and cropped. Displacement amplitude starts
/// at 0.5 and halves per level; draws happen level by level, diamond step
/// before square step, row-major within each.
pub fn plasma_field(h: usize, w: usize, rng: &mut SeededRng) -> Vec<f64> {
    let target = h.max(w).max(2) - 1;
    let mut g = 1usize;
    while g < target {
        g *= 2;
    }
    let n = g + 1;
    let mut field = vec![0.0f64; n * n];
    for (y, x) in [(0, 0), (0, g), (g, 0), (g, g)] {
        field[y * n + x] = rng.uniform(0.0, 1.0);
    }
    let mut step = g;
    let mut amp = 0.5f64;
    while step > 1 {
        let half = step / 2;
        // diamond: centers of squares
        for y in (half..n).step_by(step) {
            for x in (half..n).step_by(step) {
                let avg = (field[(y - half) * n + (x - half)]
                    + field[(y - half) * n + (x + half)]
                    + field[(y + half) * n + (x - half)]
                    + field[(y + half) * n + (x + half)])
                    / 4.0;
                field[y * n + x] = avg + rng.uniform(-amp, amp);
            }
        }
        // square: edge midpoints, averaging in-bounds orthogonal neighbors
        for y in (0..n).step_by(half) {
            let x0 = if (y / half) % 2 == 0 { half } else { 0 };
            for x in (x0..n).step_by(step) {
                let mut sum = 0.0;
                let mut count = 0;
                if y >= half {
                    sum += field[(y - half) * n + x];
                    count += 1;
                }
                if y + half < n {
                    sum += field[(y + half) * n + x];
                    count += 1;
                }
                if x >= half {
                    sum += field[y * n + (x - half)];
                    count += 1;
                }
                if x + half < n {
                    sum += field[y * n + (x + half)];
                    count += 1;
                }
                field[y * n + x] = sum / count as f64 + rng.uniform(-amp, amp);
            }
        }
        step = half;
        amp *= 0.5;
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &field {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let v = field[y * n + x];
            out.push(if span > 0.0 { (v - lo) / span } else { 0.5 });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_image() -> Image<f64> {
        let mut rng = SeededRng::new(21);
        let data: Vec<f64> = (0..16 * 16 * 3).map(|_| rng.uniform(0.1, 0.9)).collect();
        Image::new(16, 16, 3, data).unwrap()
    }

    #[test]
    fn brightness_zero_is_identity() {
        let img = test_image();
        assert_eq!(brightness(&img, 0.0).unwrap(), img);
    }

    #[test]
    fn brightness_one_saturates() {
        let img = test_image();
        let out = brightness(&img, 1.0).unwrap();
        assert!(out.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn contrast_one_is_identity() {
        let img = test_image();
        assert_eq!(contrast(&img, 1.0).unwrap(), img);
    }

    #[test]
    fn contrast_zero_flattens_channels_to_their_means() {
        let img = test_image();
        let out = contrast(&img, 0.0).unwrap();
        for ch in 0..3 {
            let mean = img.channel_mean(ch);
            for y in 0..16 {
                for x in 0..16 {
                    assert!((out.get(y, x, ch) - mean).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn fog_zero_is_identity() {
        let img = test_image();
        let out = fog(&img, 0.0, &mut SeededRng::new(2)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn fog_full_blend_is_haze_only_and_bright() {
        let img = Image::<f64>::zeros(16, 16, 3);
        let out = fog(&img, 1.0, &mut SeededRng::new(2)).unwrap();
        assert!(out.data().iter().all(|&v| (0.6..=1.0).contains(&v)));
    }

    #[test]
    fn plasma_field_is_deterministic_and_normalized() {
        let a = plasma_field(16, 16, &mut SeededRng::new(5));
        let b = plasma_field(16, 16, &mut SeededRng::new(5));
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
