//! Additive, multiplicative and impulse noise.
//!
//! All three draw one value per scalar component in row-major scan order,
//! so per-image streams replay exactly.

use crate::error::{Error, Result};
use crate::image::{clamp01, Image};
use crate::rng::SeededRng;
use crate::scalar::Scalar;

/// Adds N(0, sigma^2) to every component. `sigma == 0` is the exact
/// identity (the stream is still consumed, one draw per component).
pub fn gaussian_noise<T: Scalar>(
    image: &Image<T>,
    sigma: f64,
    rng: &mut SeededRng,
) -> Result<Image<T>> {
    if sigma < 0.0 {
        return Err(Error::validation(format!("gaussian sigma must be >= 0, got {sigma}")));
    }
    let mut out = image.clone();
    for v in out.data_mut() {
        *v = *v + T::from_f64_lossy(rng.normal(0.0, sigma));
    }
    Ok(clamp01(out))
}

/// Replaces v by Poisson(v * scale) / scale per component, modeling photon
/// counting noise. Larger `scale` means weaker noise.
pub fn shot_noise<T: Scalar>(
    image: &Image<T>,
    scale: f64,
    rng: &mut SeededRng,
) -> Result<Image<T>> {
    if scale <= 0.0 {
        return Err(Error::validation(format!("shot scale must be > 0, got {scale}")));
    }
    let mut out = image.clone();
    for v in out.data_mut() {
        let mean = v.as_f64().clamp(0.0, 1.0) * scale;
        *v = T::from_f64_lossy(rng.poisson(mean) as f64 / scale);
    }
    Ok(clamp01(out))
}

/// Salt-and-pepper: each component becomes 0 with probability p/2, 1 with
/// probability p/2, and is otherwise untouched.
pub fn impulse_noise<T: Scalar>(
    image: &Image<T>,
    p: f64,
    rng: &mut SeededRng,
) -> Result<Image<T>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::validation(format!("impulse p must be in [0, 1], got {p}")));
    }
    let mut out = image.clone();
    for v in out.data_mut() {
        let u = rng.uniform(0.0, 1.0);
        if u < p / 2.0 {
            *v = T::zero();
        } else if u < p {
            *v = T::one();
        }
    }
    Ok(clamp01(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_image() -> Image<f64> {
        let mut rng = SeededRng::new(99);
        let data: Vec<f64> = (0..32 * 32 * 3).map(|_| rng.uniform(0.0, 1.0)).collect();
        Image::new(32, 32, 3, data).unwrap()
    }

    #[test]
    fn gaussian_sigma_zero_is_identity() {
        let img = test_image();
        let out = gaussian_noise(&img, 0.0, &mut SeededRng::new(1)).unwrap();
        assert_eq!(out, img);
    }

    // Monte-Carlo check against sigma^2 = 0.01: the sample variance of the
    // added noise on a constant-0.5 image stays well inside [0.008, 0.012]
    // for 32x32x3 = 3072 draws.
    #[test]
    fn gaussian_sample_variance_matches_sigma() {
        let img = Image::<f64>::constant(32, 32, 3, 0.5);
        let out = gaussian_noise(&img, 0.1, &mut SeededRng::new(7)).unwrap();
        let n = out.data().len() as f64;
        let mean: f64 = out.data().iter().sum::<f64>() / n;
        let var: f64 = out.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!((0.008..=0.012).contains(&var), "variance {var}");
    }

    #[test]
    fn impulse_p_zero_is_identity() {
        let img = test_image();
        let out = impulse_noise(&img, 0.0, &mut SeededRng::new(1)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn impulse_p_one_makes_every_component_binary() {
        let img = Image::<f64>::constant(8, 8, 3, 0.5);
        let out = impulse_noise(&img, 1.0, &mut SeededRng::new(3)).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn shot_noise_deterministic_per_seed() {
        let img = test_image();
        let a = shot_noise(&img, 50.0, &mut SeededRng::new(5)).unwrap();
        let b = shot_noise(&img, 50.0, &mut SeededRng::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shot_noise_rejects_nonpositive_scale() {
        let img = test_image();
        assert!(shot_noise(&img, 0.0, &mut SeededRng::new(1)).is_err());
    }

    #[test]
    fn noise_outputs_stay_in_range() {
        let img = test_image();
        for out in [
            gaussian_noise(&img, 0.5, &mut SeededRng::new(2)).unwrap(),
            shot_noise(&img, 5.0, &mut SeededRng::new(2)).unwrap(),
            impulse_noise(&img, 0.5, &mut SeededRng::new(2)).unwrap(),
        ] {
            assert!(out.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
