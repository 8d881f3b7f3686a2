//! Procedural shape-classification dataset.
//!
//! Renders one of ten shapes per image at a random position, scale,
//! rotation and intensity over a noisy background. Every image is drawn
//! from a stream derived from `(seed, split, class, index)`, so generation
//! is order-independent and the train/test split is disjoint by
//! construction.

use super::{Dataset, Split};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::SeededRng;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

pub const SHAPE_COUNT: usize = 10;

const SHAPE_NAMES: [&str; SHAPE_COUNT] = [
    "disk", "square", "triangle", "cross", "ring", "bar", "ell", "tee", "ex", "diamond",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcShapesSpec {
    pub classes: usize,
    pub per_class: usize,
    pub side: usize,
    pub seed: u64,
}

impl Default for ProcShapesSpec {
    fn default() -> Self {
        ProcShapesSpec { classes: 10, per_class: 200, side: 32, seed: 7 }
    }
}

/// Generates the train and test splits (80/20 per class, floor on the
/// train side). Deterministic per spec.
pub fn generate_procshapes<T: Scalar>(
    spec: &ProcShapesSpec,
) -> Result<(Dataset<T>, Dataset<T>)> {
    if !(2..=SHAPE_COUNT).contains(&spec.classes) {
        return Err(Error::validation(format!(
            "classes must be in 2..={SHAPE_COUNT}, got {}",
            spec.classes
        )));
    }
    if spec.side < 24 {
        return Err(Error::validation(format!("side must be >= 24, got {}", spec.side)));
    }
    if spec.per_class == 0 {
        return Err(Error::validation("per_class must be >= 1"));
    }
    let root = SeededRng::new(spec.seed).derive_str("procshapes");
    let n_train = spec.per_class * 4 / 5;
    let build = |split: Split, lo: usize, hi: usize| -> Result<Dataset<T>> {
        let mut images = Vec::with_capacity((hi - lo) * spec.classes);
        let mut labels = Vec::with_capacity((hi - lo) * spec.classes);
        for class in 0..spec.classes {
            let class_stream = root.derive(class as u64);
            for index in lo..hi {
                let mut rng = class_stream.derive(index as u64);
                images.push(render_shape(class, spec.side, &mut rng));
                labels.push(class);
            }
        }
        Dataset::new(
            images,
            labels,
            spec.classes,
            split,
            vec![format!(
                "procshapes(classes={}, per_class={}, side={}, seed={}, split={split})",
                spec.classes, spec.per_class, spec.side, spec.seed
            )],
        )
    };
    let train = build(Split::Train, 0, n_train)?;
    let test = build(Split::Test, n_train, spec.per_class)?;
    Ok((train, test))
}

/// Draw order per image: background gray, background tint (3), shape gray,
/// shape tint (3), radius, center y, center x, rotation, then per-pixel
/// per-channel background noise.
fn render_shape<T: Scalar>(class: usize, side: usize, rng: &mut SeededRng) -> Image<T> {
    let bg = rng.uniform(0.05, 0.30);
    let bg_tint = [rng.uniform(-0.04, 0.04), rng.uniform(-0.04, 0.04), rng.uniform(-0.04, 0.04)];
    let fg = rng.uniform(0.70, 0.95);
    let fg_tint = [rng.uniform(-0.04, 0.04), rng.uniform(-0.04, 0.04), rng.uniform(-0.04, 0.04)];
    let radius = rng.uniform(0.27, 0.40) * side as f64;
    let cy = rng.uniform(radius + 1.0, side as f64 - radius - 1.0);
    let cx = rng.uniform(radius + 1.0, side as f64 - radius - 1.0);
    // rotation capped at +/-15 degrees: at 45 degrees cross and ex coincide
    let theta = rng.uniform(-0.262, 0.262);
    let (sin_t, cos_t) = theta.sin_cos();

    let mut data = Vec::with_capacity(side * side * 3);
    for y in 0..side {
        for x in 0..side {
            // 2x2 supersampled coverage for soft edges
            let mut cover = 0.0;
            for (oy, ox) in [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)] {
                let py = y as f64 + oy - cy;
                let px = x as f64 + ox - cx;
                // rotate the sample point back into shape coordinates
                let u = (px * cos_t + py * sin_t) / radius;
                let v = (-px * sin_t + py * cos_t) / radius;
                if inside_shape(class, u, v) {
                    cover += 0.25;
                }
            }
            for ch in 0..3 {
                let base = bg + bg_tint[ch] + cover * (fg + fg_tint[ch] - bg - bg_tint[ch]);
                let noisy = base + rng.uniform(-0.03, 0.03);
                data.push(T::from_f64_lossy(noisy.clamp(0.0, 1.0)));
            }
        }
    }
    Image::new(side, side, 3, data).expect("procshapes dimensions valid")
}

/// Shape membership in unit coordinates (u right, v down, radius 1).
fn inside_shape(class: usize, u: f64, v: f64) -> bool {
    match class {
        // disk
        0 => u * u + v * v <= 1.0,
        // square
        1 => u.abs() <= 0.82 && v.abs() <= 0.82,
        // upward triangle with vertices at distance 1
        2 => {
            let vertices = [(0.0, -1.0), (0.866, 0.5), (-0.866, 0.5)];
            let mut inside = true;
            for i in 0..3 {
                let (x1, y1) = vertices[i];
                let (x2, y2) = vertices[(i + 1) % 3];
                let cross = (x2 - x1) * (v - y1) - (y2 - y1) * (u - x1);
                inside &= cross >= 0.0;
            }
            inside
        }
        // cross (plus sign)
        3 => (u.abs() <= 0.3 && v.abs() <= 1.0) || (v.abs() <= 0.3 && u.abs() <= 1.0),
        // ring
        4 => {
            let d = (u * u + v * v).sqrt();
            (0.6..=1.0).contains(&d)
        }
        // vertical bar
        5 => u.abs() <= 0.28 && v.abs() <= 1.0,
        // L: left vertical stroke plus bottom horizontal stroke
        6 => {
            ((-0.8..=-0.3).contains(&u) && v.abs() <= 1.0)
                || ((0.5..=1.0).contains(&v) && (-0.8..=0.9).contains(&u))
        }
        // T: top horizontal stroke plus center stem
        7 => {
            ((-1.0..=-0.5).contains(&v) && u.abs() <= 1.0)
                || (u.abs() <= 0.25 && v.abs() <= 1.0)
        }
        // X: both diagonals
        8 => {
            ((u - v).abs() <= 0.35 || (u + v).abs() <= 0.35)
                && u.abs() <= 1.0
                && v.abs() <= 1.0
        }
        // diamond
        9 => u.abs() + v.abs() <= 1.0,
        _ => unreachable!("class checked by generate_procshapes"),
    }
}

/// Human-readable name of a class index.
pub fn shape_name(class: usize) -> &'static str {
    SHAPE_NAMES[class]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_datasets() {
        let spec = ProcShapesSpec { classes: 3, per_class: 10, side: 24, seed: 5 };
        let (tr1, te1) = generate_procshapes::<f32>(&spec).unwrap();
        let (tr2, te2) = generate_procshapes::<f32>(&spec).unwrap();
        assert_eq!(tr1.digest(), tr2.digest());
        assert_eq!(te1.digest(), te2.digest());
    }

    #[test]
    fn split_arithmetic_and_balance() {
        let spec = ProcShapesSpec { classes: 2, per_class: 10, side: 24, seed: 1 };
        let (train, test) = generate_procshapes::<f32>(&spec).unwrap();
        assert_eq!(train.len(), 16);
        assert_eq!(test.len(), 4);
        for class in 0..2 {
            assert_eq!(train.labels().iter().filter(|&&l| l == class).count(), 8);
            assert_eq!(test.labels().iter().filter(|&&l| l == class).count(), 2);
        }
    }

    #[test]
    fn train_and_test_do_not_share_images() {
        let spec = ProcShapesSpec { classes: 2, per_class: 10, side: 24, seed: 1 };
        let (train, test) = generate_procshapes::<f32>(&spec).unwrap();
        assert_ne!(train.digest(), test.digest());
        for tr in train.images() {
            for te in test.images() {
                assert_ne!(tr.data(), te.data());
            }
        }
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        for spec in [
            ProcShapesSpec { classes: 1, per_class: 10, side: 32, seed: 0 },
            ProcShapesSpec { classes: 11, per_class: 10, side: 32, seed: 0 },
            ProcShapesSpec { classes: 5, per_class: 10, side: 16, seed: 0 },
        ] {
            assert!(generate_procshapes::<f32>(&spec).is_err());
        }
    }

    #[test]
    fn pixels_in_range_and_shape_visible() {
        let spec = ProcShapesSpec { classes: 10, per_class: 2, side: 32, seed: 9 };
        let (train, _) = generate_procshapes::<f64>(&spec).unwrap();
        for img in train.images() {
            assert!(img.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
            let spread = img.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - img.data().iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(spread > 0.2, "shape should contrast with background");
        }
    }
}
