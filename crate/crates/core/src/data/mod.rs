//! Desk-scale datasets: the procedural shape generator, an IDX loader for
//! MNIST-like files, and whole-dataset corruption.

mod idx;
mod procshapes;

pub use idx::load_idx;
pub use procshapes::{generate_procshapes, shape_name, ProcShapesSpec, SHAPE_COUNT};

use crate::corruptions::{apply, CorruptionSpec};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::SeededRng;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Split::Train => f.write_str("train"),
            Split::Test => f.write_str("test"),
        }
    }
}

/// Uniformly shaped labeled images. Immutable once built; corruption
/// produces a new dataset.
#[derive(Debug, Clone)]
pub struct Dataset<T: Scalar> {
    images: Vec<Image<T>>,
    labels: Vec<usize>,
    num_classes: usize,
    split: Split,
    provenance: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        images: Vec<Image<T>>,
        labels: Vec<usize>,
        num_classes: usize,
        split: Split,
        provenance: Vec<String>,
    ) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::validation(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        if let Some(first) = images.first() {
            let dims = (first.height(), first.width(), first.channels());
            for img in &images {
                if (img.height(), img.width(), img.channels()) != dims {
                    return Err(Error::validation("images must share one shape"));
                }
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::validation(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        Ok(Dataset { images, labels, num_classes, split, provenance })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[Image<T>] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &Image<T> {
        &self.images[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn split(&self) -> Split {
        self.split
    }

    /// Same data relabeled as the given split.
    pub fn with_split(mut self, split: Split) -> Self {
        self.split = split;
        self
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    /// (height, width, channels) of every image.
    pub fn image_shape(&self) -> (usize, usize, usize) {
        let img = &self.images[0];
        (img.height(), img.width(), img.channels())
    }

    /// SHA-256 over a canonical serialization: header, labels, then pixel
    /// data widened to f64 bits (exact for f32), all little-endian.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"corrbench-dataset-v1");
        hasher.update((self.images.len() as u64).to_le_bytes());
        hasher.update((self.num_classes as u64).to_le_bytes());
        if let Some(first) = self.images.first() {
            for dim in [first.height(), first.width(), first.channels()] {
                hasher.update((dim as u64).to_le_bytes());
            }
        }
        for &label in &self.labels {
            hasher.update((label as u32).to_le_bytes());
        }
        for img in &self.images {
            for &v in img.data() {
                hasher.update(v.as_f64().to_bits().to_le_bytes());
            }
        }
        hex(&hasher.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Applies `spec` to every image with a stream derived from
/// `(seed, image index)`, so the result is independent of processing
/// order. Labels, shapes and the split are unchanged.
pub fn corrupt_dataset<T: Scalar>(
    dataset: &Dataset<T>,
    spec: &CorruptionSpec,
    seed: u64,
) -> Result<Dataset<T>> {
    corrupt_dataset_policy(dataset, spec, seed, false)
}

/// Like [`corrupt_dataset`], optionally redrawing the severity uniformly
/// in 1..5 per image (one extra draw from the image stream before the
/// corruption itself).
pub fn corrupt_dataset_policy<T: Scalar>(
    dataset: &Dataset<T>,
    spec: &CorruptionSpec,
    seed: u64,
    resample_severity: bool,
) -> Result<Dataset<T>> {
    let root = SeededRng::new(seed);
    let mut images = Vec::with_capacity(dataset.len());
    for (i, img) in dataset.images().iter().enumerate() {
        let mut rng = root.derive(i as u64);
        let effective = if resample_severity {
            let mut s = spec.clone();
            s.severity = rng.uniform_int(1, 5) as u8;
            s
        } else {
            spec.clone()
        };
        images.push(apply(&effective, img, &mut rng)?);
    }
    let mut provenance = dataset.provenance.clone();
    provenance.push(format!(
        "corrupt(id={}, severity={}, resample={resample_severity}, seed={seed})",
        spec.id, spec.severity
    ));
    Dataset::new(images, dataset.labels.clone(), dataset.num_classes, dataset.split, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corruptions::{identity_spec, CorruptionId};

    fn tiny_dataset() -> Dataset<f64> {
        let (train, _) = generate_procshapes::<f64>(&ProcShapesSpec {
            classes: 2,
            per_class: 5,
            side: 24,
            seed: 3,
        })
        .unwrap();
        train
    }

    #[test]
    fn corrupt_identity_spec_leaves_dataset_unchanged() {
        let ds = tiny_dataset();
        let spec = identity_spec(CorruptionId::GaussianNoise).unwrap();
        let out = corrupt_dataset(&ds, &spec, 9).unwrap();
        assert_eq!(out.digest(), ds.digest());
    }

    #[test]
    fn corrupt_same_seed_same_digest() {
        let ds = tiny_dataset();
        let spec = CorruptionSpec::new(CorruptionId::GaussianNoise, 3);
        let a = corrupt_dataset(&ds, &spec, 7).unwrap();
        let b = corrupt_dataset(&ds, &spec, 7).unwrap();
        assert_eq!(a.digest(), b.digest());
        let c = corrupt_dataset(&ds, &spec, 8).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn corrupt_preserves_labels_and_shape() {
        let ds = tiny_dataset();
        let spec = CorruptionSpec::new(CorruptionId::ImpulseNoise, 4);
        let out = corrupt_dataset(&ds, &spec, 1).unwrap();
        assert_eq!(out.labels(), ds.labels());
        assert_eq!(out.image_shape(), ds.image_shape());
    }

    #[test]
    fn label_out_of_range_rejected() {
        let img = Image::<f64>::zeros(8, 8, 1);
        let err = Dataset::new(vec![img], vec![2], 2, Split::Train, vec![]);
        assert!(err.is_err());
    }
}
