//! From-scratch SGD training and evaluation.
//!
//! The optimizer is SGD with momentum (`v <- mu*v + g`, `p <- p - lr*v`),
//! cross-entropy loss with L2 weight decay on weight matrices, and a step
//! learning-rate schedule: the effective rate at 0-indexed epoch `e` is
//! `lr0 * 10^(-#{d in drop_epochs : d <= e})`.
//!
//! Training is strictly sequential within one run; all randomness comes
//! from streams derived from `config.seed`, so a `(arch, dataset digest,
//! config)` triple reproduces the exact parameter bytes.

mod arch;
pub mod checkpoint;
mod net;

pub use arch::{ArchKind, ModelArch};
pub use net::{cross_entropy, loss_ce, Gradients, Network, ParamArray};

use crate::corruptions::{apply, CorruptionSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::SeededRng;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Which part of each batch gets the augmentation corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AugmentCoverage {
    /// Exactly ceil(B/2) images of each batch, the leading positions of
    /// the shuffled batch order.
    #[default]
    Half,
    /// Every image of every batch.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// 0-indexed epochs at which the learning rate divides by 10.
    pub lr_drop_epochs: Vec<usize>,
    /// Augmentation corruption; `None` trains the standard model.
    pub augment: Option<CorruptionSpec>,
    pub augment_coverage: AugmentCoverage,
    /// Redraw the corruption severity uniformly in 1..5 per image instead
    /// of using the spec's fixed severity.
    pub resample_severity: bool,
    /// Random horizontal flip with probability 0.5 before augmentation.
    pub horizontal_flip: bool,
    /// Final-train-accuracy bar for the `converged` flag.
    pub convergence_threshold: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 15,
            batch_size: 128,
            lr0: 0.05,
            momentum: 0.9,
            weight_decay: 1e-4,
            lr_drop_epochs: vec![8, 12],
            augment: None,
            augment_coverage: AugmentCoverage::Half,
            resample_severity: false,
            horizontal_flip: false,
            convergence_threshold: 0.9,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lr0 <= 0.0 {
            return Err(Error::validation("lr0 must be > 0"));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch_size must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::validation("momentum must be in [0, 1)"));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::validation("weight_decay must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.convergence_threshold) {
            return Err(Error::validation("convergence_threshold must be in [0, 1]"));
        }
        for pair in self.lr_drop_epochs.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::validation("lr_drop_epochs must be strictly increasing"));
            }
        }
        if let Some(&last) = self.lr_drop_epochs.last() {
            if self.epochs > 0 && last >= self.epochs {
                return Err(Error::validation("lr_drop_epochs must be < epochs"));
            }
        }
        if let Some(spec) = &self.augment {
            spec.validate()?;
        }
        Ok(())
    }

    /// Effective learning rate at 0-indexed epoch `e`.
    pub fn lr_at_epoch(&self, epoch: usize) -> f64 {
        let drops = self.lr_drop_epochs.iter().filter(|&&d| d <= epoch).count();
        self.lr0 * 10f64.powi(-(drops as i32))
    }
}

/// Everything needed to reproduce a trained model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainProvenance {
    pub config: TrainConfig,
    pub dataset_digest: String,
    pub tool_version: String,
}

/// A trained classifier with its provenance and convergence record.
#[derive(Debug, Clone)]
pub struct TrainedModel<T: Scalar> {
    pub network: Network<T>,
    pub provenance: TrainProvenance,
    pub converged: bool,
    pub final_train_accuracy: f64,
    /// Per-epoch mean training loss, for the monotone-trend diagnostics.
    pub epoch_losses: Vec<f64>,
}

impl<T: Scalar> TrainedModel<T> {
    /// SHA-256 over the architecture descriptor and the parameter arrays
    /// quantized to little-endian f32 (the checkpoint precision).
    pub fn param_digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"corrbench-params-v1");
        hasher.update(
            serde_json::to_vec(&self.network.arch).expect("arch serializes"),
        );
        for p in &self.network.params {
            hasher.update(p.name.as_bytes());
            for &v in &p.data {
                hasher.update((v.as_f64() as f32).to_le_bytes());
            }
        }
        crate::data::hex(&hasher.finalize())
    }
}

/// Fisher-Yates shuffle driven by the given stream.
fn shuffle_indices(n: usize, rng: &mut SeededRng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.uniform_int(0, i as u32) as usize;
        idx.swap(i, j);
    }
    idx
}

fn flip_horizontal<T: Scalar>(image: &Image<T>) -> Image<T> {
    let (h, w, c) = (image.height(), image.width(), image.channels());
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                out.set(y, x, ch, image.get(y, w - 1 - x, ch));
            }
        }
    }
    out
}

/// Trains a model. Per epoch: seeded shuffle, then minibatch SGD. With an
/// augmentation spec, the leading ceil(B/2) images of each batch (or all,
/// per `augment_coverage`) are corrupted through a stream derived from
/// `(seed, "augment", epoch, dataset index)`, fresh every epoch.
pub fn train<T: Scalar>(
    arch: &ModelArch,
    train_set: &Dataset<T>,
    config: &TrainConfig,
) -> Result<TrainedModel<T>> {
    config.validate()?;
    arch.validate()?;
    if train_set.is_empty() {
        return Err(Error::validation("training set is empty"));
    }
    let (h, w, c) = train_set.image_shape();
    if (h, w, c) != arch.input {
        return Err(Error::validation(format!(
            "dataset images {h}x{w}x{c} do not match arch input {:?}",
            arch.input
        )));
    }
    if train_set.num_classes() != arch.classes {
        return Err(Error::validation(format!(
            "dataset has {} classes, arch {}",
            train_set.num_classes(),
            arch.classes
        )));
    }

    let root = SeededRng::new(config.seed);
    let mut net = Network::<T>::init(arch, &root)?;
    let provenance = TrainProvenance {
        config: config.clone(),
        dataset_digest: train_set.digest(),
        tool_version: crate::TOOL_VERSION.to_string(),
    };

    let mut velocity: Gradients<T> =
        net.params.iter().map(|p| vec![T::zero(); p.data.len()]).collect();
    let n = train_set.len();
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let lr = T::from_f64_lossy(config.lr_at_epoch(epoch));
        let mu = T::from_f64_lossy(config.momentum);
        let mut shuffle_rng = root.derive_str("shuffle").derive(epoch as u64);
        let order = shuffle_indices(n, &mut shuffle_rng);
        let aug_root = root.derive_str("augment").derive(epoch as u64);

        let mut loss_sum = 0.0f64;
        let mut batch_count = 0usize;
        for (step, batch) in order.chunks(config.batch_size).enumerate() {
            let corrupt_count = match (&config.augment, config.augment_coverage) {
                (None, _) => 0,
                (Some(_), AugmentCoverage::Half) => batch.len().div_ceil(2),
                (Some(_), AugmentCoverage::All) => batch.len(),
            };
            let mut images: Vec<Image<T>> = Vec::with_capacity(batch.len());
            let mut labels = Vec::with_capacity(batch.len());
            for (pos, &ds_index) in batch.iter().enumerate() {
                let mut img = train_set.image(ds_index).clone();
                let needs_stream = config.horizontal_flip || pos < corrupt_count;
                if needs_stream {
                    let mut stream = aug_root.derive(ds_index as u64);
                    if config.horizontal_flip && stream.bernoulli(0.5) {
                        img = flip_horizontal(&img);
                    }
                    if pos < corrupt_count {
                        let spec = config.augment.as_ref().expect("corrupt_count > 0");
                        let effective = if config.resample_severity {
                            let mut s = spec.clone();
                            s.severity = stream.uniform_int(1, 5) as u8;
                            s
                        } else {
                            spec.clone()
                        };
                        img = apply(&effective, &img, &mut stream)?;
                    }
                }
                images.push(img);
                labels.push(train_set.label(ds_index));
            }
            let refs: Vec<&Image<T>> = images.iter().collect();
            let (loss, grads) = net.batch_gradients(&refs, &labels, config.weight_decay)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, step });
            }
            for ((p, v), g) in net.params.iter_mut().zip(&mut velocity).zip(&grads) {
                for ((pv, vv), &gv) in p.data.iter_mut().zip(v.iter_mut()).zip(g) {
                    *vv = mu * *vv + gv;
                    *pv = *pv - lr * *vv;
                }
            }
            loss_sum += loss;
            batch_count += 1;
        }
        epoch_losses.push(loss_sum / batch_count as f64);
    }

    let model = TrainedModel {
        network: net,
        provenance,
        converged: false,
        final_train_accuracy: 0.0,
        epoch_losses,
    };
    let final_train_accuracy = evaluate(&model, train_set)?;
    let converged = config.epochs > 0 && final_train_accuracy >= config.convergence_threshold;
    Ok(TrainedModel { converged, final_train_accuracy, ..model })
}

/// Top-1 accuracy; argmax ties break toward the lowest class index.
pub fn evaluate<T: Scalar>(model: &TrainedModel<T>, test_set: &Dataset<T>) -> Result<f64> {
    if test_set.is_empty() {
        return Err(Error::validation("evaluation set is empty"));
    }
    let mut correct = 0usize;
    for (img, &label) in test_set.images().iter().zip(test_set.labels()) {
        let logits = model.network.forward_single(img)?;
        let mut best = 0usize;
        for (k, &v) in logits.iter().enumerate() {
            if v > logits[best] {
                best = k;
            }
        }
        if best == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / test_set.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_procshapes, ProcShapesSpec, Split};

    fn small_dataset() -> (Dataset<f32>, Dataset<f32>) {
        generate_procshapes::<f32>(&ProcShapesSpec {
            classes: 3,
            per_class: 30,
            side: 24,
            seed: 11,
        })
        .unwrap()
    }

    fn quick_config(seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: 20,
            batch_size: 16,
            lr_drop_epochs: vec![14, 18],
            seed,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn lr_schedule_matches_formula() {
        let config = TrainConfig { epochs: 15, lr_drop_epochs: vec![8, 12], ..Default::default() };
        assert_eq!(config.lr_at_epoch(0), 0.05);
        assert_eq!(config.lr_at_epoch(7), 0.05);
        assert!((config.lr_at_epoch(8) - 0.005).abs() < 1e-12);
        assert!((config.lr_at_epoch(12) - 0.0005).abs() < 1e-12);
        assert!((config.lr_at_epoch(14) - 0.0005).abs() < 1e-12);
    }

    #[test]
    fn config_validation_catches_bad_fields() {
        let mut c = TrainConfig::default();
        c.lr0 = 0.0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::default();
        c.lr_drop_epochs = vec![12, 8];
        assert!(c.validate().is_err());
        let mut c = TrainConfig::default();
        c.lr_drop_epochs = vec![20];
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_epochs_returns_initialized_unconverged_model() {
        let (train_set, _) = small_dataset();
        let arch = ModelArch::mlp((24, 24, 3), 3);
        let config = TrainConfig { epochs: 0, lr_drop_epochs: vec![], seed: 3, ..Default::default() };
        let model = train(&arch, &train_set, &config).unwrap();
        assert!(!model.converged);
        let fresh = Network::<f32>::init(&arch, &SeededRng::new(3)).unwrap();
        for (a, b) in model.network.params.iter().zip(&fresh.params) {
            assert_eq!(a.data, b.data);
        }
    }

    #[test]
    fn same_config_and_seed_reproduce_parameter_digest() {
        let (train_set, _) = small_dataset();
        let arch = ModelArch::mlp((24, 24, 3), 3);
        let a = train(&arch, &train_set, &quick_config(5)).unwrap();
        let b = train(&arch, &train_set, &quick_config(5)).unwrap();
        assert_eq!(a.param_digest(), b.param_digest());
        let c = train(&arch, &train_set, &quick_config(6)).unwrap();
        assert_ne!(a.param_digest(), c.param_digest());
    }

    #[test]
    fn training_learns_the_small_task() {
        let (train_set, test_set) = small_dataset();
        let arch = ModelArch::mlp((24, 24, 3), 3);
        let model = train(&arch, &train_set, &quick_config(7)).unwrap();
        let acc = evaluate(&model, &test_set).unwrap();
        assert!(acc > 0.8, "test accuracy {acc}");
        assert!(model.final_train_accuracy > 0.9);
    }

    #[test]
    fn evaluate_is_order_invariant_and_constant_model_scores_one_over_k() {
        let (train_set, _) = small_dataset();
        let arch = ModelArch::mlp((24, 24, 3), 3);
        // zero network: all logits equal, ties break to class 0
        let model = TrainedModel {
            network: Network::<f32>::zeros(&arch).unwrap(),
            provenance: TrainProvenance {
                config: TrainConfig::default(),
                dataset_digest: String::new(),
                tool_version: String::new(),
            },
            converged: false,
            final_train_accuracy: 0.0,
            epoch_losses: vec![],
        };
        let acc = evaluate(&model, &train_set).unwrap();
        let class0 = train_set.labels().iter().filter(|&&l| l == 0).count();
        assert_eq!(acc, class0 as f64 / train_set.len() as f64);

        // reversed order gives the same accuracy
        let reversed = Dataset::new(
            train_set.images().iter().rev().cloned().collect(),
            train_set.labels().iter().rev().copied().collect(),
            train_set.num_classes(),
            Split::Train,
            vec![],
        )
        .unwrap();
        assert_eq!(evaluate(&model, &reversed).unwrap(), acc);
    }

    #[test]
    fn empty_evaluation_set_rejected() {
        let (train_set, _) = small_dataset();
        let arch = ModelArch::mlp((24, 24, 3), 3);
        let model = train(&arch, &train_set, &quick_config(1)).unwrap();
        let empty = Dataset::<f32>::new(vec![], vec![], 3, Split::Test, vec![]).unwrap();
        assert!(evaluate(&model, &empty).is_err());
    }

    #[test]
    fn augmented_training_differs_from_standard_but_is_reproducible() {
        use crate::corruptions::{CorruptionId, CorruptionSpec};
        let (train_set, _) = small_dataset();
        let arch = ModelArch::mlp((24, 24, 3), 3);
        let mut aug_cfg = quick_config(9);
        aug_cfg.augment = Some(CorruptionSpec::new(CorruptionId::GaussianNoise, 3));
        let std_model = train(&arch, &train_set, &quick_config(9)).unwrap();
        let aug_a = train(&arch, &train_set, &aug_cfg).unwrap();
        let aug_b = train(&arch, &train_set, &aug_cfg).unwrap();
        assert_eq!(aug_a.param_digest(), aug_b.param_digest());
        assert_ne!(aug_a.param_digest(), std_model.param_digest());
    }

    #[test]
    fn loss_trend_is_mostly_decreasing() {
        let (train_set, _) = small_dataset();
        let arch = ModelArch::mlp((24, 24, 3), 3);
        let model = train(&arch, &train_set, &quick_config(13)).unwrap();
        let drops = model
            .epoch_losses
            .windows(2)
            .filter(|pair| pair[1] <= pair[0])
            .count();
        assert!(
            drops * 10 >= (model.epoch_losses.len() - 1) * 9,
            "losses {:?}",
            model.epoch_losses
        );
    }
}
