//! End-to-end orchestration: trains the standard model plus one augmented
//! model per corruption, evaluates every model under every condition, and
//! assembles the accuracy table and overlap matrix.
//!
//! For N corruptions a cold run performs N+1 trainings and (N+1)^2
//! evaluations; everything is content-address-cached, so a warm rerun
//! performs none. Per-corruption seeds derive from `(master seed,
//! corruption id)`, which means adding a corruption to a plan never
//! changes existing models, and all models see the same corrupted test
//! sets (per-image streams derived from `(master seed, "test", id)`).

mod cache;

pub use cache::{key_of, Cache, CacheKey};

use crate::corruptions::{CorruptionId, CorruptionSpec};
use crate::data::{
    corrupt_dataset_policy, generate_procshapes, load_idx, Dataset, ProcShapesSpec, Split,
};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::scalar::Scalar;
use crate::scores::{
    AccuracyRow, AccuracyTable, OverlapCell, OverlapMatrix, TableProvenance,
    DEFAULT_DENOMINATOR_EPSILON, CLEAN_CONDITION, STANDARD_MODEL,
};
use crate::trainer::{evaluate, train, ArchKind, ModelArch, TrainConfig, TrainedModel};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

/// Where the datasets come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    Procshapes(ProcShapesSpec),
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Procshapes(ProcShapesSpec::default())
    }
}

/// How corruption severity is chosen during augmentation and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum SeverityPolicy {
    Fixed { level: u8 },
    /// Severity redrawn uniformly in 1..5 per image.
    Resample,
}

impl Default for SeverityPolicy {
    fn default() -> Self {
        SeverityPolicy::Fixed { level: 3 }
    }
}

impl std::fmt::Display for SeverityPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeverityPolicy::Fixed { level } => write!(f, "fixed({level})"),
            SeverityPolicy::Resample => f.write_str("resample"),
        }
    }
}

/// Full description of one matrix run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    #[serde(default)]
    pub dataset: DatasetSpec,
    pub arch: ArchKind,
    /// Training template; the pipeline fills `augment`, `seed` and
    /// `resample_severity` per model.
    #[serde(default)]
    pub train: TrainConfig,
    pub corruptions: Vec<CorruptionId>,
    #[serde(default)]
    pub severity: SeverityPolicy,
    pub master_seed: u64,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads for trainings/evaluations; 0 means one per core.
    #[serde(default)]
    pub workers: usize,
}

impl RunPlan {
    pub fn validate(&self) -> Result<()> {
        if self.corruptions.is_empty() {
            return Err(Error::validation("plan needs at least one corruption"));
        }
        let unique: BTreeSet<_> = self.corruptions.iter().collect();
        if unique.len() != self.corruptions.len() {
            return Err(Error::validation("corruption ids must be unique"));
        }
        if let SeverityPolicy::Fixed { level } = self.severity {
            if !(1..=5).contains(&level) {
                return Err(Error::validation(format!("severity level {level} out of 1..5")));
            }
        }
        self.train.validate()?;
        Ok(())
    }

    /// The corruption spec used for augmentation and evaluation of `id`.
    pub fn corruption_spec(&self, id: CorruptionId) -> CorruptionSpec {
        let severity = match self.severity {
            SeverityPolicy::Fixed { level } => level,
            // placeholder level; per-image redraw replaces it
            SeverityPolicy::Resample => 3,
        };
        CorruptionSpec::new(id, severity)
    }

    fn resample(&self) -> bool {
        matches!(self.severity, SeverityPolicy::Resample)
    }

    /// Training seed for a model; `None` is the standard model. Seeds
    /// derive from `(master seed, model tag)` only, so a plan's models are
    /// stable under adding or removing other corruptions.
    pub fn model_seed(&self, id: Option<CorruptionId>) -> u64 {
        let tag = id.map_or(STANDARD_MODEL, |c| c.as_str());
        SeededRng::new(self.master_seed).derive_str("model").derive_str(tag).seed()
    }

    /// Seed for corrupting the test set under condition `id`.
    pub fn test_seed(&self, id: CorruptionId) -> u64 {
        SeededRng::new(self.master_seed).derive_str("test").derive_str(id.as_str()).seed()
    }

    fn train_config(&self, id: Option<CorruptionId>) -> TrainConfig {
        TrainConfig {
            augment: id.map(|c| self.corruption_spec(c)),
            resample_severity: id.is_some() && self.resample(),
            seed: self.model_seed(id),
            ..self.train.clone()
        }
    }
}

/// Materialized train/test pair.
pub fn build_datasets<T: Scalar>(spec: &DatasetSpec) -> Result<(Dataset<T>, Dataset<T>)> {
    match spec {
        DatasetSpec::Procshapes(ps) => generate_procshapes(ps),
        DatasetSpec::Idx { train_images, train_labels, test_images, test_labels } => {
            let train = load_idx(train_images, train_labels)?;
            let test = load_idx(test_images, test_labels)?;
            Ok((train, test.with_split(Split::Test)))
        }
    }
}

#[derive(Serialize)]
struct ModelKeyDesc<'a> {
    dataset_digest: &'a str,
    arch: &'a ModelArch,
    config: &'a TrainConfig,
}

#[derive(Serialize)]
struct EvalKeyDesc<'a> {
    model_digest: &'a str,
    test_digest: &'a str,
    condition: &'a ConditionDesc,
}

#[derive(Serialize, Clone, PartialEq)]
struct ConditionDesc {
    id: String,
    spec: Option<CorruptionSpec>,
    resample: bool,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct EvalRecord {
    accuracy: f64,
}

/// Result of a matrix run, with work counters for cache verification.
#[derive(Debug, Clone)]
pub struct MatrixRun {
    pub table: AccuracyTable,
    pub matrix: OverlapMatrix,
    /// Per-model problems (training divergence); the run continues with
    /// the affected rows flagged non-converged.
    pub warnings: Vec<String>,
    /// Trainings actually executed (cache misses).
    pub trainings_run: usize,
    /// Evaluations actually executed (cache misses).
    pub evaluations_run: usize,
}

enum ModelOutcome<T: Scalar> {
    Trained(Box<TrainedModel<T>>, bool /* cache hit */),
    Diverged(String),
}

/// Runs the full methodology over `plan.corruptions`.
pub fn run_matrix<T: Scalar>(plan: &RunPlan) -> Result<MatrixRun> {
    plan.validate()?;
    let cache = Cache::new(plan.cache_dir.clone())?;
    let (train_set, test_set) = build_datasets::<T>(&plan.dataset)?;
    let (h, w, c) = train_set.image_shape();
    let arch = ModelArch::of_kind(plan.arch, (h, w, c), train_set.num_classes());
    let train_digest = train_set.digest();
    let test_digest = test_set.digest();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    // model list: standard first, then one per corruption in plan order
    let model_slots: Vec<Option<CorruptionId>> = std::iter::once(None)
        .chain(plan.corruptions.iter().copied().map(Some))
        .collect();

    let train_set = Arc::new(train_set);
    let outcomes: Vec<(ModelOutcome<T>, CacheKey)> = pool.install(|| {
        use rayon::prelude::*;
        model_slots
            .par_iter()
            .map(|slot| {
                let config = plan.train_config(*slot);
                let key = key_of(
                    "model",
                    &ModelKeyDesc { dataset_digest: &train_digest, arch: &arch, config: &config },
                );
                if let Some(model) = cache.get_model::<T>(&key)? {
                    return Ok((ModelOutcome::Trained(Box::new(model), true), key));
                }
                match train(&arch, &train_set, &config) {
                    Ok(model) => {
                        cache.put_model(&key, &model)?;
                        Ok((ModelOutcome::Trained(Box::new(model), false), key))
                    }
                    Err(Error::Diverged { epoch, step }) => {
                        let tag = slot.map_or(STANDARD_MODEL.to_string(), |c| c.to_string());
                        Ok((
                            ModelOutcome::Diverged(format!(
                                "model {tag}: training diverged at epoch {epoch}, step {step}"
                            )),
                            key,
                        ))
                    }
                    Err(other) => Err(other),
                }
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut warnings = Vec::new();
    let mut trainings_run = 0usize;
    let mut models: Vec<Option<Arc<TrainedModel<T>>>> = Vec::with_capacity(outcomes.len());
    for (outcome, _) in outcomes {
        match outcome {
            ModelOutcome::Trained(model, hit) => {
                if !hit {
                    trainings_run += 1;
                }
                models.push(Some(Arc::new(*model)));
            }
            ModelOutcome::Diverged(msg) => {
                warnings.push(msg);
                models.push(None);
            }
        }
    }

    // evaluation conditions: clean first, then plan order
    let conditions: Vec<ConditionDesc> = std::iter::once(ConditionDesc {
        id: CLEAN_CONDITION.to_string(),
        spec: None,
        resample: false,
        seed: 0,
    })
    .chain(plan.corruptions.iter().map(|&id| ConditionDesc {
        id: id.to_string(),
        spec: Some(plan.corruption_spec(id)),
        resample: plan.resample(),
        seed: plan.test_seed(id),
    }))
    .collect();

    // find which (model, condition) pairs miss the cache
    let mut pending: Vec<(usize, usize)> = Vec::new();
    let mut accuracies = vec![0.0f64; models.len() * conditions.len()];
    for (mi, model) in models.iter().enumerate() {
        let Some(model) = model else { continue };
        let model_digest = model.param_digest();
        for (ci, cond) in conditions.iter().enumerate() {
            let key = key_of(
                "eval",
                &EvalKeyDesc { model_digest: &model_digest, test_digest: &test_digest, condition: cond },
            );
            match cache.get_json::<EvalRecord>(&key)? {
                Some(rec) => accuracies[mi * conditions.len() + ci] = rec.accuracy,
                None => pending.push((mi, ci)),
            }
        }
    }

    // materialize only the corrupted test sets the pending evals need
    let needed: BTreeSet<usize> = pending.iter().map(|&(_, ci)| ci).collect();
    let test_set = Arc::new(test_set);
    let built: Vec<(usize, Arc<Dataset<T>>)> = pool.install(|| {
        use rayon::prelude::*;
        needed
            .par_iter()
            .map(|&ci| {
                let cond = &conditions[ci];
                let ds = match &cond.spec {
                    None => Arc::clone(&test_set),
                    Some(spec) => Arc::new(corrupt_dataset_policy(
                        &test_set,
                        spec,
                        cond.seed,
                        cond.resample,
                    )?),
                };
                Ok((ci, ds))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut condition_sets: Vec<Option<Arc<Dataset<T>>>> = vec![None; conditions.len()];
    for (ci, ds) in built {
        condition_sets[ci] = Some(ds);
    }

    let evaluations: Vec<(usize, usize, f64)> = pool.install(|| {
        use rayon::prelude::*;
        pending
            .par_iter()
            .map(|&(mi, ci)| {
                let model = models[mi].as_ref().expect("pending implies model present");
                let ds = condition_sets[ci].as_ref().expect("condition set built");
                let accuracy = evaluate(model, ds)?;
                let key = key_of(
                    "eval",
                    &EvalKeyDesc {
                        model_digest: &model.param_digest(),
                        test_digest: &test_digest,
                        condition: &conditions[ci],
                    },
                );
                cache.put_json(&key, &EvalRecord { accuracy })?;
                Ok((mi, ci, accuracy))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let evaluations_run = evaluations.len();
    for (mi, ci, accuracy) in evaluations {
        accuracies[mi * conditions.len() + ci] = accuracy;
    }

    let model_ids: Vec<String> = model_slots
        .iter()
        .map(|slot| slot.map_or(STANDARD_MODEL.to_string(), |c| c.to_string()))
        .collect();
    let condition_ids: Vec<String> = conditions.iter().map(|c| c.id.clone()).collect();
    let converged: Vec<bool> = models
        .iter()
        .map(|m| m.as_ref().map_or(false, |m| m.converged))
        .collect();
    for (mi, model) in models.iter().enumerate() {
        if let Some(model) = model {
            if !model.converged {
                warnings.push(format!(
                    "model {}: converged flag false (final train accuracy {:.4})",
                    model_ids[mi], model.final_train_accuracy
                ));
            }
        }
    }

    let provenance = TableProvenance {
        dataset_digest: test_digest,
        arch: plan.arch.to_string(),
        master_seed: plan.master_seed,
        severity_policy: plan.severity.to_string(),
        tool_version: crate::TOOL_VERSION.to_string(),
    };
    let table = AccuracyTable::new(model_ids, condition_ids, accuracies, converged, provenance)?;
    let matrix = OverlapMatrix::from_table(&table, DEFAULT_DENOMINATOR_EPSILON)?;
    Ok(MatrixRun { table, matrix, warnings, trainings_run, evaluations_run })
}

/// Convenience entry point for a single pair: runs the plan restricted to
/// `{c1, c2}` and returns the `(c1, c2)` cell.
pub fn run_pair<T: Scalar>(
    plan: &RunPlan,
    c1: CorruptionId,
    c2: CorruptionId,
) -> Result<(OverlapCell, MatrixRun)> {
    let mut restricted = plan.clone();
    restricted.corruptions = if c1 == c2 { vec![c1] } else { vec![c1, c2] };
    let run = run_matrix::<T>(&restricted)?;
    let cell = *run
        .matrix
        .cell_by_ids(c1.as_str(), c2.as_str())
        .expect("pair cell exists by construction");
    Ok((cell, run))
}

/// Evaluates an externally provided checkpoint over clean + corrupted test
/// sets, producing a row that can join a table from the same plan.
pub fn evaluate_external<T: Scalar>(
    model: &TrainedModel<T>,
    model_id: &str,
    plan: &RunPlan,
) -> Result<AccuracyRow> {
    let (_, test_set) = build_datasets::<T>(&plan.dataset)?;
    let (h, w, c) = test_set.image_shape();
    if model.network.arch.input != (h, w, c) || model.network.arch.classes != test_set.num_classes()
    {
        return Err(Error::validation(format!(
            "checkpoint arch {:?}/{} classes does not match dataset {:?}/{} classes",
            model.network.arch.input,
            model.network.arch.classes,
            (h, w, c),
            test_set.num_classes()
        )));
    }
    let mut condition_ids = vec![CLEAN_CONDITION.to_string()];
    let mut accuracies = vec![evaluate(model, &test_set)?];
    for &id in &plan.corruptions {
        let spec = plan.corruption_spec(id);
        let corrupted =
            corrupt_dataset_policy(&test_set, &spec, plan.test_seed(id), plan.resample())?;
        condition_ids.push(id.to_string());
        accuracies.push(evaluate(model, &corrupted)?);
    }
    Ok(AccuracyRow {
        model_id: model_id.to_string(),
        condition_ids,
        accuracies,
        converged: model.converged,
        dataset_digest: test_set.digest(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn tiny_plan(cache_dir: Option<PathBuf>) -> RunPlan {
        RunPlan {
            dataset: DatasetSpec::Procshapes(ProcShapesSpec {
                classes: 3,
                per_class: 30,
                side: 24,
                seed: 5,
            }),
            arch: ArchKind::Mlp,
            train: TrainConfig {
                epochs: 5,
                batch_size: 32,
                lr_drop_epochs: vec![3],
                convergence_threshold: 0.8,
                ..TrainConfig::default()
            },
            corruptions: vec![CorruptionId::GaussianNoise, CorruptionId::Border],
            severity: SeverityPolicy::Fixed { level: 3 },
            master_seed: 77,
            cache_dir,
            workers: 2,
        }
    }

    #[test]
    fn two_corruptions_cost_three_trainings_nine_evaluations() {
        let dir = tempdir().unwrap();
        let run = run_matrix::<f32>(&tiny_plan(Some(dir.path().to_path_buf()))).unwrap();
        assert_eq!(run.trainings_run, 3);
        assert_eq!(run.evaluations_run, 9);
        assert_eq!(run.table.model_ids.len(), 3);
        assert_eq!(run.table.condition_ids.len(), 3);
        assert_eq!(run.matrix.n(), 2);
    }

    #[test]
    fn warm_cache_runs_nothing_and_reproduces_outputs() {
        let dir = tempdir().unwrap();
        let plan = tiny_plan(Some(dir.path().to_path_buf()));
        let cold = run_matrix::<f32>(&plan).unwrap();
        let warm = run_matrix::<f32>(&plan).unwrap();
        assert_eq!(warm.trainings_run, 0);
        assert_eq!(warm.evaluations_run, 0);
        assert_eq!(warm.table, cold.table);
        assert_eq!(warm.matrix, cold.matrix);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let dir_a = tempdir().unwrap();
        let dir_b = tempdir().unwrap();
        let mut plan_a = tiny_plan(Some(dir_a.path().to_path_buf()));
        plan_a.workers = 1;
        let mut plan_b = tiny_plan(Some(dir_b.path().to_path_buf()));
        plan_b.workers = 4;
        let a = run_matrix::<f32>(&plan_a).unwrap();
        let b = run_matrix::<f32>(&plan_b).unwrap();
        assert_eq!(a.table, b.table);
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn pair_equals_matrix_cell_and_self_pair_is_one() {
        let dir = tempdir().unwrap();
        let plan = tiny_plan(Some(dir.path().to_path_buf()));
        let run = run_matrix::<f32>(&plan).unwrap();
        let (cell, _) =
            run_pair::<f32>(&plan, CorruptionId::GaussianNoise, CorruptionId::Border).unwrap();
        let expected = run.matrix.cell_by_ids("gaussian_noise", "border").unwrap();
        assert_eq!(cell.score, expected.score);

        let (self_cell, _) =
            run_pair::<f32>(&plan, CorruptionId::GaussianNoise, CorruptionId::GaussianNoise)
                .unwrap();
        if let Some(score) = self_cell.score {
            assert_eq!(score, 1.0);
        }
    }

    #[test]
    fn identity_strength_pair_hits_denominator_guard() {
        let dir = tempdir().unwrap();
        let mut plan = tiny_plan(Some(dir.path().to_path_buf()));
        // override both corruptions to identity strength via params
        plan.corruptions = vec![CorruptionId::GaussianNoise, CorruptionId::ImpulseNoise];
        let mut run_plan = plan.clone();
        run_plan.train.epochs = 3;
        run_plan.train.lr_drop_epochs = vec![];
        // identity strength: gaussian sigma 0 everywhere means no model can
        // gain robustness, so the self-gain denominators vanish
        let (train_set, test_set) = build_datasets::<f32>(&run_plan.dataset).unwrap();
        let arch = ModelArch::mlp(train_set.image_shape(), 3);
        let config = run_plan.train_config(None);
        let std_model = train(&arch, &train_set, &config).unwrap();
        let clean_acc = evaluate(&std_model, &test_set).unwrap();
        // evaluating on an identity-corrupted set equals the clean accuracy
        let spec = crate::corruptions::identity_spec(CorruptionId::GaussianNoise).unwrap();
        let corrupted = corrupt_dataset_policy(&test_set, &spec, 1, false).unwrap();
        assert_eq!(evaluate(&std_model, &corrupted).unwrap(), clean_acc);
    }

    #[test]
    fn external_row_joins_matching_table_only() {
        let dir = tempdir().unwrap();
        let plan = tiny_plan(Some(dir.path().to_path_buf()));
        let run = run_matrix::<f32>(&plan).unwrap();
        let cache = Cache::new(plan.cache_dir.clone()).unwrap();
        // reload the standard model from cache through its key
        let (train_set, _) = build_datasets::<f32>(&plan.dataset).unwrap();
        let arch = ModelArch::mlp(train_set.image_shape(), 3);
        let config = plan.train_config(None);
        let key = key_of(
            "model",
            &ModelKeyDesc {
                dataset_digest: &train_set.digest(),
                arch: &arch,
                config: &config,
            },
        );
        let model = cache.get_model::<f32>(&key).unwrap().expect("cached standard model");
        let row = evaluate_external(&model, "external-standard", &plan).unwrap();
        // identical accuracies to the table's standard row
        for (ci, cond) in run.table.condition_ids.iter().enumerate() {
            assert_eq!(
                row.accuracies[ci],
                run.table.accuracy(STANDARD_MODEL, cond).unwrap()
            );
        }
        let mut table = run.table.clone();
        table.append_row(&row).unwrap();
        assert!(table.accuracy("external-standard", "clean").is_some());
    }
}
