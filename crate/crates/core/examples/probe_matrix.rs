//! Temporary matrix probe (deleted before release).

use corrbench::corruptions::CorruptionId;
use corrbench::data::ProcShapesSpec;
use corrbench::pipeline::{run_matrix, DatasetSpec, RunPlan, SeverityPolicy};
use corrbench::trainer::{ArchKind, TrainConfig};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let kind = match args.get(1).map(|s| s.as_str()) {
        Some("cnn") => ArchKind::Cnn,
        _ => ArchKind::Mlp,
    };
    let master_seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(42);
    let ids: Vec<CorruptionId> = args
        .get(3)
        .map(|s| {
            s.split(',')
                .map(|t| t.parse().expect("corruption id"))
                .collect()
        })
        .unwrap_or_else(|| {
            vec![
                CorruptionId::GaussianNoise,
                CorruptionId::ShotNoise,
                CorruptionId::Border,
            ]
        });

    let plan = RunPlan {
        dataset: DatasetSpec::Procshapes(ProcShapesSpec::default()),
        arch: kind,
        train: TrainConfig::default(),
        corruptions: ids,
        severity: SeverityPolicy::Fixed { level: 3 },
        master_seed,
        cache_dir: Some(std::path::PathBuf::from("/tmp/probe-cache")),
        workers: 2,
    };
    let t0 = Instant::now();
    let run = run_matrix::<f32>(&plan).unwrap();
    println!("elapsed {:?}, trainings {}, evals {}", t0.elapsed(), run.trainings_run, run.evaluations_run);
    for w in &run.warnings {
        println!("warning: {w}");
    }
    println!("{}", run.table.to_csv());
    println!("{}", run.matrix.to_csv());
    for i in 0..run.matrix.n() {
        for j in 0..run.matrix.n() {
            let cell = run.matrix.cell(i, j);
            println!(
                "{} x {}: score {:?} pre_clamp {:?} ratios {:?}/{:?} [{:?}]",
                run.matrix.corruption_ids[i],
                run.matrix.corruption_ids[j],
                cell.score,
                cell.pre_clamp,
                cell.ratio_c2,
                cell.ratio_c1,
                cell.validity
            );
        }
    }
}
