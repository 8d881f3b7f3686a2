//! Temporary training probe (deleted before release).

use corrbench::data::{generate_procshapes, ProcShapesSpec};
use corrbench::trainer::{evaluate, train, ArchKind, ModelArch, TrainConfig};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let classes: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let per_class: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(30);
    let side: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(24);
    let epochs: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(15);
    let batch: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(128);
    let lr0: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let kind = match args.get(7).map(|s| s.as_str()) {
        Some("cnn") => ArchKind::Cnn,
        _ => ArchKind::Mlp,
    };

    let spec = ProcShapesSpec { classes, per_class, side, seed: 7 };
    let t0 = Instant::now();
    let (train_set, test_set) = generate_procshapes::<f32>(&spec).unwrap();
    println!("dataset: {} train, {} test, {:?} gen", train_set.len(), test_set.len(), t0.elapsed());

    let drops = vec![epochs * 8 / 15, epochs * 12 / 15];
    let config = TrainConfig {
        epochs,
        batch_size: batch,
        lr0,
        lr_drop_epochs: drops,
        seed: 1,
        ..TrainConfig::default()
    };
    let arch = ModelArch::of_kind(kind, train_set.image_shape(), classes);
    let t1 = Instant::now();
    let model = train(&arch, &train_set, &config).unwrap();
    let train_time = t1.elapsed();
    let acc = evaluate(&model, &test_set).unwrap();
    println!(
        "{kind:?}: train acc {:.4}, test acc {acc:.4}, converged {}, {train_time:?}",
        model.final_train_accuracy, model.converged
    );
    println!("losses: {:?}", model.epoch_losses.iter().map(|l| (l * 100.0).round() / 100.0).collect::<Vec<_>>());
}
