//! Temporary severity sweep probe (deleted before release).

use corrbench::corruptions::{CorruptionSpec, ALL_CORRUPTIONS};
use corrbench::data::{corrupt_dataset, generate_procshapes, ProcShapesSpec};
use corrbench::trainer::{evaluate, train, ModelArch, TrainConfig};

fn main() {
    let (train_set, test_set) = generate_procshapes::<f32>(&ProcShapesSpec::default()).unwrap();
    let arch = ModelArch::cnn(train_set.image_shape(), 10);
    let config = TrainConfig { seed: 99, ..TrainConfig::default() };
    let model = train(&arch, &train_set, &config).unwrap();
    let clean = evaluate(&model, &test_set).unwrap();
    println!("clean acc {clean:.4}");
    for id in ALL_CORRUPTIONS {
        let mut line = format!("{id:<16}");
        for severity in 1..=5u8 {
            let spec = CorruptionSpec::new(id, severity);
            let corrupted = corrupt_dataset(&test_set, &spec, 7).unwrap();
            let acc = evaluate(&model, &corrupted).unwrap();
            line.push_str(&format!(" s{severity}:{:.3}(R={:.2})", acc, acc / clean));
        }
        println!("{line}");
    }
}
