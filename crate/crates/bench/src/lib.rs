//! Shared fixtures for the benchmarks: a trained desk-scale surrogate and
//! an evaluation batch.

use advrank_core::data::{gen_patterns, Dataset};
use advrank_core::losses::{logit_gradient, InterestSpec, LossKind};
use advrank_core::nn::{init_model, train, InitScheme, LogitVector, Model, TrainConfig};

pub struct Fixture {
    pub model: Model,
    pub data: Dataset,
}

pub fn trained_fixture() -> Fixture {
    let data = gen_patterns(10, 8, 30, 0.1, 7).expect("fixture dataset");
    let model = init_model(&[64, 32, 10], &InitScheme::kaiming_uniform(3)).expect("fixture model");
    let ce = |z: &LogitVector, label: usize| {
        logit_gradient(LossKind::Ce, z, &InterestSpec::non_targeted(label))
            .expect("training gradient")
    };
    let config = TrainConfig {
        epochs: 120,
        learning_rate: 0.1,
        batch_size: 32,
        weight_decay: 0.001,
        holdout_fraction: 0.2,
        seed: 5,
    };
    let (model, _) = train(&model, &data, &config, ce).expect("fixture training");
    Fixture { model, data }
}
