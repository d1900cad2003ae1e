//! End to end: synthetic pairs, training, model file, and all four retrieval
//! retrieval tasks.
//!
//! ```bash
//! cargo run --release --example cross_modal
//! ```

use mfdh::eval::{mean_average_precision, RelevanceJudge};
use mfdh::pipeline::{encode_sets, fit_model, FeatureConfig, TrainingSet};
use mfdh::synth::{generate, SynthConfig};
use mfdh::{KernelCombination, Modality, Model, Task, TrainConfig};

fn main() -> mfdh::Result<()> {
    let data = generate(&SynthConfig::default())?;
    let features = FeatureConfig {
        k_image: 16,
        k_text: 12,
        ..Default::default()
    };
    let (model, _) = fit_model(
        &TrainingSet::from_synth(&data),
        &features,
        &KernelCombination::default(),
        &TrainConfig::default(),
        7,
        String::new(),
    )?;

    let bytes = model.to_bytes()?;
    let model = Model::from_bytes(&bytes)?;
    println!("model file: {} bytes", bytes.len());

    for task in Task::ALL {
        let (qm, dm) = task.modalities();
        let pick = |m, query: bool| match (m, query) {
            (Modality::Image, true) => &data.query_image,
            (Modality::Text, true) => &data.query_text,
            (Modality::Image, false) => &data.train_image,
            (Modality::Text, false) => &data.train_text,
        };
        let q = encode_sets(&model, pick(qm, true), qm)?;
        let db = encode_sets(&model, pick(dm, false), dm)?;
        let judge = RelevanceJudge::infer(&data.labels.matrix_for(q.ids())?, &data.labels.matrix_for(db.ids())?)?;
        let map = mean_average_precision(q.codes(), &db, &judge, db.len())?;

        println!("{task}: MAP {map:.4} over {} queries, {} database items", q.len(), db.len());
    }
    Ok(())
}
