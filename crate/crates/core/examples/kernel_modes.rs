//! The eight RBF/polynomial view assignments compared on synthetic data.
//!
//! ```bash
//! cargo run --release --example kernel_modes
//! ```

use mfdh::eval::{mean_average_precision, RelevanceJudge};
use mfdh::pipeline::{encode_sets, fit_model, FeatureConfig, TrainingSet};
use mfdh::synth::{generate, SynthConfig};
use mfdh::{KernelCombination, Modality, TrainConfig};

fn main() -> mfdh::Result<()> {
    let data = generate(&SynthConfig {
        separation: 1.0,
        ..Default::default()
    })?;
    let set = TrainingSet::from_synth(&data);
    let features = FeatureConfig {
        k_image: 16,
        k_text: 12,
        ..Default::default()
    };
    println!("mode  views(hist,mean,cov)  I2T     T2I");
    for mode in 1..=8u8 {
        let combo = KernelCombination::mode(mode)?;
        let (model, _) = fit_model(&set, &features, &combo, &TrainConfig::default(), 3, String::new())?;
        let mut maps = Vec::new();
        for (q, qm, db, dm) in [
            (&data.query_image, Modality::Image, &data.train_text, Modality::Text),
            (&data.query_text, Modality::Text, &data.train_image, Modality::Image),
        ] {
            let q = encode_sets(&model, q, qm)?;
            let db = encode_sets(&model, db, dm)?;
            let judge = RelevanceJudge::infer(&data.labels.matrix_for(q.ids())?, &data.labels.matrix_for(db.ids())?)?;
            maps.push(mean_average_precision(q.codes(), &db, &judge, db.len())?);
        }
        let kinds = combo.image.map(|k| if k.is_rbf() { "rbf" } else { "poly" });
        println!("{mode:4}  {:<22}{:.4}  {:.4}", kinds.join(","), maps[0], maps[1]);
    }
    Ok(())
}
