//! Learning codes, projections and the classifier from kernel features.
//!
//! ```bash
//! cargo run --release --example train_codes
//! ```

use mfdh::pipeline::{fit_model, FeatureConfig, TrainingSet};
use mfdh::synth::{generate, SynthConfig};
use mfdh::{KernelCombination, TrainConfig};

fn main() -> mfdh::Result<()> {
    let data = generate(&SynthConfig::default())?;
    let set = TrainingSet::from_synth(&data);
    let features = FeatureConfig {
        k_image: 16,
        k_text: 12,
        ..Default::default()
    };
    let cfg = TrainConfig {
        code_len: 16,
        ..Default::default()
    };
    let (model, report) = fit_model(&set, &features, &KernelCombination::default(), &cfg, 7, String::new())?;

    println!(
        "n={} D={} L={}: {} iterations in {:.2}s",
        report.samples, report.feature_len, report.code_len, report.iterations, report.wall_time_secs
    );
    for (i, f) in report.objective_trace.iter().enumerate() {
        println!("  iter {i:2}  objective {f:.4}");
    }
    for i in 0..6 {
        println!("{}  {}", set.ids[i], model.training_code(i).to_hex());
    }
    Ok(())
}
