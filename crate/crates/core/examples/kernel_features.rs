//! Anchor-based kernel features, including the log-Euclidean covariance view.
//!
//! ```bash
//! cargo run --example kernel_features
//! ```

use mfdh::descriptors::{build_multiviews, learn_dictionary};
use mfdh::kernel::{select_anchors, FeatureMap, KernelCombination};
use mfdh::spd::led_distance;
use mfdh::synth::{generate, SynthConfig};
use mfdh::Modality;

fn main() -> mfdh::Result<()> {
    let data = generate(&SynthConfig {
        train: 60,
        query: 0,
        ..Default::default()
    })?;
    let dict = learn_dictionary(&data.train_text, 6, 1)?;
    let views = build_multiviews(&data.train_text, &dict, 1e-6)?;

    // classes alternate, so samples 0 and 3 share a class and 0 and 1 do not
    let same = led_distance(&views[0].covariance, &views[3].covariance)?;
    let other = led_distance(&views[0].covariance, &views[1].covariance)?;
    println!("log-Euclidean distance: same class {same:.3}, different class {other:.3}");

    let anchors = select_anchors(&views, [5, 5, 5], 7)?;
    for mode in [1u8, 2, 6] {
        let map = FeatureMap {
            anchors: anchors.clone(),
            kernels: *KernelCombination::mode(mode)?.for_modality(Modality::Text),
            eta: [1.0, 1.0, 0.5],
        };
        let psi = map.matrix(&views)?;
        println!(
            "mode {mode}: {:?}, feature matrix {}x{}, sample 0 vs first anchor per view {:.3?}",
            map.kernels.map(|k| if k.is_rbf() { "rbf" } else { "poly" }),
            psi.nrows(),
            psi.ncols(),
            [psi[(0, 0)], psi[(5, 0)], psi[(10, 0)]]
        );
    }
    Ok(())
}
