//! Bag-of-words codebook and the (histogram, mean, covariance) triplet.
//!
//! ```bash
//! cargo run --example descriptors
//! ```

use mfdh::descriptors::{build_multiviews, learn_dictionary};
use mfdh::synth::{generate, SynthConfig};

fn main() -> mfdh::Result<()> {
    let data = generate(&SynthConfig {
        train: 30,
        query: 0,
        ..Default::default()
    })?;

    // codebook over every local descriptor of every training image
    let dict = learn_dictionary(&data.train_image, 8, 42)?;
    println!("codebook: {} words of dimension {}", dict.k(), dict.dim());
    print!("{}", dict.to_csv().lines().take(2).collect::<Vec<_>>().join("\n"));
    println!("\n...");

    let views = build_multiviews(&data.train_image, &dict, 1e-6)?;
    for (set, mv) in data.train_image.iter().zip(&views).take(3) {
        println!(
            "{} ({} descriptors): histogram {:.2?}",
            set.sample_id(),
            set.count(),
            mv.histogram.as_slice()
        );
        println!("    mean {:.2?}", mv.mean.as_slice());
        println!(
            "    covariance diagonal {:.2?}",
            mv.covariance.diagonal().as_slice()
        );
    }
    Ok(())
}
