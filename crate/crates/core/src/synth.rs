//! Synthetic paired image/text data with well-separated classes.
//!
//! Every class owns a descriptor mean and a descriptor spread in each
//! modality. A sample draws a random number of local descriptors around its
//! class mean (plus a small per-sample offset), so all three views carry
//! class information: the histogram through where descriptors fall, the mean
//! directly, and the covariance through the class spread.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::descriptors::DescriptorSet;
use crate::error::{MfdhError, Result};
use crate::formats::LabelFile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub classes: usize,
    pub train: usize,
    pub query: usize,
    pub dim_image: usize,
    pub dim_text: usize,
    pub min_descriptors: usize,
    pub max_descriptors: usize,
    /// Distance between neighbouring class means, in units of descriptor noise.
    pub separation: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: 3,
            train: 300,
            query: 90,
            dim_image: 8,
            dim_text: 6,
            min_descriptors: 20,
            max_descriptors: 40,
            separation: 2.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub train_image: Vec<DescriptorSet>,
    pub train_text: Vec<DescriptorSet>,
    pub query_image: Vec<DescriptorSet>,
    pub query_text: Vec<DescriptorSet>,
    /// Labels for every train and query id.
    pub labels: LabelFile,
}

impl SynthData {
    pub fn train_ids(&self) -> Vec<String> {
        self.train_image.iter().map(|s| s.sample_id().to_string()).collect()
    }

    pub fn query_ids(&self) -> Vec<String> {
        self.query_image.iter().map(|s| s.sample_id().to_string()).collect()
    }
}

struct ClassModel {
    means: Vec<Vec<f64>>,
    spreads: Vec<Vec<f64>>,
}

impl ClassModel {
    fn new(classes: usize, dim: usize, separation: f64, rng: &mut ChaCha8Rng) -> Self {
        let means = (0..classes)
            .map(|c| {
                (0..dim)
                    .map(|j| {
                        let axis = if j % classes == c { separation } else { 0.0 };
                        let z: f64 = StandardNormal.sample(rng);
                        axis + 0.25 * z
                    })
                    .collect()
            })
            .collect();
        // per-class, per-axis standard deviations; classes differ in shape
        let spreads = (0..classes)
            .map(|c| {
                (0..dim)
                    .map(|j| if (j + c) % classes == 0 { 1.6 } else { 0.6 })
                    .collect()
            })
            .collect();
        Self { means, spreads }
    }

    fn sample(&self, id: &str, class: usize, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<DescriptorSet> {
        let count = rng.random_range(cfg.min_descriptors..=cfg.max_descriptors);
        let mean = &self.means[class];
        let spread = &self.spreads[class];
        let jitter = Normal::new(0.0, 0.1).expect("valid normal");
        let offset: Vec<f64> = mean.iter().map(|m| m + jitter.sample(rng)).collect();
        let mut data = Vec::with_capacity(count * mean.len());
        for _ in 0..count {
            for (o, s) in offset.iter().zip(spread) {
                let z: f64 = StandardNormal.sample(rng);
                data.push(o + s * z);
            }
        }
        DescriptorSet::from_flat(id, mean.len(), data)
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    if cfg.classes == 0 || cfg.train == 0 || cfg.dim_image == 0 || cfg.dim_text == 0 {
        return Err(MfdhError::invalid("synthetic classes, train size and dims must be >= 1"));
    }
    if cfg.min_descriptors < 2 || cfg.min_descriptors > cfg.max_descriptors {
        return Err(MfdhError::invalid("need 2 <= min_descriptors <= max_descriptors"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let img = ClassModel::new(cfg.classes, cfg.dim_image, cfg.separation, &mut rng);
    let txt = ClassModel::new(cfg.classes, cfg.dim_text, cfg.separation, &mut rng);

    let mut labels = Vec::with_capacity(cfg.train + cfg.query);
    let mut split = |prefix: &str, n: usize, rng: &mut ChaCha8Rng| -> Result<(Vec<DescriptorSet>, Vec<DescriptorSet>)> {
        let mut image = Vec::with_capacity(n);
        let mut text = Vec::with_capacity(n);
        for i in 0..n {
            let class = i % cfg.classes;
            let id = format!("{prefix}-{i:05}");
            image.push(img.sample(&id, class, cfg, rng)?);
            text.push(txt.sample(&id, class, cfg, rng)?);
            labels.push((id, vec![class]));
        }
        Ok((image, text))
    };
    let (train_image, train_text) = split("train", cfg.train, &mut rng)?;
    let (query_image, query_text) = split("query", cfg.query, &mut rng)?;
    Ok(SynthData {
        train_image,
        train_text,
        query_image,
        query_text,
        labels: LabelFile {
            num_classes: cfg.classes,
            entries: labels,
        },
    })
}
