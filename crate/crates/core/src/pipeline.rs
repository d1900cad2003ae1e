//! End-to-end stages behind the `mfdh` binary: configuration, training,
//! encoding, search and evaluation, each reading and writing plain files so
//! intermediate artifacts can be inspected or replaced.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::descriptors::{build_multiviews, learn_dictionary, DescriptorSet, DEFAULT_EPS_SPD};
use crate::error::{MfdhError, Result};
use crate::eval::{mean_average_precision, pr_curve, MetricsReport, RelevanceJudge, Task};
use crate::formats::{self, LabelFile};
use crate::index::HammingIndex;
use crate::kernel::{
    build_anchors, default_anchor_count, validate_eta, AnchorStrategy, FeatureMap, KernelCombination,
    NUM_VIEWS,
};
use crate::model::{Model, ModalityParts, ModelSettings};
use crate::optimizer::{train, TrainConfig};
use crate::synth::{SynthConfig, SynthData};
use crate::Modality;

pub const MODEL_FILE: &str = "model.mfdh";
pub const REPORT_FILE: &str = "train_report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub image_descriptors: PathBuf,
    pub text_descriptors: PathBuf,
    pub labels: PathBuf,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub k_image: usize,
    pub k_text: usize,
    pub eps_spd: f64,
    /// Anchors per view; defaults to `min(500, max(1, n / 16))` each.
    pub anchors: Option<[usize; NUM_VIEWS]>,
    pub anchor_strategy: AnchorStrategy,
    /// One of the eight numbered kernel assignments; overrides `[kernels]`.
    pub kernel_mode: Option<u8>,
    pub eta_image: [f64; NUM_VIEWS],
    pub eta_text: [f64; NUM_VIEWS],
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            k_image: 500,
            k_text: 100,
            eps_spd: DEFAULT_EPS_SPD,
            anchors: None,
            anchor_strategy: AnchorStrategy::Random,
            kernel_mode: None,
            eta_image: [1.0; NUM_VIEWS],
            eta_text: [1.0; NUM_VIEWS],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub tasks: Vec<Task>,
    /// Ranking depth for MAP; 0 means the whole database.
    pub top_r: usize,
    pub radii: Vec<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tasks: vec![Task::I2T, Task::T2I],
            top_r: 0,
            radii: vec![2],
        }
    }
}

/// The declarative run configuration (TOML).
///
/// `seed` drives the dictionary, anchor selection and code initialization;
/// any `seed` inside `[train]` is replaced by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub paths: PathsConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub kernels: KernelCombination,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalConfig,
}

impl RunConfig {
    /// Parses and validates; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| MfdhError::Config(e.to_string()))?;
        for p in [
            &mut cfg.paths.image_descriptors,
            &mut cfg.paths.text_descriptors,
            &mut cfg.paths.labels,
            &mut cfg.paths.output_dir,
        ] {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; returns it with its verbatim text.
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, String)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| MfdhError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Ok((Self::parse(&text, base)?, text))
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.features;
        if f.k_image == 0 || f.k_text == 0 {
            return Err(MfdhError::Config("dictionary sizes must be >= 1".into()));
        }
        if !(f.eps_spd >= 0.0 && f.eps_spd.is_finite()) {
            return Err(MfdhError::Config("eps_spd must be finite and >= 0".into()));
        }
        if let Some(a) = f.anchors {
            if a.contains(&0) {
                return Err(MfdhError::Config("anchor counts must be >= 1".into()));
            }
        }
        validate_eta(&f.eta_image).map_err(|e| MfdhError::Config(e.to_string()))?;
        validate_eta(&f.eta_text).map_err(|e| MfdhError::Config(e.to_string()))?;
        self.kernel_combination()?
            .validate()
            .map_err(|e| MfdhError::Config(e.to_string()))?;
        self.train
            .validate()
            .map_err(|e| MfdhError::Config(e.to_string()))?;
        for p in [
            &self.paths.image_descriptors,
            &self.paths.text_descriptors,
            &self.paths.labels,
        ] {
            if !p.exists() {
                return Err(MfdhError::Config(format!("path {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn kernel_combination(&self) -> Result<KernelCombination> {
        match self.features.kernel_mode {
            Some(m) => KernelCombination::mode(m).map_err(|e| MfdhError::Config(e.to_string())),
            None => Ok(self.kernels.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub samples: usize,
    pub feature_len: usize,
    pub code_len: usize,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub wall_time_secs: f64,
    pub config_echo: String,
}

/// Paired training data aligned by sample id.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub ids: Vec<String>,
    pub image: Vec<DescriptorSet>,
    pub text: Vec<DescriptorSet>,
    pub labels: LabelFile,
}

impl TrainingSet {
    /// Pairs image and text sets by id, in the image file's order.
    pub fn pair(image: Vec<DescriptorSet>, text: Vec<DescriptorSet>, labels: LabelFile) -> Result<Self> {
        if image.len() != text.len() {
            return Err(MfdhError::invalid(format!(
                "{} image samples but {} text samples",
                image.len(),
                text.len()
            )));
        }
        let mut by_id: HashMap<String, DescriptorSet> =
            text.into_iter().map(|s| (s.sample_id().to_string(), s)).collect();
        let mut paired = Vec::with_capacity(image.len());
        for s in &image {
            let t = by_id
                .remove(s.sample_id())
                .ok_or_else(|| MfdhError::invalid(format!("image sample '{}' has no text", s.sample_id())))?;
            paired.push(t);
        }
        Ok(Self {
            ids: image.iter().map(|s| s.sample_id().to_string()).collect(),
            image,
            text: paired,
            labels,
        })
    }

    pub fn from_synth(data: &SynthData) -> Self {
        Self {
            ids: data.train_ids(),
            image: data.train_image.clone(),
            text: data.train_text.clone(),
            labels: data.labels.clone(),
        }
    }

    pub fn load(paths: &PathsConfig) -> Result<Self> {
        Self::pair(
            formats::read_descriptors(&paths.image_descriptors)?,
            formats::read_descriptors(&paths.text_descriptors)?,
            LabelFile::read(&paths.labels)?,
        )
    }
}

/// Learns dictionaries and anchors, builds the kernel matrices, and trains.
pub fn fit_model(
    data: &TrainingSet,
    features: &FeatureConfig,
    kernels: &KernelCombination,
    train_cfg: &TrainConfig,
    seed: u64,
    config_echo: String,
) -> Result<(Model, TrainReport)> {
    let started = Instant::now();
    kernels.validate()?;
    let n = data.ids.len();
    if n == 0 {
        return Err(MfdhError::invalid("training set is empty"));
    }
    let labels = data.labels.matrix_for(&data.ids)?;
    let counts = features
        .anchors
        .unwrap_or([default_anchor_count(n); NUM_VIEWS]);
    let anchor_seed = seed.wrapping_add(1);

    let mut parts = Vec::with_capacity(2);
    let mut mats = Vec::with_capacity(2);
    for (modality, sets, k, eta) in [
        (Modality::Image, &data.image, features.k_image, features.eta_image),
        (Modality::Text, &data.text, features.k_text, features.eta_text),
    ] {
        let dictionary = learn_dictionary(sets, k, seed)?;
        let mvs = build_multiviews(sets, &dictionary, features.eps_spd)?;
        let anchors = build_anchors(&mvs, counts, features.anchor_strategy, anchor_seed)?;
        let map = FeatureMap {
            anchors,
            kernels: *kernels.for_modality(modality),
            eta,
        };
        mats.push(map.matrix(&mvs)?);
        parts.push(ModalityParts {
            dictionary,
            anchors: map.anchors,
        });
    }

    let train_cfg = TrainConfig {
        seed,
        ..train_cfg.clone()
    };
    let state = train(&mats[0], &mats[1], &labels, &train_cfg)?;
    let text = parts.pop().expect("text");
    let image = parts.pop().expect("image");
    let report = TrainReport {
        samples: n,
        feature_len: state.feature_len(),
        code_len: state.code_len(),
        iterations: state.iterations(),
        objective_trace: state.objective_trace.clone(),
        wall_time_secs: started.elapsed().as_secs_f64(),
        config_echo: config_echo.clone(),
    };
    let model = Model {
        state,
        image,
        text,
        settings: ModelSettings {
            kernels: kernels.clone(),
            eta_image: features.eta_image,
            eta_text: features.eta_text,
            eps_spd: features.eps_spd,
            anchor_strategy: features.anchor_strategy,
            train: train_cfg,
        },
        config_echo,
    };
    Ok((model, report))
}

/// `train` stage: config in, model file and report out.
pub fn run_train(cfg: &RunConfig, config_text: &str, out_dir: Option<&Path>) -> Result<(PathBuf, TrainReport)> {
    let data = TrainingSet::load(&cfg.paths)?;
    let (model, report) = fit_model(
        &data,
        &cfg.features,
        &cfg.kernel_combination()?,
        &cfg.train,
        cfg.seed,
        config_text.to_string(),
    )?;
    let dir = out_dir.unwrap_or(&cfg.paths.output_dir);
    std::fs::create_dir_all(dir)?;
    let model_path = dir.join(MODEL_FILE);
    model.save(&model_path)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(dir.join(REPORT_FILE), json + "\n")?;
    Ok((model_path, report))
}

/// Encodes descriptor sets into an index keyed by sample id.
pub fn encode_sets(model: &Model, sets: &[DescriptorSet], modality: Modality) -> Result<HammingIndex> {
    let codes = model.encode_sets(sets, modality)?;
    HammingIndex::from_codes(
        model.code_len(),
        sets.iter().map(|s| s.sample_id().to_string()).zip(codes),
    )
}

pub fn run_encode(model_path: &Path, descriptors: &Path, modality: Modality, out: &Path) -> Result<usize> {
    let model = Model::load(model_path)?;
    let sets = formats::read_descriptors(descriptors)?;
    let idx = encode_sets(&model, &sets, modality)?;
    std::fs::write(out, formats::write_codes_annotated(&idx, &model.config_echo)?)?;
    Ok(idx.len())
}

/// Ranked (`top_r`) or radius search of every query; TSV rows
/// `query_id  rank  db_id  distance`.
pub fn run_search(queries: &HammingIndex, db: &HammingIndex, top_r: Option<usize>, radius: Option<usize>) -> Result<String> {
    let mut out = String::from("query_id\trank\tdb_id\tdistance\n");
    for (qid, q) in queries.iter() {
        let hits: Vec<(usize, u32)> = match (top_r, radius) {
            (_, Some(r)) => {
                let d = db.distances(q)?;
                let mut within: Vec<(usize, u32)> =
                    db.within(q, r)?.into_iter().map(|p| (p, d[p])).collect();
                within.sort_by_key(|&(p, dist)| (dist, p));
                within
            }
            (Some(k), None) => db.rank(q, k)?,
            (None, None) => db.rank(q, db.len().max(1))?,
        };
        for (rank, (p, dist)) in hits.into_iter().enumerate() {
            out.push_str(&format!("{qid}\t{}\t{}\t{dist}\n", rank + 1, db.ids()[p]));
        }
    }
    Ok(out)
}

/// MAP at depth `top_r` (0 = whole database) plus the radius-lookup curve.
pub fn evaluate(
    task: Task,
    queries: &HammingIndex,
    db: &HammingIndex,
    labels: &LabelFile,
    top_r: usize,
    config_echo: String,
) -> Result<MetricsReport> {
    let ql = labels.matrix_for(queries.ids())?;
    let dl = labels.matrix_for(db.ids())?;
    let judge = RelevanceJudge::infer(&ql, &dl)?;
    let r = if top_r == 0 { db.len().max(1) } else { top_r };
    let map = mean_average_precision(queries.codes(), db, &judge, r)?;
    let curve = pr_curve(queries.codes(), db, &judge)?;
    Ok(MetricsReport {
        task,
        code_len: db.code_len(),
        top_r: r.min(db.len()),
        map,
        relevance: judge.mode(),
        pr_curve: curve.points,
        config_echo,
    })
}

/// Writes a synthetic dataset and a ready-to-run config into `dir`.
pub fn write_synthetic(dir: &Path, cfg: &SynthConfig) -> Result<PathBuf> {
    let data = crate::synth::generate(cfg)?;
    std::fs::create_dir_all(dir)?;
    let files = [
        ("train_image.desc", formats::write_descriptors(&data.train_image, cfg.dim_image)?),
        ("train_text.desc", formats::write_descriptors(&data.train_text, cfg.dim_text)?),
        ("query_image.desc", formats::write_descriptors(&data.query_image, cfg.dim_image)?),
        ("query_text.desc", formats::write_descriptors(&data.query_text, cfg.dim_text)?),
        ("labels.txt", data.labels.to_text()?),
        ("config.toml", synthetic_config_text(cfg)),
    ];
    for (name, body) in files {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(dir.join("config.toml"))
}

/// Config for a synthetic dataset. Dictionary sizes scale with the data;
/// everything else keeps its defaults.
pub fn synthetic_config_text(cfg: &SynthConfig) -> String {
    format!(
        r#"seed = {seed}

[paths]
image_descriptors = "train_image.desc"
text_descriptors = "train_text.desc"
labels = "labels.txt"
output_dir = "out"

[features]
k_image = 16
k_text = 12

[train]
code_len = 16
"#,
        seed = cfg.seed
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_paths() {
        let dir = tempfile::tempdir().unwrap();
        for f in ["a.desc", "b.desc", "l.txt"] {
            std::fs::write(dir.path().join(f), "").unwrap();
        }
        let text = r#"
seed = 3
[paths]
image_descriptors = "a.desc"
text_descriptors = "b.desc"
labels = "l.txt"
output_dir = "out"
[features]
kernel_mode = 8
"#;
        let cfg = RunConfig::parse(text, dir.path()).unwrap();
        assert_eq!(cfg.paths.labels, dir.path().join("l.txt"));
        assert_eq!(cfg.train, TrainConfig::default());
        assert_eq!(cfg.kernel_combination().unwrap(), KernelCombination::mode(8).unwrap());
        assert_eq!(cfg.eval.tasks, vec![Task::I2T, Task::T2I]);
    }

    #[test]
    fn config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let base = |extra: &str| {
            format!(
                "[paths]\nimage_descriptors = \"x\"\ntext_descriptors = \"x\"\nlabels = \"x\"\noutput_dir = \"o\"\n{extra}"
            )
        };
        std::fs::write(dir.path().join("x"), "").unwrap();
        assert!(RunConfig::parse(&base(""), dir.path()).is_ok());
        for bad in [
            "[train]\nalpha = -1.0\n",
            "[features]\nk_image = 0\n",
            "[features]\nkernel_mode = 12\n",
            "[features]\nanchors = [1, 0, 1]\n",
            "[bogus]\n",
            "[kernels]\nimage = [{kind = \"rbf\", sigma = 0.0}, {kind = \"rbf\"}, {kind = \"rbf\"}]\ntext = [{kind = \"rbf\", sigma = 0.0}, {kind = \"rbf\"}, {kind = \"rbf\"}]\n",
        ] {
            let err = RunConfig::parse(&base(bad), dir.path()).unwrap_err();
            assert!(matches!(err, MfdhError::Config(_)), "{bad}: {err}");
        }
        let missing = "[paths]\nimage_descriptors = \"nope\"\ntext_descriptors = \"x\"\nlabels = \"x\"\noutput_dir = \"o\"\n";
        assert!(RunConfig::parse(missing, dir.path()).is_err());
    }

    #[test]
    fn pairing_by_id() {
        let a = DescriptorSet::new("a", vec![vec![1.0]]).unwrap();
        let b = DescriptorSet::new("b", vec![vec![2.0]]).unwrap();
        let lf = LabelFile {
            num_classes: 1,
            entries: vec![],
        };
        let t = TrainingSet::pair(vec![a.clone(), b.clone()], vec![b.clone(), a.clone()], lf.clone()).unwrap();
        assert_eq!(t.text[0].sample_id(), "a");
        assert!(TrainingSet::pair(vec![a.clone()], vec![b], lf).is_err());
    }
}
