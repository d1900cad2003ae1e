mod common;

use mfdh::model::{encode_feature, MODEL_MAGIC};
use mfdh::pipeline::{fit_model, FeatureConfig, TrainingSet};
use mfdh::synth::{generate, SynthConfig};
use mfdh::{BinaryCode, KernelCombination, MfdhError, Modality, Model, TrainConfig};
use nalgebra::{DMatrix, DVector};

use common::*;

fn small_model(max_outer_iters: usize) -> (Model, TrainingSet) {
    let data = generate(&SynthConfig {
        train: 48,
        query: 6,
        ..Default::default()
    })
    .unwrap();
    let set = TrainingSet::from_synth(&data);
    let features = FeatureConfig {
        k_image: 6,
        k_text: 5,
        ..Default::default()
    };
    let train = TrainConfig {
        code_len: 70,
        max_outer_iters,
        ..Default::default()
    };
    let (model, _) = fit_model(
        &set,
        &features,
        &KernelCombination::mode(3).unwrap(),
        &train,
        11,
        "seed = 11\n# echo\n".into(),
    )
    .unwrap();
    (model, set)
}

#[test]
fn model_bytes_round_trip() {
    let (model, _) = small_model(4);
    let bytes = model.to_bytes().unwrap();
    assert!(bytes.starts_with(MODEL_MAGIC));
    let back = Model::from_bytes(&bytes).unwrap();
    assert_eq!(back, model);
    assert_eq!(back.to_bytes().unwrap(), bytes);
    assert_eq!(back.config_echo, "seed = 11\n# echo\n");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mfdh");
    model.save(&path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
    assert_eq!(Model::load(&path).unwrap(), model);
}

#[test]
fn corrupt_model_files_are_rejected() {
    let (model, _) = small_model(1);
    let bytes = model.to_bytes().unwrap();
    for cut in [0, 5, MODEL_MAGIC.len() + 3, bytes.len() / 2, bytes.len() - 1] {
        assert!(Model::from_bytes(&bytes[..cut]).is_err(), "truncated at {cut}");
    }
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(matches!(Model::from_bytes(&extra), Err(MfdhError::Format { .. })));
    let mut bad = bytes;
    bad[0] = b'X';
    assert!(Model::from_bytes(&bad).is_err());
}

#[test]
fn zero_iterations_keep_the_initialization() {
    let (model, _) = small_model(0);
    assert_eq!(model.state.objective_trace.len(), 1);
    assert_eq!(model.state.iterations(), 0);
    // B is still the seeded random start
    let again = small_model(0).0;
    assert_eq!(again.state.b, model.state.b);
}

#[test]
fn training_codes_are_signs_of_projected_features() {
    let (model, set) = small_model(6);
    let mvs: Vec<_> = set
        .image
        .iter()
        .map(|s| model.multiview(s, Modality::Image).unwrap())
        .collect();
    let psi = model.feature_map(Modality::Image).matrix(&mvs).unwrap();
    let proj = &model.state.p_img * &psi;
    let codes = model.encode_sets(&set.image, Modality::Image).unwrap();
    for (i, code) in codes.iter().enumerate() {
        let want = BinaryCode::from_signs(proj.column(i).iter().copied());
        assert_eq!(code, &want);
        assert_eq!(code, &model.encode(&mvs[i], Modality::Image).unwrap());
    }
    // on separable data almost every bit of sign(P psi_i) lands on B
    let differing: u32 = codes
        .iter()
        .enumerate()
        .map(|(i, c)| mfdh::index::hamming_distance(c, &model.training_code(i)).unwrap())
        .sum();
    let total = codes.len() * model.code_len();
    assert!(differing as usize * 20 <= total, "{differing} of {total} bits differ");
}

#[test]
fn encode_feature_signs() {
    let mut rng = rng(3);
    let x = DVector::from_column_slice(gaussian(9, 1, &mut rng).as_slice());
    let zero = DMatrix::zeros(70, 9);
    assert_eq!(encode_feature(&zero, &x).unwrap(), BinaryCode::from_signs([1.0; 70]));
    let p = gaussian(70, 9, &mut rng);
    let code = encode_feature(&p, &x).unwrap();
    assert_eq!(encode_feature(&(-&p), &x).unwrap(), code.complement());
    assert!(encode_feature(&p, &DVector::zeros(8)).is_err());
}

#[test]
fn encoding_rejects_wrong_dimensions() {
    let (model, _) = small_model(1);
    let wrong = mfdh::DescriptorSet::new("x", vec![vec![0.0; 3], vec![1.0; 3]]).unwrap();
    assert!(model.encode_sets(&[wrong], Modality::Image).is_err());
    assert!(model.encode_sets(&[], Modality::Text).unwrap().is_empty());
}
