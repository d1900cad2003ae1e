#![allow(dead_code)]

use mfdh::descriptors::MultiViewDescriptor;
use mfdh::LabelMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn signs(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 })
}

/// `A A^T / d + floor I` with Gaussian `A`.
pub fn random_spd(d: usize, floor: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = gaussian(d, d, rng);
    let mut c = &a * a.transpose() / d as f64;
    for i in 0..d {
        c[(i, i)] += floor;
    }
    (&c + c.transpose()) * 0.5
}

/// Random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    gaussian(d, d, rng).qr().q()
}

/// Random labels: every sample gets one class, plus extra ones when `multi`.
pub fn random_labels(c: usize, n: usize, multi: bool, rng: &mut ChaCha8Rng) -> LabelMatrix {
    let sets: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let mut l = vec![rng.random_range(0..c)];
            if multi {
                for j in 0..c {
                    if rng.random_bool(0.3) {
                        l.push(j);
                    }
                }
            }
            l.sort_unstable();
            l.dedup();
            l
        })
        .collect();
    LabelMatrix::from_label_sets(c, &sets).unwrap()
}

/// Class-structured kernel-like features: a class mean plus noise per column.
pub fn class_features(classes: &[usize], d: usize, noise: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let c = classes.iter().max().map_or(1, |m| m + 1);
    let means = gaussian(d, c, rng);
    let mut x = gaussian(d, classes.len(), rng) * noise;
    for (i, &k) in classes.iter().enumerate() {
        let col = x.column(i) + means.column(k);
        x.set_column(i, &col);
    }
    x
}

pub fn random_multiview(k: usize, d: usize, rng: &mut ChaCha8Rng) -> MultiViewDescriptor {
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    MultiViewDescriptor {
        histogram: DVector::from_iterator(k, raw.iter().map(|v| v / total)),
        mean: DVector::from_fn(d, |_, _| StandardNormal.sample(rng)),
        covariance: random_spd(d, 0.2, rng),
    }
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
