//! Anchor-based kernel feature maps over the three statistical views.
//!
//! Each view of a sample is compared against `d_r` anchor samples of the same
//! view. The histogram and mean views live in Euclidean space. The covariance
//! view is compared through its matrix logarithm, so both the RBF distance and
//! the polynomial inner product are taken in the log-Euclidean embedding. The
//! three per-view response blocks, scaled by the view weights, are stacked
//! into one feature column of length `D = d_0 + d_1 + d_2`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptors::MultiViewDescriptor;
use crate::error::{check_dim, MfdhError, Result};
use crate::kmeans;
use crate::spd::log_map;
use crate::Modality;

pub const NUM_VIEWS: usize = 3;

pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_POLY_OFFSET: f64 = 1.0;
pub const DEFAULT_POLY_DEGREE: u32 = 5;

/// Upper bound on the default number of anchors per view.
pub const DEFAULT_MAX_ANCHORS: usize = 500;

/// Default anchors per view for `n` training samples: `min(500, max(1, n / 16))`.
///
/// With `3 d_r` close to `n` the projections can reproduce any code matrix and
/// training stalls at its random start, so the default keeps `D` well below `n`.
pub fn default_anchor_count(n: usize) -> usize {
    (n / 16).clamp(1, DEFAULT_MAX_ANCHORS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelFunctionSpec {
    /// `exp(-d^2 / (2 sigma^2))`
    Rbf {
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    /// `(<x, y> + a)^s`
    Polynomial {
        #[serde(default = "default_offset")]
        a: f64,
        #[serde(default = "default_degree")]
        s: u32,
    },
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}
fn default_offset() -> f64 {
    DEFAULT_POLY_OFFSET
}
fn default_degree() -> u32 {
    DEFAULT_POLY_DEGREE
}

impl KernelFunctionSpec {
    pub const fn rbf(sigma: f64) -> Self {
        KernelFunctionSpec::Rbf { sigma }
    }

    pub const fn polynomial(a: f64, s: u32) -> Self {
        KernelFunctionSpec::Polynomial { a, s }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelFunctionSpec::Rbf { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                MfdhError::invalid(format!("RBF bandwidth must be finite and > 0, got {sigma}")),
            ),
            KernelFunctionSpec::Polynomial { a, .. } if !a.is_finite() => {
                Err(MfdhError::invalid("polynomial offset must be finite"))
            }
            KernelFunctionSpec::Polynomial { s: 0, .. } => {
                Err(MfdhError::invalid("polynomial degree must be >= 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_rbf(&self) -> bool {
        matches!(self, KernelFunctionSpec::Rbf { .. })
    }
}

impl Default for KernelFunctionSpec {
    fn default() -> Self {
        KernelFunctionSpec::rbf(DEFAULT_SIGMA)
    }
}

/// Per-view kernel choice for both modalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelCombination {
    pub image: [KernelFunctionSpec; NUM_VIEWS],
    pub text: [KernelFunctionSpec; NUM_VIEWS],
    /// Require image and text to use the same kernel for each view.
    #[serde(default = "default_true")]
    pub shared: bool,
}

fn default_true() -> bool {
    true
}

impl KernelCombination {
    pub fn shared(views: [KernelFunctionSpec; NUM_VIEWS]) -> Self {
        Self {
            image: views,
            text: views,
            shared: true,
        }
    }

    /// One of the eight RBF/polynomial assignments, numbered 1..=8.
    ///
    /// Mode 1 is RBF on every view, mode 2 polynomial on every view, modes
    /// 3..=5 put RBF on two views ({0,1}, {0,2}, {1,2}), modes 6..=8 put RBF on
    /// exactly one view (0, 1, 2). Default hyperparameters are used.
    pub fn mode(mode: u8) -> Result<Self> {
        let rbf_views: &[usize] = match mode {
            1 => &[0, 1, 2],
            2 => &[],
            3 => &[0, 1],
            4 => &[0, 2],
            5 => &[1, 2],
            6 => &[0],
            7 => &[1],
            8 => &[2],
            _ => return Err(MfdhError::invalid(format!("kernel mode {mode} is not in 1..=8"))),
        };
        let mut views = [KernelFunctionSpec::polynomial(DEFAULT_POLY_OFFSET, DEFAULT_POLY_DEGREE);
            NUM_VIEWS];
        for &r in rbf_views {
            views[r] = KernelFunctionSpec::rbf(DEFAULT_SIGMA);
        }
        Ok(Self::shared(views))
    }

    pub fn for_modality(&self, modality: Modality) -> &[KernelFunctionSpec; NUM_VIEWS] {
        match modality {
            Modality::Image => &self.image,
            Modality::Text => &self.text,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for spec in self.image.iter().chain(&self.text) {
            spec.validate()?;
        }
        if self.shared && self.image != self.text {
            return Err(MfdhError::invalid(
                "shared kernel combination requires identical image and text kernels per view",
            ));
        }
        Ok(())
    }
}

impl Default for KernelCombination {
    fn default() -> Self {
        Self::shared([KernelFunctionSpec::default(); NUM_VIEWS])
    }
}

/// Evaluates one kernel between two points of the same view.
///
/// Covariance-view points must already be log-mapped and flattened; the
/// Euclidean geometry of the flattened log-maps is the log-Euclidean one.
pub fn kernel_eval(spec: &KernelFunctionSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim("kernel arguments", x.len(), y.len())?;
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(MfdhError::invalid("kernel argument has a non-finite entry"));
    }
    Ok(eval_unchecked(spec, x, y))
}

/// Kernel between two SPD matrices through their matrix logarithms.
pub fn kernel_eval_spd(spec: &KernelFunctionSpec, c1: &DMatrix<f64>, c2: &DMatrix<f64>) -> Result<f64> {
    let l1 = log_map(c1)?;
    let l2 = log_map(c2)?;
    kernel_eval(spec, l1.as_slice(), l2.as_slice())
}

#[inline]
fn eval_unchecked(spec: &KernelFunctionSpec, x: &[f64], y: &[f64]) -> f64 {
    match *spec {
        KernelFunctionSpec::Rbf { sigma } => {
            let d2 = kmeans::sq_dist(x, y);
            (-d2 / (2.0 * sigma * sigma)).exp()
        }
        KernelFunctionSpec::Polynomial { a, s } => {
            let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
            (dot + a).powi(s as i32)
        }
    }
}

/// Anchor samples for each view, stored in the representation the kernel sees:
/// histograms and means as vectors, covariances as flattened log-maps.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    views: [ViewAnchors; NUM_VIEWS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewAnchors {
    /// Length of one anchor in this view (k, d_mod or d_mod^2).
    pub width: usize,
    /// Row-major `count * width`.
    pub data: Vec<f64>,
    /// Training-sample indices, when anchors were drawn from the samples.
    pub source: Option<Vec<usize>>,
}

impl ViewAnchors {
    pub fn count(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnchorStrategy {
    /// Uniform sampling without replacement.
    #[default]
    Random,
    /// k-means centers of each view (log-Euclidean means for covariances).
    KMeans,
}

/// A sample's three views in kernel representation.
struct ViewPoints {
    histogram: Vec<f64>,
    mean: Vec<f64>,
    log_cov: Vec<f64>,
}

impl ViewPoints {
    fn from_descriptor(mv: &MultiViewDescriptor) -> Result<Self> {
        if mv.histogram.iter().chain(mv.mean.iter()).any(|v| !v.is_finite()) {
            return Err(MfdhError::invalid("descriptor has a non-finite entry"));
        }
        check_dim("covariance rows", mv.mean.len(), mv.covariance.nrows())?;
        Ok(Self {
            histogram: mv.histogram.as_slice().to_vec(),
            mean: mv.mean.as_slice().to_vec(),
            log_cov: log_map(&mv.covariance)?.as_slice().to_vec(),
        })
    }

    fn view(&self, r: usize) -> &[f64] {
        match r {
            0 => &self.histogram,
            1 => &self.mean,
            _ => &self.log_cov,
        }
    }
}

impl AnchorSet {
    /// Builds an anchor set from explicit per-view anchors. Covariance-view
    /// anchors are flattened symmetric log-maps of size `d_mod^2`.
    pub fn from_views(views: [ViewAnchors; NUM_VIEWS]) -> Result<Self> {
        for (r, v) in views.iter().enumerate() {
            if v.width == 0 || v.data.is_empty() || v.data.len() % v.width != 0 {
                return Err(MfdhError::invalid(format!("view {r} anchors are empty or ragged")));
            }
            if v.data.iter().any(|x| !x.is_finite()) {
                return Err(MfdhError::invalid(format!("view {r} anchor is non-finite")));
            }
        }
        let d = (views[2].width as f64).sqrt() as usize;
        if d * d != views[2].width {
            return Err(MfdhError::invalid("covariance anchors must be square"));
        }
        check_dim("covariance anchor side", views[1].width, d)?;
        for a in views[2].iter() {
            let m = DMatrix::from_column_slice(d, d, a);
            if (&m - m.transpose()).amax() > 1e-10 * m.amax().max(1.0) {
                return Err(MfdhError::invalid("covariance anchor log-map is not symmetric"));
            }
        }
        Ok(Self { views })
    }

    /// Uses every sample, in order, as an anchor of every view.
    pub fn from_samples(samples: &[MultiViewDescriptor]) -> Result<Self> {
        let all: Vec<usize> = (0..samples.len()).collect();
        let points = to_points(samples)?;
        Self::from_indices(&points, [all.clone(), all.clone(), all])
    }

    fn from_indices(points: &[ViewPoints], idx: [Vec<usize>; NUM_VIEWS]) -> Result<Self> {
        let views = std::array::from_fn(|r| {
            let width = points[0].view(r).len();
            let mut data = Vec::with_capacity(width * idx[r].len());
            for &i in &idx[r] {
                data.extend_from_slice(points[i].view(r));
            }
            ViewAnchors {
                width,
                data,
                source: Some(idx[r].clone()),
            }
        });
        Self::from_views(views)
    }

    pub fn view(&self, r: usize) -> &ViewAnchors {
        &self.views[r]
    }

    pub fn counts(&self) -> [usize; NUM_VIEWS] {
        std::array::from_fn(|r| self.views[r].count())
    }

    /// Total stacked feature length `D`.
    pub fn feature_len(&self) -> usize {
        self.counts().iter().sum()
    }

    /// Histogram length `k`.
    pub fn histogram_len(&self) -> usize {
        self.views[0].width
    }

    /// Descriptor dimension `d_mod`.
    pub fn descriptor_dim(&self) -> usize {
        self.views[1].width
    }
}

fn to_points(samples: &[MultiViewDescriptor]) -> Result<Vec<ViewPoints>> {
    if samples.is_empty() {
        return Err(MfdhError::invalid("no samples to draw anchors from"));
    }
    let (k, d) = (samples[0].k(), samples[0].dim());
    for s in samples {
        check_dim("anchor histogram", k, s.k())?;
        check_dim("anchor mean", d, s.dim())?;
    }
    samples.par_iter().map(ViewPoints::from_descriptor).collect()
}

/// Draws `counts[r]` anchors per view uniformly without replacement.
///
/// The same seed on the same sample count draws the same indices, so image
/// and text anchors selected with one seed come from the same training pairs.
pub fn select_anchors(
    samples: &[MultiViewDescriptor],
    counts: [usize; NUM_VIEWS],
    seed: u64,
) -> Result<AnchorSet> {
    let n = samples.len();
    for (r, &c) in counts.iter().enumerate() {
        if c == 0 || c > n {
            return Err(MfdhError::invalid(format!(
                "view {r} wants {c} anchors from {n} samples"
            )));
        }
    }
    let points = to_points(samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = counts.map(|c| {
        let mut all: Vec<usize> = (0..n).collect();
        let (chosen, _) = all.partial_shuffle(&mut rng, c);
        chosen.to_vec()
    });
    AnchorSet::from_indices(&points, idx)
}

/// Anchors at the k-means centers of each view.
pub fn kmeans_anchors(
    samples: &[MultiViewDescriptor],
    counts: [usize; NUM_VIEWS],
    seed: u64,
) -> Result<AnchorSet> {
    let n = samples.len();
    for (r, &c) in counts.iter().enumerate() {
        if c == 0 || c > n {
            return Err(MfdhError::invalid(format!(
                "view {r} wants {c} anchors from {n} samples"
            )));
        }
    }
    let points = to_points(samples)?;
    let mut views = Vec::with_capacity(NUM_VIEWS);
    for r in 0..NUM_VIEWS {
        let width = points[0].view(r).len();
        let flat: Vec<f64> = points.iter().flat_map(|p| p.view(r).iter().copied()).collect();
        let fit = kmeans::fit(&flat, width, counts[r], seed.wrapping_add(r as u64))?;
        views.push(ViewAnchors {
            width,
            data: fit.centers,
            source: None,
        });
    }
    let views: [ViewAnchors; NUM_VIEWS] = views.try_into().expect("three views");
    AnchorSet::from_views(views)
}

pub fn build_anchors(
    samples: &[MultiViewDescriptor],
    counts: [usize; NUM_VIEWS],
    strategy: AnchorStrategy,
    seed: u64,
) -> Result<AnchorSet> {
    match strategy {
        AnchorStrategy::Random => select_anchors(samples, counts, seed),
        AnchorStrategy::KMeans => kmeans_anchors(samples, counts, seed),
    }
}

/// Per-view kernel responses of one sample against the anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelizedFeature {
    pub blocks: [DVector<f64>; NUM_VIEWS],
}

impl KernelizedFeature {
    pub fn stacked(&self) -> DVector<f64> {
        self.stacked_weighted(&[1.0; NUM_VIEWS])
    }

    /// Stacks the blocks with block `r` scaled by `eta[r]`.
    pub fn stacked_weighted(&self, eta: &[f64; NUM_VIEWS]) -> DVector<f64> {
        let len: usize = self.blocks.iter().map(DVector::len).sum();
        let mut out = DVector::zeros(len);
        let mut at = 0;
        for (b, &w) in self.blocks.iter().zip(eta) {
            out.rows_mut(at, b.len()).copy_from(&(b * w));
            at += b.len();
        }
        out
    }
}

fn kernelize_points(
    p: &ViewPoints,
    anchors: &AnchorSet,
    specs: &[KernelFunctionSpec; NUM_VIEWS],
) -> Result<KernelizedFeature> {
    check_dim("sample histogram", anchors.histogram_len(), p.histogram.len())?;
    check_dim("sample mean", anchors.descriptor_dim(), p.mean.len())?;
    Ok(KernelizedFeature {
        blocks: std::array::from_fn(|r| {
            let x = p.view(r);
            DVector::from_iterator(
                anchors.views[r].count(),
                anchors.views[r].iter().map(|a| eval_unchecked(&specs[r], x, a)),
            )
        }),
    })
}

/// Kernel responses of one sample against every anchor of every view.
pub fn kernelize(
    sample: &MultiViewDescriptor,
    anchors: &AnchorSet,
    specs: &[KernelFunctionSpec; NUM_VIEWS],
) -> Result<KernelizedFeature> {
    for s in specs {
        s.validate()?;
    }
    kernelize_points(&ViewPoints::from_descriptor(sample)?, anchors, specs)
}

/// Weighted stacked kernel features as the columns of a `D x n` matrix.
pub fn build_kernel_matrix(
    samples: &[MultiViewDescriptor],
    anchors: &AnchorSet,
    specs: &[KernelFunctionSpec; NUM_VIEWS],
    eta: &[f64; NUM_VIEWS],
) -> Result<DMatrix<f64>> {
    for s in specs {
        s.validate()?;
    }
    validate_eta(eta)?;
    let cols: Vec<DVector<f64>> = samples
        .par_iter()
        .map(|s| {
            let p = ViewPoints::from_descriptor(s)?;
            Ok(kernelize_points(&p, anchors, specs)?.stacked_weighted(eta))
        })
        .collect::<Result<_>>()?;
    let mut out = DMatrix::zeros(anchors.feature_len(), samples.len());
    for (i, c) in cols.iter().enumerate() {
        out.set_column(i, c);
    }
    Ok(out)
}

pub fn validate_eta(eta: &[f64; NUM_VIEWS]) -> Result<()> {
    if eta.iter().any(|w| !w.is_finite()) {
        return Err(MfdhError::invalid("view weights must be finite"));
    }
    Ok(())
}

/// Everything needed to map one modality's descriptors into feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub anchors: AnchorSet,
    pub kernels: [KernelFunctionSpec; NUM_VIEWS],
    pub eta: [f64; NUM_VIEWS],
}

impl FeatureMap {
    pub fn feature(&self, sample: &MultiViewDescriptor) -> Result<DVector<f64>> {
        Ok(kernelize(sample, &self.anchors, &self.kernels)?.stacked_weighted(&self.eta))
    }

    pub fn matrix(&self, samples: &[MultiViewDescriptor]) -> Result<DMatrix<f64>> {
        build_kernel_matrix(samples, &self.anchors, &self.kernels, &self.eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn mv(h: &[f64], m: &[f64], c: DMatrix<f64>) -> MultiViewDescriptor {
        MultiViewDescriptor {
            histogram: DVector::from_row_slice(h),
            mean: DVector::from_row_slice(m),
            covariance: c,
        }
    }

    fn toy_samples() -> Vec<MultiViewDescriptor> {
        vec![
            mv(&[1.0, 0.0], &[0.0, 0.0], DMatrix::identity(2, 2)),
            mv(&[0.5, 0.5], &[1.0, 1.0], dmatrix![2.0, 0.0; 0.0, 1.0]),
            mv(&[0.0, 1.0], &[3.0, -1.0], dmatrix![1.0, 0.2; 0.2, 0.5]),
        ]
    }

    #[test]
    fn rbf_examples() {
        let k = KernelFunctionSpec::rbf(1.0);
        assert_eq!(kernel_eval(&k, &[0.3, -2.0], &[0.3, -2.0]).unwrap(), 1.0);
        assert_eq!(kernel_eval(&KernelFunctionSpec::rbf(0.01), &[5.0], &[5.0]).unwrap(), 1.0);
        let v = kernel_eval(&k, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-15);
        assert!((v - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn polynomial_examples() {
        let k = KernelFunctionSpec::polynomial(1.0, 5);
        assert_eq!(kernel_eval(&k, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(kernel_eval(&k, &[1.0, 1.0], &[1.0, 0.0]).unwrap(), 32.0);
    }

    #[test]
    fn kernel_rejects_non_finite() {
        let k = KernelFunctionSpec::default();
        assert!(kernel_eval(&k, &[f64::NAN], &[0.0]).is_err());
        assert!(kernel_eval(&k, &[1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn spd_kernel_uses_log_euclidean_distance() {
        let e = std::f64::consts::E;
        let v = kernel_eval_spd(
            &KernelFunctionSpec::rbf(1.0),
            &DMatrix::identity(2, 2),
            &(DMatrix::identity(2, 2) * e),
        )
        .unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-14);
        let p = kernel_eval_spd(
            &KernelFunctionSpec::polynomial(1.0, 2),
            &(DMatrix::identity(2, 2) * e),
            &(DMatrix::identity(2, 2) * e),
        )
        .unwrap();
        assert!((p - 9.0).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(KernelFunctionSpec::rbf(0.0).validate().is_err());
        assert!(KernelFunctionSpec::rbf(-1.0).validate().is_err());
        assert!(KernelFunctionSpec::polynomial(1.0, 0).validate().is_err());
        assert!(KernelFunctionSpec::polynomial(1.0, 5).validate().is_ok());
        let mut combo = KernelCombination::default();
        assert!(combo.validate().is_ok());
        combo.text[2] = KernelFunctionSpec::polynomial(1.0, 5);
        assert!(combo.validate().is_err());
        combo.shared = false;
        assert!(combo.validate().is_ok());
    }

    #[test]
    fn eight_modes() {
        let counts: Vec<usize> = (1..=8)
            .map(|m| KernelCombination::mode(m).unwrap().image.iter().filter(|k| k.is_rbf()).count())
            .collect();
        assert_eq!(counts, vec![3, 0, 2, 2, 2, 1, 1, 1]);
        assert!(KernelCombination::mode(0).is_err());
        assert!(KernelCombination::mode(9).is_err());
        let m8 = KernelCombination::mode(8).unwrap();
        assert!(!m8.image[0].is_rbf() && !m8.image[1].is_rbf() && m8.image[2].is_rbf());
    }

    #[test]
    fn anchors_all_samples_and_determinism() {
        let s = toy_samples();
        let a = select_anchors(&s, [3, 3, 3], 5).unwrap();
        for r in 0..3 {
            let mut src = a.view(r).source.clone().unwrap();
            src.sort();
            assert_eq!(src, vec![0, 1, 2]);
        }
        assert_eq!(a, select_anchors(&s, [3, 3, 3], 5).unwrap());
        let one = select_anchors(&s, [1, 1, 1], 11).unwrap();
        assert_eq!(one.counts(), [1, 1, 1]);
        assert!(one.view(0).source.as_ref().unwrap()[0] < 3);
        assert!(select_anchors(&s, [4, 1, 1], 0).is_err());
        assert!(select_anchors(&s, [0, 1, 1], 0).is_err());
    }

    #[test]
    fn self_similarity_is_one() {
        let s = toy_samples();
        let a = select_anchors(&s, [2, 3, 1], 3).unwrap();
        let specs = [KernelFunctionSpec::rbf(1.0); 3];
        for r in 0..3 {
            for (j, &i) in a.view(r).source.as_ref().unwrap().iter().enumerate() {
                let f = kernelize(&s[i], &a, &specs).unwrap();
                assert!((f.blocks[r][j] - 1.0).abs() < 1e-12);
            }
        }
        for x in &s {
            let f = kernelize(x, &a, &specs).unwrap();
            assert!(f.stacked().iter().all(|&v| v > 0.0 && v <= 1.0));
        }
    }

    #[test]
    fn hand_computed_two_anchor_block() {
        // histogram view only is checked by hand; anchors are samples 0 and 1
        let s = toy_samples();
        let a = AnchorSet::from_samples(&s[..2]).unwrap();
        let f = kernelize(&s[2], &a, &[KernelFunctionSpec::rbf(1.0); 3]).unwrap();
        // |(0,1)-(1,0)|^2 = 2, |(0,1)-(0.5,0.5)|^2 = 0.5
        assert!((f.blocks[0][0] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((f.blocks[0][1] - (-0.25f64).exp()).abs() < 1e-15);
        // means: |(3,-1)|^2 = 10, |(2,-2)|^2 = 8
        assert!((f.blocks[1][0] - (-5.0f64).exp()).abs() < 1e-15);
        assert!((f.blocks[1][1] - (-4.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn kernel_matrix_weights_and_single_column() {
        let s = toy_samples();
        let a = AnchorSet::from_samples(&s).unwrap();
        let specs = [KernelFunctionSpec::rbf(1.0); 3];
        let k = build_kernel_matrix(&s[..1], &a, &specs, &[1.0; 3]).unwrap();
        assert_eq!(k.shape(), (9, 1));
        let col = kernelize(&s[0], &a, &specs).unwrap().stacked();
        assert_eq!(k.column(0), col.column(0));

        let w = build_kernel_matrix(&s, &a, &specs, &[2.0, 1.0, 0.5]).unwrap();
        let u = build_kernel_matrix(&s, &a, &specs, &[1.0; 3]).unwrap();
        assert_eq!(w.rows(0, 3), u.rows(0, 3) * 2.0);
        assert_eq!(w.rows(3, 3), u.rows(3, 3));
        assert_eq!(w.rows(6, 3), u.rows(6, 3) * 0.5);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = toy_samples();
        let a = AnchorSet::from_samples(&s).unwrap();
        let bad = mv(&[1.0, 0.0, 0.0], &[0.0, 0.0], DMatrix::identity(2, 2));
        assert!(kernelize(&bad, &a, &[KernelFunctionSpec::default(); 3]).is_err());
    }

    #[test]
    fn kmeans_anchor_strategy() {
        let s = toy_samples();
        let a = build_anchors(&s, [2, 2, 2], AnchorStrategy::KMeans, 1).unwrap();
        assert_eq!(a.counts(), [2, 2, 2]);
        assert!(a.view(0).source.is_none());
    }

    #[test]
    fn combination_toml_round_trip() {
        let combo = KernelCombination::mode(4).unwrap();
        let text = toml::to_string(&combo).unwrap();
        let back: KernelCombination = toml::from_str(&text).unwrap();
        assert_eq!(combo, back);
    }
}
