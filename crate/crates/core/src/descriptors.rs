//! Zeroth, first and second order statistics of local descriptor sets.
//!
//! A sample (one image or one text) arrives as a bag of local descriptors. It
//! leaves as a [`MultiViewDescriptor`]: a bag-of-words histogram over a learned
//! [`Dictionary`], the descriptor mean, and the regularized covariance.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{check_dim, MfdhError, Result};
use crate::kmeans;

/// Default SPD floor added to every covariance descriptor.
pub const DEFAULT_EPS_SPD: f64 = 1e-6;

/// The local descriptors of one sample in one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSet {
    sample_id: String,
    dim: usize,
    data: Vec<f64>,
}

impl DescriptorSet {
    pub fn new(sample_id: impl Into<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| MfdhError::invalid("descriptor set must hold at least one vector"))?;
        let mut data = Vec::with_capacity(dim * vectors.len());
        for v in &vectors {
            check_dim("descriptor vector", dim, v.len())?;
            data.extend_from_slice(v);
        }
        Self::from_flat(sample_id, dim, data)
    }

    /// Builds a set from a row-major buffer of `count * dim` values.
    pub fn from_flat(sample_id: impl Into<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(MfdhError::invalid("descriptor dimension must be >= 1"));
        }
        if data.is_empty() {
            return Err(MfdhError::invalid("descriptor set must hold at least one vector"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(MfdhError::invalid(format!(
                "buffer of {} values is not a multiple of dim {dim}",
                data.len()
            )));
        }
        Ok(Self {
            sample_id: sample_id.into(),
            dim,
            data,
        })
    }

    pub fn sample_id(&self) -> &str {
        &self.sample_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn push(&mut self, v: &[f64]) -> Result<()> {
        check_dim("descriptor vector", self.dim, v.len())?;
        self.data.extend_from_slice(v);
        Ok(())
    }
}

/// Bag-of-words codebook: `k` centers in descriptor space.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    dim: usize,
    centers: Vec<f64>,
}

impl Dictionary {
    pub fn new(centers: Vec<Vec<f64>>) -> Result<Self> {
        let dim = centers
            .first()
            .map(Vec::len)
            .ok_or_else(|| MfdhError::invalid("dictionary needs at least one center"))?;
        let mut flat = Vec::with_capacity(dim * centers.len());
        for c in &centers {
            check_dim("dictionary center", dim, c.len())?;
            flat.extend_from_slice(c);
        }
        Self::from_flat(dim, flat)
    }

    pub fn from_flat(dim: usize, centers: Vec<f64>) -> Result<Self> {
        if dim == 0 || centers.is_empty() || !centers.len().is_multiple_of(dim) {
            return Err(MfdhError::invalid("dictionary buffer shape is invalid"));
        }
        if centers.iter().any(|v| !v.is_finite()) {
            return Err(MfdhError::invalid("dictionary center has a non-finite entry"));
        }
        Ok(Self { dim, centers })
    }

    pub fn k(&self) -> usize {
        self.centers.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centers(&self) -> impl Iterator<Item = &[f64]> {
        self.centers.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.centers
    }

    /// Nearest center by Euclidean distance, lowest index on ties.
    pub fn quantize(&self, v: &[f64]) -> usize {
        kmeans::nearest(v, &self.centers, self.dim).0
    }

    /// One center per line, comma separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in self.centers() {
            let row: Vec<String> = c.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| MfdhError::format("dictionary csv", format!("line {}: {e}", lineno + 1)))?;
            rows.push(row);
        }
        Self::new(rows)
    }
}

/// (histogram, mean, covariance) triplet describing one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDescriptor {
    pub histogram: DVector<f64>,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl MultiViewDescriptor {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.histogram.len()
    }
}

/// Learns a `k`-word codebook from every descriptor of every set.
pub fn learn_dictionary(sets: &[DescriptorSet], k: usize, seed: u64) -> Result<Dictionary> {
    let first = sets
        .first()
        .ok_or_else(|| MfdhError::invalid("cannot learn a dictionary from no descriptor sets"))?;
    let dim = first.dim();
    let total: usize = sets.iter().map(DescriptorSet::count).sum();
    let mut pooled = Vec::with_capacity(total * dim);
    for s in sets {
        check_dim("descriptor set", dim, s.dim())?;
        pooled.extend_from_slice(s.as_flat());
    }
    if total < k {
        return Err(MfdhError::invalid(format!(
            "{total} pooled descriptors cannot seed a dictionary of size {k}"
        )));
    }
    let fit = kmeans::fit(&pooled, dim, k, seed)?;
    Dictionary::from_flat(dim, fit.centers)
}

/// L1-normalized hard-assignment bag-of-words histogram.
pub fn compute_histogram(set: &DescriptorSet, dict: &Dictionary) -> Result<DVector<f64>> {
    check_dim("histogram descriptor", dict.dim(), set.dim())?;
    let mut hist = DVector::zeros(dict.k());
    for v in set.vectors() {
        hist[dict.quantize(v)] += 1.0;
    }
    hist /= set.count() as f64;
    Ok(hist)
}

pub fn compute_mean(set: &DescriptorSet) -> DVector<f64> {
    let mut mean = DVector::zeros(set.dim());
    for v in set.vectors() {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean / set.count() as f64
}

/// Unbiased covariance, symmetrized, plus `eps_spd * I`.
pub fn compute_covariance(set: &DescriptorSet, eps_spd: f64) -> Result<DMatrix<f64>> {
    if !(eps_spd >= 0.0 && eps_spd.is_finite()) {
        return Err(MfdhError::invalid(format!("eps_spd must be finite and >= 0, got {eps_spd}")));
    }
    let d = set.dim();
    let n = set.count();
    if n == 1 {
        if eps_spd == 0.0 {
            return Err(MfdhError::DegenerateCovariance(format!(
                "sample '{}' has a single descriptor and no SPD floor",
                set.sample_id()
            )));
        }
        return Ok(DMatrix::identity(d, d) * eps_spd);
    }
    let mean = compute_mean(set);
    let mut scatter = DMatrix::zeros(d, d);
    let mut centered = DVector::zeros(d);
    for v in set.vectors() {
        for ((c, x), m) in centered.iter_mut().zip(v).zip(mean.iter()) {
            *c = x - m;
        }
        scatter.ger(1.0, &centered, &centered, 1.0);
    }
    scatter /= (n - 1) as f64;
    let mut cov = (&scatter + scatter.transpose()) * 0.5;
    for i in 0..d {
        cov[(i, i)] += eps_spd;
    }
    Ok(cov)
}

pub fn build_multiview(
    set: &DescriptorSet,
    dict: &Dictionary,
    eps_spd: f64,
) -> Result<MultiViewDescriptor> {
    Ok(MultiViewDescriptor {
        histogram: compute_histogram(set, dict)?,
        mean: compute_mean(set),
        covariance: compute_covariance(set, eps_spd)?,
    })
}

/// [`build_multiview`] over many samples, in parallel, preserving order.
pub fn build_multiviews(
    sets: &[DescriptorSet],
    dict: &Dictionary,
    eps_spd: f64,
) -> Result<Vec<MultiViewDescriptor>> {
    sets.par_iter()
        .map(|s| build_multiview(s, dict, eps_spd))
        .collect()
}
