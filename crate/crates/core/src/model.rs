//! A trained model: learned variables plus everything needed to encode new
//! samples (dictionaries, anchors, kernels, view weights), and its binary file.
//!
//! File layout, all integers `u64` and all reals `f64`, little-endian:
//!
//! ```text
//! "MFDH-MODEL v1\n"
//! L, D, c, d_0, d_1, d_2, n
//! P_img (L x D, row-major), P_txt (L x D), W (L x c)
//! B as n packed codes of ceil(L/64) words each
//! trace length, objective trace
//! for image then text:
//!     k, d_mod, dictionary (k x d_mod)
//!     per view r: width, anchors (d_r x width), has-source flag [, d_r indices]
//! settings JSON (length-prefixed UTF-8)
//! config echo (length-prefixed UTF-8)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::descriptors::{build_multiview, DescriptorSet, Dictionary, MultiViewDescriptor};
use crate::error::{check_dim, MfdhError, Result};
use crate::index::BinaryCode;
use crate::kernel::{AnchorSet, AnchorStrategy, FeatureMap, KernelCombination, ViewAnchors, NUM_VIEWS};
use crate::optimizer::{TrainConfig, TrainState};
use crate::Modality;

pub const MODEL_MAGIC: &[u8] = b"MFDH-MODEL v1\n";

/// Hyperparameters a model needs to reproduce its feature pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub kernels: KernelCombination,
    pub eta_image: [f64; NUM_VIEWS],
    pub eta_text: [f64; NUM_VIEWS],
    pub eps_spd: f64,
    pub anchor_strategy: AnchorStrategy,
    pub train: TrainConfig,
}

/// Per-modality front end: codebook plus anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityParts {
    pub dictionary: Dictionary,
    pub anchors: AnchorSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub state: TrainState,
    pub image: ModalityParts,
    pub text: ModalityParts,
    pub settings: ModelSettings,
    /// Verbatim text of the configuration that produced the model.
    pub config_echo: String,
}

/// `sign(P x)` with `sign(0) = +1`.
pub fn encode_feature(p: &DMatrix<f64>, x: &DVector<f64>) -> Result<BinaryCode> {
    check_dim("feature length", p.ncols(), x.len())?;
    Ok(BinaryCode::from_signs((p * x).iter().copied()))
}

impl Model {
    pub fn code_len(&self) -> usize {
        self.state.code_len()
    }

    pub fn parts(&self, modality: Modality) -> &ModalityParts {
        match modality {
            Modality::Image => &self.image,
            Modality::Text => &self.text,
        }
    }

    pub fn projection(&self, modality: Modality) -> &DMatrix<f64> {
        match modality {
            Modality::Image => &self.state.p_img,
            Modality::Text => &self.state.p_txt,
        }
    }

    pub fn feature_map(&self, modality: Modality) -> FeatureMap {
        let eta = match modality {
            Modality::Image => self.settings.eta_image,
            Modality::Text => self.settings.eta_text,
        };
        FeatureMap {
            anchors: self.parts(modality).anchors.clone(),
            kernels: *self.settings.kernels.for_modality(modality),
            eta,
        }
    }

    pub fn multiview(&self, set: &DescriptorSet, modality: Modality) -> Result<MultiViewDescriptor> {
        build_multiview(set, &self.parts(modality).dictionary, self.settings.eps_spd)
    }

    /// Out-of-sample code for one multi-view descriptor.
    pub fn encode(&self, sample: &MultiViewDescriptor, modality: Modality) -> Result<BinaryCode> {
        let x = self.feature_map(modality).feature(sample)?;
        encode_feature(self.projection(modality), &x)
    }

    /// Codes for raw descriptor sets, in input order.
    pub fn encode_sets(&self, sets: &[DescriptorSet], modality: Modality) -> Result<Vec<BinaryCode>> {
        let mvs = sets
            .iter()
            .map(|s| self.multiview(s, modality))
            .collect::<Result<Vec<_>>>()?;
        if mvs.is_empty() {
            return Ok(Vec::new());
        }
        let k = self.feature_map(modality).matrix(&mvs)?;
        let proj = self.projection(modality) * k;
        Ok(proj
            .column_iter()
            .map(|c| BinaryCode::from_signs(c.iter().copied()))
            .collect())
    }

    /// Column `i` of `B` as a packed code.
    pub fn training_code(&self, i: usize) -> BinaryCode {
        BinaryCode::from_signs(self.state.b.column(i).iter().copied())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let s = &self.state;
        s.validate()?;
        let (l, n) = s.b.shape();
        let counts = self.image.anchors.counts();
        check_dim("text anchor count", counts.iter().sum(), self.text.anchors.feature_len())?;
        check_dim("projection width", counts.iter().sum(), s.feature_len())?;

        let mut enc = Encoder(w);
        enc.raw(MODEL_MAGIC)?;
        for v in [l, s.feature_len(), s.num_classes(), counts[0], counts[1], counts[2], n] {
            enc.u64(v as u64)?;
        }
        enc.matrix(&s.p_img)?;
        enc.matrix(&s.p_txt)?;
        enc.matrix(&s.w)?;
        for i in 0..n {
            for &word in self.training_code(i).words() {
                enc.u64(word)?;
            }
        }
        enc.u64(s.objective_trace.len() as u64)?;
        for &v in &s.objective_trace {
            enc.f64(v)?;
        }
        for parts in [&self.image, &self.text] {
            let dict = &parts.dictionary;
            enc.u64(dict.k() as u64)?;
            enc.u64(dict.dim() as u64)?;
            enc.f64s(dict.as_flat())?;
            for r in 0..NUM_VIEWS {
                let v = parts.anchors.view(r);
                enc.u64(v.width as u64)?;
                enc.f64s(&v.data)?;
                match &v.source {
                    Some(src) => {
                        enc.raw(&[1])?;
                        for &i in src {
                            enc.u64(i as u64)?;
                        }
                    }
                    None => enc.raw(&[0])?,
                }
            }
        }
        let settings = serde_json::to_string(&self.settings)
            .map_err(|e| MfdhError::format("model settings", e.to_string()))?;
        enc.string(&settings)?;
        enc.string(&self.config_echo)?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder { buf: bytes, at: 0 };
        if dec.take(MODEL_MAGIC.len())? != MODEL_MAGIC {
            return Err(MfdhError::format("model file", "missing MFDH-MODEL v1 header"));
        }
        let l = dec.usize()?;
        let d = dec.usize()?;
        let c = dec.usize()?;
        let counts = [dec.usize()?, dec.usize()?, dec.usize()?];
        let n = dec.usize()?;
        check_dim("model feature length", counts.iter().sum(), d)?;

        let p_img = dec.matrix(l, d)?;
        let p_txt = dec.matrix(l, d)?;
        let w = dec.matrix(l, c)?;
        let words = l.div_ceil(64);
        let mut b = DMatrix::zeros(l, n);
        for i in 0..n {
            let ws = (0..words).map(|_| dec.u64()).collect::<Result<Vec<_>>>()?;
            let code = BinaryCode::from_words(l, ws)?;
            b.set_column(i, &DVector::from_vec(code.signs()));
        }
        let trace_len = dec.usize()?;
        let objective_trace = dec.f64s(trace_len)?;

        let mut parts = Vec::with_capacity(2);
        for _ in 0..2 {
            let k = dec.usize()?;
            let dim = dec.usize()?;
            let dictionary = Dictionary::from_flat(dim, dec.f64s(k * dim)?)?;
            let mut views = Vec::with_capacity(NUM_VIEWS);
            for &count in &counts {
                let width = dec.usize()?;
                let data = dec.f64s(count * width)?;
                let source = match dec.take(1)?[0] {
                    0 => None,
                    1 => Some((0..count).map(|_| dec.usize()).collect::<Result<Vec<_>>>()?),
                    f => return Err(MfdhError::format("model file", format!("bad source flag {f}"))),
                };
                views.push(ViewAnchors { width, data, source });
            }
            let views: [ViewAnchors; NUM_VIEWS] = views.try_into().expect("three views");
            parts.push(ModalityParts {
                dictionary,
                anchors: AnchorSet::from_views(views)?,
            });
        }
        let settings: ModelSettings = serde_json::from_str(&dec.string()?)
            .map_err(|e| MfdhError::format("model settings", e.to_string()))?;
        let config_echo = dec.string()?;
        if dec.at != bytes.len() {
            return Err(MfdhError::format("model file", "trailing bytes"));
        }
        let text = parts.pop().expect("text parts");
        let image = parts.pop().expect("image parts");
        Ok(Self {
            state: TrainState {
                b,
                p_img,
                p_txt,
                w,
                objective_trace,
            },
            image,
            text,
            settings,
            config_echo,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

struct Encoder<'a, W: Write>(&'a mut W);

impl<W: Write> Encoder<'_, W> {
    fn raw(&mut self, b: &[u8]) -> Result<()> {
        self.0.write_all(b)?;
        Ok(())
    }

    fn u64(&mut self, v: u64) -> Result<()> {
        self.raw(&v.to_le_bytes())
    }

    fn f64(&mut self, v: f64) -> Result<()> {
        self.raw(&v.to_le_bytes())
    }

    fn f64s(&mut self, vs: &[f64]) -> Result<()> {
        vs.iter().try_for_each(|&v| self.f64(v))
    }

    fn matrix(&mut self, m: &DMatrix<f64>) -> Result<()> {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                self.f64(m[(i, j)])?;
            }
        }
        Ok(())
    }

    fn string(&mut self, s: &str) -> Result<()> {
        self.u64(s.len() as u64)?;
        self.raw(s.as_bytes())
    }
}

struct Decoder<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Decoder<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(len)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| MfdhError::format("model file", "unexpected end of file"))?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| MfdhError::format("model file", "size overflow"))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        let bytes = self.take(count.checked_mul(8).ok_or_else(|| {
            MfdhError::format("model file", "size overflow")
        })?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect())
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let vals = self.f64s(rows * cols)?;
        Ok(DMatrix::from_row_slice(rows, cols, &vals))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.usize()?;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|e| MfdhError::format("model file", e.to_string()))
    }
}
