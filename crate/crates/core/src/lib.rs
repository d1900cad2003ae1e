//! Multi-view feature discrete hashing for paired image/text retrieval.
//!
//! The pipeline runs in four stages, each in its own module:
//!
//! 1. [`descriptors`]: turn a bag of local descriptors into a histogram over a
//!    k-means codebook, a mean vector and a regularized covariance matrix.
//! 2. [`kernel`]: compare each view against anchor samples (RBF or
//!    polynomial, log-Euclidean for covariances) and stack the responses.
//! 3. [`optimizer`]: learn binary codes `B`, two modality projections and a
//!    linear classifier by alternating closed-form updates with discrete
//!    cyclic coordinate descent on `B`.
//! 4. [`index`] and [`eval`]: encode queries with `sign(P x)`, search packed
//!    codes in Hamming space and score the rankings (MAP, precision/recall).
//!
//! [`pipeline`] wires the stages together the way the `mfdh` binary does, and
//! [`formats`] holds the text and binary file formats.

pub mod descriptors;
pub mod error;
pub mod eval;
pub mod formats;
pub mod index;
pub mod kernel;
pub mod kmeans;
pub mod model;
pub mod optimizer;
pub mod pipeline;
pub mod spd;
pub mod synth;

use serde::{Deserialize, Serialize};

pub use descriptors::{DescriptorSet, Dictionary, MultiViewDescriptor};
pub use error::{MfdhError, Result};
pub use eval::{MetricsReport, PrCurve, Task};
pub use index::{BinaryCode, HammingIndex};
pub use kernel::{AnchorSet, KernelCombination, KernelFunctionSpec};
pub use model::Model;
pub use optimizer::{LabelMatrix, TrainConfig, TrainState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Image,
    Text,
}

impl std::str::FromStr for Modality {
    type Err = MfdhError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "image" | "img" => Ok(Modality::Image),
            "text" | "txt" => Ok(Modality::Text),
            other => Err(MfdhError::invalid(format!("unknown modality '{other}'"))),
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modality::Image => "image",
            Modality::Text => "text",
        })
    }
}
