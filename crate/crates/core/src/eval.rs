//! Retrieval quality: mean average precision over Hamming rankings and the
//! hash-lookup precision/recall curve over Hamming radii.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, MfdhError, Result};
use crate::index::{BinaryCode, HammingIndex};
use crate::optimizer::LabelMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Task {
    I2T,
    T2I,
    I2I,
    T2T,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::I2T, Task::T2I, Task::I2I, Task::T2T];

    /// (query modality, database modality)
    pub fn modalities(self) -> (crate::Modality, crate::Modality) {
        use crate::Modality::{Image, Text};
        match self {
            Task::I2T => (Image, Text),
            Task::T2I => (Text, Image),
            Task::I2I => (Image, Image),
            Task::T2T => (Text, Text),
        }
    }
}

impl std::str::FromStr for Task {
    type Err = MfdhError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I2T" => Ok(Task::I2T),
            "T2I" => Ok(Task::T2I),
            "I2I" => Ok(Task::I2I),
            "T2T" => Ok(Task::T2T),
            other => Err(MfdhError::invalid(format!("unknown task '{other}'"))),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelevanceMode {
    /// Relevant when the (single) classes agree.
    SingleLabel,
    /// Relevant when the label sets intersect.
    MultiLabel,
}

/// Ground truth for a query set against a database.
#[derive(Debug, Clone)]
pub struct RelevanceJudge {
    mode: RelevanceMode,
    query: Vec<Vec<usize>>,
    db: Vec<Vec<usize>>,
}

impl RelevanceJudge {
    pub fn new(mode: RelevanceMode, query: &LabelMatrix, db: &LabelMatrix) -> Result<Self> {
        check_dim("label classes", query.num_classes(), db.num_classes())?;
        if mode == RelevanceMode::SingleLabel && !(query.is_one_hot() && db.is_one_hot()) {
            return Err(MfdhError::invalid("single-label relevance needs one-hot label columns"));
        }
        let sets = |m: &LabelMatrix| (0..m.len()).map(|i| m.labels_of(i)).collect();
        Ok(Self {
            mode,
            query: sets(query),
            db: sets(db),
        })
    }

    /// Single-label when every column is one-hot, multi-label otherwise.
    pub fn infer(query: &LabelMatrix, db: &LabelMatrix) -> Result<Self> {
        let mode = if query.is_one_hot() && db.is_one_hot() {
            RelevanceMode::SingleLabel
        } else {
            RelevanceMode::MultiLabel
        };
        Self::new(mode, query, db)
    }

    pub fn mode(&self) -> RelevanceMode {
        self.mode
    }

    pub fn num_queries(&self) -> usize {
        self.query.len()
    }

    pub fn db_len(&self) -> usize {
        self.db.len()
    }

    pub fn is_relevant(&self, query: usize, db: usize) -> bool {
        let (q, d) = (&self.query[query], &self.db[db]);
        match self.mode {
            RelevanceMode::SingleLabel => q[0] == d[0],
            // label lists are sorted
            RelevanceMode::MultiLabel => {
                let (mut i, mut j) = (0, 0);
                while i < q.len() && j < d.len() {
                    match q[i].cmp(&d[j]) {
                        std::cmp::Ordering::Equal => return true,
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                    }
                }
                false
            }
        }
    }
}

/// Average precision of the first `r` entries of a ranking; 0 when none of
/// them is relevant.
pub fn average_precision(ranked_relevance: &[bool], r: usize) -> Result<f64> {
    if r == 0 {
        return Err(MfdhError::invalid("R must be >= 1"));
    }
    if r > ranked_relevance.len() {
        return Err(MfdhError::invalid(format!(
            "R = {r} exceeds the ranking length {}",
            ranked_relevance.len()
        )));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (m, &rel) in ranked_relevance[..r].iter().enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (m + 1) as f64;
        }
    }
    Ok(if hits == 0 { 0.0 } else { sum / hits as f64 })
}

fn check_queries(queries: &[BinaryCode], index: &HammingIndex, judge: &RelevanceJudge) -> Result<()> {
    if queries.is_empty() {
        return Err(MfdhError::invalid("no queries to evaluate"));
    }
    check_dim("query labels", queries.len(), judge.num_queries())?;
    check_dim("database labels", index.len(), judge.db_len())
}

/// Per-query AP over the Hamming ranking truncated at `min(r, |db|)`.
pub fn average_precisions(
    queries: &[BinaryCode],
    index: &HammingIndex,
    judge: &RelevanceJudge,
    r: usize,
) -> Result<Vec<f64>> {
    check_queries(queries, index, judge)?;
    if r == 0 {
        return Err(MfdhError::invalid("R must be >= 1"));
    }
    if index.is_empty() {
        return Ok(vec![0.0; queries.len()]);
    }
    let r = r.min(index.len());
    queries
        .iter()
        .enumerate()
        .map(|(qi, q)| {
            let rel: Vec<bool> = index
                .rank(q, r)?
                .into_iter()
                .map(|(pos, _)| judge.is_relevant(qi, pos))
                .collect();
            average_precision(&rel, r)
        })
        .collect()
}

pub fn mean_average_precision(
    queries: &[BinaryCode],
    index: &HammingIndex,
    judge: &RelevanceJudge,
    r: usize,
) -> Result<f64> {
    let aps = average_precisions(queries, index, judge, r)?;
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub r: usize,
    pub precision: f64,
    pub recall: f64,
}

/// Precision and recall of radius lookup, pooled over all queries.
///
/// A radius at which no query retrieves anything has no defined precision
/// and is left out of `points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

pub fn pr_curve(queries: &[BinaryCode], index: &HammingIndex, judge: &RelevanceJudge) -> Result<PrCurve> {
    check_queries(queries, index, judge)?;
    let l = index.code_len();
    // per-distance histograms of retrieved and relevant-retrieved counts
    let mut retrieved = vec![0u64; l + 1];
    let mut hits = vec![0u64; l + 1];
    let mut total_relevant = 0u64;
    for (qi, q) in queries.iter().enumerate() {
        for (pos, d) in index.distances(q)?.into_iter().enumerate() {
            retrieved[d as usize] += 1;
            if judge.is_relevant(qi, pos) {
                hits[d as usize] += 1;
                total_relevant += 1;
            }
        }
    }
    let mut points = Vec::with_capacity(l + 1);
    let (mut ret_cum, mut hit_cum) = (0u64, 0u64);
    for r in 0..=l {
        ret_cum += retrieved[r];
        hit_cum += hits[r];
        if ret_cum == 0 {
            continue;
        }
        let recall = if total_relevant == 0 {
            0.0
        } else {
            hit_cum as f64 / total_relevant as f64
        };
        points.push(PrPoint {
            r,
            precision: hit_cum as f64 / ret_cum as f64,
            recall,
        });
    }
    Ok(PrCurve { points })
}

impl PrCurve {
    /// Tab-separated `r precision recall` with a header row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("r\tprecision\trecall\n");
        for p in &self.points {
            out.push_str(&format!("{}\t{}\t{}\n", p.r, p.precision, p.recall));
        }
        out
    }
}

/// The metrics document written by `mfdh eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task: Task,
    #[serde(rename = "L")]
    pub code_len: usize,
    #[serde(rename = "R")]
    pub top_r: usize,
    pub map: f64,
    pub relevance: RelevanceMode,
    pub pr_curve: Vec<PrPoint>,
    pub config_echo: String,
}
