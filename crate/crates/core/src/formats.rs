//! Line-oriented text formats for descriptors, labels and code databases.
//!
//! ```text
//! MFDH-DESC v1 dim=<d>          <sample_id>\t<v1>,<v2>,...,<vd>   (one line per local descriptor)
//! MFDH-LABELS v1 c=<c>          <sample_id>\t<label>,<label>,...  (0-based class ids)
//! MFDH-CODES v1 L=<L> n=<n>     <id>\t<hex-packed-code>
//! ```
//!
//! Descriptor records for one sample need not be contiguous; samples keep the
//! order of their first record. Sample ids may not contain tabs or newlines.
//! Code files may carry `#` comment lines after the header (the config echo of
//! the model that produced them), so code ids may not start with `#`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::descriptors::DescriptorSet;
use crate::error::{MfdhError, Result};
use crate::index::{BinaryCode, HammingIndex};
use crate::optimizer::LabelMatrix;

pub const DESC_MAGIC: &str = "MFDH-DESC v1";
pub const LABELS_MAGIC: &str = "MFDH-LABELS v1";
pub const CODES_MAGIC: &str = "MFDH-CODES v1";

/// Parses `key=value` fields from a header line after the magic prefix.
fn header_fields<'a>(line: &'a str, magic: &str, what: &'static str) -> Result<HashMap<&'a str, &'a str>> {
    let rest = line
        .strip_prefix(magic)
        .ok_or_else(|| MfdhError::format(what, format!("header must start with '{magic}'")))?;
    rest.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .ok_or_else(|| MfdhError::format(what, format!("bad header field '{kv}'")))
        })
        .collect()
}

fn header_usize(fields: &HashMap<&str, &str>, key: &str, what: &'static str) -> Result<usize> {
    fields
        .get(key)
        .ok_or_else(|| MfdhError::format(what, format!("header lacks '{key}='")))?
        .parse()
        .map_err(|e| MfdhError::format(what, format!("header field {key}: {e}")))
}

fn split_record<'a>(line: &'a str, lineno: usize, what: &'static str) -> Result<(&'a str, &'a str)> {
    line.split_once('\t')
        .ok_or_else(|| MfdhError::format(what, format!("line {lineno}: expected '<id>\\t<payload>'")))
}

fn check_id(id: &str) -> Result<()> {
    if id.is_empty() || id.contains(['\t', '\n', '\r']) {
        return Err(MfdhError::invalid(format!("sample id {id:?} is empty or has tabs/newlines")));
    }
    Ok(())
}

pub fn parse_descriptors(text: &str) -> Result<Vec<DescriptorSet>> {
    const WHAT: &str = "descriptor file";
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| MfdhError::format(WHAT, "empty file"))?;
    let dim = header_usize(&header_fields(header.trim_end(), DESC_MAGIC, WHAT)?, "dim", WHAT)?;
    if dim == 0 {
        return Err(MfdhError::format(WHAT, "dim must be >= 1"));
    }

    let mut order: Vec<DescriptorSet> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    let mut buf = Vec::with_capacity(dim);
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (id, payload) = split_record(line, lineno, WHAT)?;
        buf.clear();
        for tok in payload.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|e| MfdhError::format(WHAT, format!("line {lineno}: {e}")))?;
            if !v.is_finite() {
                return Err(MfdhError::format(WHAT, format!("line {lineno}: non-finite value")));
            }
            buf.push(v);
        }
        if buf.len() != dim {
            return Err(MfdhError::DimensionMismatch {
                context: "descriptor record",
                expected: dim,
                actual: buf.len(),
            });
        }
        match slot.get(id) {
            Some(&s) => order[s].push(&buf)?,
            None => {
                slot.insert(id.to_string(), order.len());
                order.push(DescriptorSet::from_flat(id, dim, buf.clone())?);
            }
        }
    }
    Ok(order)
}

pub fn write_descriptors(sets: &[DescriptorSet], dim: usize) -> Result<String> {
    let mut out = format!("{DESC_MAGIC} dim={dim}\n");
    for s in sets {
        check_id(s.sample_id())?;
        if s.dim() != dim {
            return Err(MfdhError::DimensionMismatch {
                context: "descriptor set",
                expected: dim,
                actual: s.dim(),
            });
        }
        for v in s.vectors() {
            out.push_str(s.sample_id());
            out.push('\t');
            for (j, x) in v.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{x}").expect("write to string");
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn read_descriptors(path: impl AsRef<Path>) -> Result<Vec<DescriptorSet>> {
    parse_descriptors(&std::fs::read_to_string(path)?)
}

/// Labels keyed by sample id.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelFile {
    pub num_classes: usize,
    pub entries: Vec<(String, Vec<usize>)>,
}

impl LabelFile {
    pub fn parse(text: &str) -> Result<Self> {
        const WHAT: &str = "label file";
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| MfdhError::format(WHAT, "empty file"))?;
        let num_classes = header_usize(&header_fields(header.trim_end(), LABELS_MAGIC, WHAT)?, "c", WHAT)?;
        let mut entries = Vec::new();
        let mut seen = HashMap::new();
        for (i, line) in lines {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (id, payload) = split_record(line, lineno, WHAT)?;
            let mut labels = payload
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| MfdhError::format(WHAT, format!("line {lineno}: {e}")))?;
            labels.sort_unstable();
            labels.dedup();
            if let Some(&j) = labels.iter().find(|&&j| j >= num_classes) {
                return Err(MfdhError::format(WHAT, format!("line {lineno}: label {j} >= c")));
            }
            if seen.insert(id.to_string(), ()).is_some() {
                return Err(MfdhError::format(WHAT, format!("line {lineno}: duplicate id '{id}'")));
            }
            entries.push((id.to_string(), labels));
        }
        Ok(Self { num_classes, entries })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = format!("{LABELS_MAGIC} c={}\n", self.num_classes);
        for (id, labels) in &self.entries {
            check_id(id)?;
            let ls: Vec<String> = labels.iter().map(usize::to_string).collect();
            writeln!(out, "{id}\t{}", ls.join(",")).expect("write to string");
        }
        Ok(out)
    }

    /// Label matrix whose columns follow `ids`.
    pub fn matrix_for<S: AsRef<str>>(&self, ids: &[S]) -> Result<LabelMatrix> {
        let by_id: HashMap<&str, &Vec<usize>> =
            self.entries.iter().map(|(id, l)| (id.as_str(), l)).collect();
        let sets = ids
            .iter()
            .map(|id| {
                by_id
                    .get(id.as_ref())
                    .map(|l| (*l).clone())
                    .ok_or_else(|| MfdhError::invalid(format!("no labels for sample '{}'", id.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        LabelMatrix::from_label_sets(self.num_classes, &sets)
    }
}

pub fn write_codes(index: &HammingIndex) -> Result<String> {
    write_codes_annotated(index, "")
}

/// Like [`write_codes`], with every line of `comment` written as `# line`.
pub fn write_codes_annotated(index: &HammingIndex, comment: &str) -> Result<String> {
    let mut out = format!("{CODES_MAGIC} L={} n={}\n", index.code_len(), index.len());
    for line in comment.lines() {
        writeln!(out, "# {line}").expect("write to string");
    }
    for (id, code) in index.iter() {
        check_id(id)?;
        if id.starts_with('#') {
            return Err(MfdhError::invalid(format!("code id {id:?} starts with '#'")));
        }
        writeln!(out, "{id}\t{}", code.to_hex()).expect("write to string");
    }
    Ok(out)
}

pub fn parse_codes(text: &str) -> Result<HammingIndex> {
    const WHAT: &str = "code file";
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| MfdhError::format(WHAT, "empty file"))?;
    let fields = header_fields(header.trim_end(), CODES_MAGIC, WHAT)?;
    let l = header_usize(&fields, "L", WHAT)?;
    let n = header_usize(&fields, "n", WHAT)?;
    let mut idx = HammingIndex::new(l);
    for (i, line) in lines {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, hex) = split_record(line, i + 1, WHAT)?;
        idx.push(id, BinaryCode::from_hex(l, hex.trim())?)?;
    }
    if idx.len() != n {
        return Err(MfdhError::format(WHAT, format!("header says n={n}, found {} records", idx.len())));
    }
    Ok(idx)
}

pub fn read_codes(path: impl AsRef<Path>) -> Result<HammingIndex> {
    parse_codes(&std::fs::read_to_string(path)?)
}
