//! Packed binary codes and exhaustive Hamming-space search.

use crate::error::{check_dim, MfdhError, Result};

/// An `L`-bit code over {-1, +1}. Bit `i` lives in word `i / 64` at position
/// `i % 64`; a set bit means +1. Pad bits past `L` are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryCode {
    len: usize,
    words: Vec<u64>,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BinaryCode {
    /// Packs signs; `v >= 0` maps to +1.
    pub fn from_signs<I>(signs: I) -> Self
    where
        I: IntoIterator<Item = f64>,
    {
        let mut words = Vec::new();
        let mut len = 0;
        for v in signs {
            if len % 64 == 0 {
                words.push(0);
            }
            if v >= 0.0 {
                words[len / 64] |= 1u64 << (len % 64);
            }
            len += 1;
        }
        Self { len, words }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Self::from_signs(bits.iter().map(|&b| if b { 1.0 } else { -1.0 }))
    }

    pub fn from_words(len: usize, words: Vec<u64>) -> Result<Self> {
        check_dim("packed code words", words_for(len), words.len())?;
        if let Some(&last) = words.last() {
            let used = len - (words.len() - 1) * 64;
            if used < 64 && last >> used != 0 {
                return Err(MfdhError::invalid("pad bits of a packed code must be zero"));
            }
        }
        Ok(Self { len, words })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bit(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// The code as +-1 values.
    pub fn signs(&self) -> Vec<f64> {
        (0..self.len).map(|i| if self.bit(i) { 1.0 } else { -1.0 }).collect()
    }

    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        let used = self.len % 64;
        if used != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
        Self {
            len: self.len,
            words,
        }
    }

    /// Lowercase hex, 16 digits per word, words in order.
    pub fn to_hex(&self) -> String {
        self.words.iter().map(|w| format!("{w:016x}")).collect()
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<Self> {
        if hex.len() != 16 * words_for(len) || !hex.is_ascii() {
            return Err(MfdhError::format(
                "code hex",
                format!("expected {} hex digits for {len} bits", 16 * words_for(len)),
            ));
        }
        let words = (0..words_for(len))
            .map(|i| u64::from_str_radix(&hex[16 * i..16 * (i + 1)], 16))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| MfdhError::format("code hex", e.to_string()))?;
        Self::from_words(len, words)
    }
}

/// Number of positions where the codes differ.
pub fn hamming_distance(a: &BinaryCode, b: &BinaryCode) -> Result<u32> {
    check_dim("code length", a.len, b.len)?;
    Ok(distance_unchecked(a, b))
}

#[inline]
fn distance_unchecked(a: &BinaryCode, b: &BinaryCode) -> u32 {
    a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x ^ y).count_ones())
        .sum()
}

/// Codes with opaque ids, searched by linear scan.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HammingIndex {
    code_len: usize,
    ids: Vec<String>,
    codes: Vec<BinaryCode>,
}

impl HammingIndex {
    pub fn new(code_len: usize) -> Self {
        Self {
            code_len,
            ids: Vec::new(),
            codes: Vec::new(),
        }
    }

    pub fn from_codes(code_len: usize, entries: impl IntoIterator<Item = (String, BinaryCode)>) -> Result<Self> {
        let mut idx = Self::new(code_len);
        for (id, code) in entries {
            idx.push(id, code)?;
        }
        Ok(idx)
    }

    pub fn push(&mut self, id: impl Into<String>, code: BinaryCode) -> Result<()> {
        check_dim("indexed code length", self.code_len, code.len())?;
        self.ids.push(id.into());
        self.codes.push(code);
        Ok(())
    }

    pub fn code_len(&self) -> usize {
        self.code_len
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn codes(&self) -> &[BinaryCode] {
        &self.codes
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BinaryCode)> {
        self.ids.iter().map(String::as_str).zip(&self.codes)
    }

    /// Distances from `q` to every indexed code, in insertion order.
    pub fn distances(&self, q: &BinaryCode) -> Result<Vec<u32>> {
        check_dim("query code length", self.code_len, q.len())?;
        Ok(self.codes.iter().map(|c| distance_unchecked(q, c)).collect())
    }

    /// Positions of the `top_r` nearest codes, nearest first, insertion order
    /// among equal distances.
    pub fn rank(&self, q: &BinaryCode, top_r: usize) -> Result<Vec<(usize, u32)>> {
        if top_r == 0 {
            return Err(MfdhError::invalid("top_R must be >= 1"));
        }
        let dists = self.distances(q)?;
        // counting sort by distance is stable and O(n + L)
        let mut buckets = vec![Vec::new(); self.code_len + 1];
        for (pos, &d) in dists.iter().enumerate() {
            buckets[d as usize].push(pos);
        }
        Ok(buckets
            .into_iter()
            .enumerate()
            .flat_map(|(d, v)| v.into_iter().map(move |p| (p, d as u32)))
            .take(top_r)
            .collect())
    }

    pub fn search_ranked(&self, q: &BinaryCode, top_r: usize) -> Result<Vec<(&str, u32)>> {
        Ok(self
            .rank(q, top_r)?
            .into_iter()
            .map(|(p, d)| (self.ids[p].as_str(), d))
            .collect())
    }

    /// Positions of every code within `radius` of `q`, in insertion order.
    pub fn within(&self, q: &BinaryCode, radius: usize) -> Result<Vec<usize>> {
        if radius > self.code_len {
            return Err(MfdhError::invalid(format!(
                "radius {radius} exceeds code length {}",
                self.code_len
            )));
        }
        Ok(self
            .distances(q)?
            .into_iter()
            .enumerate()
            .filter(|&(_, d)| d as usize <= radius)
            .map(|(p, _)| p)
            .collect())
    }

    pub fn search_radius(&self, q: &BinaryCode, radius: usize) -> Result<Vec<&str>> {
        Ok(self
            .within(q, radius)?
            .into_iter()
            .map(|p| self.ids[p].as_str())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(bits: &str) -> BinaryCode {
        BinaryCode::from_bits(&bits.chars().map(|c| c == '1').collect::<Vec<_>>())
    }

    #[test]
    fn packing_layout() {
        let c = code("1011");
        assert_eq!(c.words(), &[0b1101]);
        assert_eq!(c.signs(), vec![1.0, -1.0, 1.0, 1.0]);
        assert_eq!(c.to_hex(), "000000000000000d");
        assert_eq!(BinaryCode::from_hex(4, "000000000000000d").unwrap(), c);
        assert!(BinaryCode::from_hex(4, "00000000000000ff").is_err());
        assert!(BinaryCode::from_hex(4, "0d").is_err());
        assert!(BinaryCode::from_signs([0.0]).bit(0));
    }

    #[test]
    fn distance_examples() {
        let a = code("1100101");
        assert_eq!(hamming_distance(&a, &a).unwrap(), 0);
        assert_eq!(hamming_distance(&a, &a.complement()).unwrap(), 7);
        assert_eq!(hamming_distance(&a, &code("0100111")).unwrap(), 2);
        assert!(hamming_distance(&a, &code("11")).is_err());
    }

    #[test]
    fn ranked_search_is_stable() {
        let idx = HammingIndex::from_codes(
            4,
            [("a", "1111"), ("b", "0000"), ("c", "1110"), ("d", "1111"), ("e", "0111")]
                .into_iter()
                .map(|(i, c)| (i.to_string(), code(c))),
        )
        .unwrap();
        let q = code("1111");
        let r = idx.search_ranked(&q, 10).unwrap();
        assert_eq!(r, vec![("a", 0), ("d", 0), ("c", 1), ("e", 1), ("b", 4)]);
        assert_eq!(idx.search_ranked(&q, 3).unwrap().len(), 3);
        assert!(idx.search_ranked(&q, 0).is_err());
        assert_eq!(idx.search_radius(&q, 0).unwrap(), vec!["a", "d"]);
        assert_eq!(idx.search_radius(&q, 4).unwrap().len(), 5);
        assert!(idx.search_radius(&q, 5).is_err());
    }

    #[test]
    fn empty_index() {
        let idx = HammingIndex::new(8);
        let q = BinaryCode::from_signs([1.0; 8]);
        assert!(idx.search_ranked(&q, 5).unwrap().is_empty());
        assert!(idx.search_radius(&q, 3).unwrap().is_empty());
    }

    #[test]
    fn rejects_wrong_length() {
        let mut idx = HammingIndex::new(8);
        assert!(idx.push("x", code("101")).is_err());
    }
}
