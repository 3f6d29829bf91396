//! Finite bit strings and the operations the forcing construction needs on
//! them: overwriting a prefix, set-style inclusion, masking, and the
//! position-major coding of ordered k-partitions.
//!
//! Positions beyond the stored length read as `0` everywhere.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A finite string over `{0,1}`, position 0 first.
///
/// Bits are packed most-significant-first so that comparing the word vectors
/// orders equal-length strings lexicographically.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = Self::zeros(len);
        for i in 0..len {
            s.set(i, true);
        }
        s
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = Self::new();
        for b in bits {
            s.push(b);
        }
        s
    }

    /// String of length `len` whose 1-positions are `positions`.
    pub fn from_positions(len: usize, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::zeros(len);
        for p in positions {
            s.set(p, true);
        }
        s
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self::from_bools((0..len).map(|_| rng.gen::<bool>()))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at `i`; `false` past the end.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        if i >= self.len {
            return false;
        }
        (self.words[i / WORD] >> (WORD - 1 - i % WORD)) & 1 == 1
    }

    /// Sets bit `i`, which must be below `len`.
    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (WORD - 1 - i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions holding 1, ascending.
    pub fn ones_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// First `n` bits (the whole string if shorter).
    pub fn prefix(&self, n: usize) -> BitString {
        Self::from_bools(self.iter().take(n))
    }

    /// `self ⪯ other`.
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len <= other.len && (0..self.len).all(|i| self.get(i) == other.get(i))
    }

    /// `self` resized to `len`, truncating or padding with zeros.
    pub fn padded(&self, len: usize) -> BitString {
        let mut s = BitString::zeros(len);
        for i in self.ones_positions().take_while(|&i| i < len) {
            s.set(i, true);
        }
        s
    }

    /// `X/σ`: `self` with its first `|σ|` bits replaced by `σ`.
    pub fn overwrite(&self, sigma: &BitString) -> Result<BitString> {
        if sigma.len > self.len {
            return Err(Error::Length(format!(
                "overwrite prefix of length {} exceeds string length {}",
                sigma.len, self.len
            )));
        }
        let mut out = self.clone();
        for i in 0..sigma.len {
            out.set(i, sigma.get(i));
        }
        Ok(out)
    }

    /// Set inclusion of the 1-positions; positions past `other`'s end count as 0.
    pub fn subset_leq(&self, other: &BitString) -> bool {
        self.ones_positions().all(|i| other.get(i))
    }

    /// `σ^S`: keeps the 1s of `self` that are also 1 in `mask`.
    pub fn restrict(&self, mask: &BitString) -> Result<BitString> {
        if mask.len < self.len {
            return Err(Error::Length(format!(
                "mask of length {} shorter than string of length {}",
                mask.len, self.len
            )));
        }
        Ok(self.and(mask))
    }

    /// Bitwise AND, keeping `self`'s length.
    pub fn and(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        for (i, w) in out.words.iter_mut().enumerate() {
            *w &= other.words.get(i).copied().unwrap_or(0);
        }
        out.clear_tail();
        out
    }

    /// Bitwise OR; the result has the longer of the two lengths.
    pub fn or(&self, other: &BitString) -> BitString {
        let (mut out, short) = if self.len >= other.len {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (i, w) in short.words.iter().enumerate() {
            out.words[i] |= w;
        }
        out
    }

    pub fn complement(&self) -> BitString {
        let mut out = self.clone();
        for w in out.words.iter_mut() {
            *w = !*w;
        }
        out.clear_tail();
        out
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !0u64 << (WORD - rem);
            }
        }
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        // Words are zero-padded past `len`, so a proper prefix ties on words
        // and is ordered first by length.
        let n = self.words.len().max(other.words.len());
        for i in 0..n {
            let a = self.words.get(i).copied().unwrap_or(0);
            let b = other.words.get(i).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("ε")
        } else {
            write!(f, "{self}")
        }
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 0,
                    msg: format!("invalid bit character {other:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString::from_bools)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Codes `parts` position-major: bit `k·x + j` is `parts[j](x)`.
pub fn interleave(parts: &[BitString]) -> Result<BitString> {
    let Some(first) = parts.first() else {
        return Ok(BitString::new());
    };
    let l = first.len();
    if parts.iter().any(|p| p.len() != l) {
        return Err(Error::Length("interleaved parts must share a length".into()));
    }
    let k = parts.len();
    let mut out = BitString::zeros(k * l);
    for (j, part) in parts.iter().enumerate() {
        for x in part.ones_positions() {
            out.set(k * x + j, true);
        }
    }
    Ok(out)
}

/// Inverse of [`interleave`].
pub fn deinterleave(code: &BitString, k: usize) -> Result<Vec<BitString>> {
    if k == 0 || !code.len().is_multiple_of(k) {
        return Err(Error::Length(format!(
            "code length {} is not a multiple of {k}",
            code.len()
        )));
    }
    let l = code.len() / k;
    let mut parts = vec![BitString::zeros(l); k];
    for i in code.ones_positions() {
        parts[i % k].set(i / k, true);
    }
    Ok(parts)
}

/// Bit `x` of part `j` in a position-major code with `k` parts.
#[inline]
pub fn code_bit(code: &BitString, k: usize, x: usize, j: usize) -> bool {
    code.get(k * x + j)
}

/// The ground sets of a run: the set `A` being split and the oracle `C`,
/// both over `{0, …, N-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundSets {
    pub a: BitString,
    pub c: BitString,
}

impl GroundSets {
    pub fn new(a: BitString, c: BitString) -> Result<Self> {
        if a.len() != c.len() {
            return Err(Error::Length(format!(
                "A has length {} but C has length {}",
                a.len(),
                c.len()
            )));
        }
        Ok(GroundSets { a, c })
    }

    pub fn universe(&self) -> usize {
        self.a.len()
    }

    pub fn a_complement(&self) -> BitString {
        self.a.complement()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn overwrite_examples() {
        assert_eq!(bs("1111").overwrite(&bs("00")).unwrap(), bs("0011"));
        assert_eq!(bs("1010").overwrite(&bs("")).unwrap(), bs("1010"));
        assert_eq!(bs("000000").overwrite(&bs("111")).unwrap(), bs("111000"));
        assert!(bs("1").overwrite(&bs("00")).is_err());
    }

    #[test]
    fn subset_examples() {
        assert!(bs("0100").subset_leq(&bs("0110")));
        assert!(!bs("1000").subset_leq(&bs("0111")));
        assert!(bs("").subset_leq(&bs("0")));
        assert!(bs("").subset_leq(&bs("")));
        // past the end of rho counts as 0
        assert!(!bs("001").subset_leq(&bs("00")));
        assert!(bs("000").subset_leq(&bs("")));
    }

    #[test]
    fn restrict_examples() {
        assert_eq!(bs("1111").restrict(&bs("1010")).unwrap(), bs("1010"));
        assert_eq!(bs("1100").restrict(&bs("0011")).unwrap(), bs("0000"));
        assert!(bs("11").restrict(&bs("1")).is_err());
    }

    #[test]
    fn restrict_splits_by_complement_exhaustively() {
        for len in 0..=8usize {
            for mask_bits in 0..(1u32 << len) {
                let mask = BitString::from_bools((0..len).map(|i| mask_bits >> i & 1 == 1));
                let comp = mask.complement();
                for s in 0..(1u32 << len) {
                    let sigma = BitString::from_bools((0..len).map(|i| s >> i & 1 == 1));
                    let joined = sigma.restrict(&mask).unwrap().or(&sigma.restrict(&comp).unwrap());
                    assert_eq!(joined, sigma);
                }
            }
        }
    }

    #[test]
    fn interleave_examples() {
        assert_eq!(interleave(&[bs("10"), bs("01")]).unwrap(), bs("1001"));
        assert_eq!(interleave(&[bs(""), bs("")]).unwrap(), bs(""));
        assert!(interleave(&[bs("1"), bs("01")]).is_err());
        assert_eq!(deinterleave(&bs("1001"), 2).unwrap(), vec![bs("10"), bs("01")]);
        assert_eq!(
            deinterleave(&bs("111111"), 3).unwrap(),
            vec![bs("11"), bs("11"), bs("11")]
        );
        assert!(deinterleave(&bs("101"), 2).is_err());
    }

    #[test]
    fn deinterleave_roundtrip_exhaustive() {
        for len in 0..=12usize {
            for k in 1..=len.max(1) {
                if len % k != 0 {
                    continue;
                }
                for v in 0..(1u32 << len) {
                    let code = BitString::from_bools((0..len).map(|i| v >> i & 1 == 1));
                    let parts = deinterleave(&code, k).unwrap();
                    assert_eq!(interleave(&parts).unwrap(), code);
                }
            }
        }
    }

    #[test]
    fn ordering_is_lexicographic_then_prefix_first() {
        let mut v = [bs("1"), bs("01"), bs(""), bs("0"), bs("00"), bs("10")];
        v.sort();
        let shown: Vec<String> = v.iter().map(|b| b.to_string()).collect();
        assert_eq!(shown, ["", "0", "00", "01", "1", "10"]);
    }

    #[test]
    fn long_strings_cross_word_boundaries() {
        let mut s = BitString::zeros(130);
        s.set(0, true);
        s.set(64, true);
        s.set(129, true);
        assert_eq!(s.ones_positions().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(s.complement().count_ones(), 127);
        assert_eq!(s.to_string().parse::<BitString>().unwrap(), s);
    }

    fn arb_bits(max: usize) -> impl Strategy<Value = BitString> {
        proptest::collection::vec(any::<bool>(), 0..max).prop_map(BitString::from_bools)
    }

    proptest! {
        #[test]
        fn overwrite_is_idempotent(x in arb_bits(40), cut in 0usize..40) {
            let sigma = x.complement().prefix(cut);
            let once = x.overwrite(&sigma).unwrap();
            prop_assert_eq!(once.overwrite(&sigma).unwrap(), once.clone());
            prop_assert_eq!(once.len(), x.len());
        }

        #[test]
        fn subset_leq_is_transitive(a in arb_bits(20), b in arb_bits(20), c in arb_bits(20)) {
            let ab = a.and(&b);
            let abc = ab.and(&c);
            prop_assert!(abc.subset_leq(&ab));
            prop_assert!(ab.subset_leq(&a));
            prop_assert!(abc.subset_leq(&a));
            prop_assert!(a.subset_leq(&a));
        }

        #[test]
        fn restrict_is_intersection(s in arb_bits(30), m in arb_bits(30)) {
            let mask = m.padded(s.len().max(m.len()));
            let r = s.restrict(&mask).unwrap();
            let expect: Vec<usize> = s.ones_positions().filter(|&i| mask.get(i)).collect();
            prop_assert_eq!(r.ones_positions().collect::<Vec<_>>(), expect);
        }

        #[test]
        fn interleave_roundtrip(k in 1usize..5, l in 0usize..10, seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let parts: Vec<_> = (0..k).map(|_| BitString::random(l, &mut rng)).collect();
            let code = interleave(&parts).unwrap();
            prop_assert_eq!(deinterleave(&code, k).unwrap(), parts);
        }
    }
}
