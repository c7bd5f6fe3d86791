//! Bit strings and their text encoding `len:<n>;hex:<bytes>`.
//!
//! Bits are packed little-endian within each byte: bit `i` of the string is
//! bit `i % 8` of byte `i / 8`. Unused high bits of the last byte are zero.

use std::fmt;
use std::ops::{BitXor, Index};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::QkdError;
use crate::qcore::Bit;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        BitString { bits: vec![false; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn push(&mut self, value: bool) {
        self.bits.push(value);
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn hamming_distance(&self, other: &BitString) -> usize {
        self.iter().zip(other.iter()).filter(|(a, b)| a != b).count()
    }

    /// Parity of the bits at `indices`.
    pub fn parity_of(&self, indices: &[usize]) -> bool {
        indices.iter().fold(false, |acc, &i| acc ^ self.bits[i])
    }

    /// Keeps only positions for which `keep` is true.
    pub fn select(&self, keep: &[bool]) -> BitString {
        self.iter().zip(keep).filter(|(_, k)| **k).map(|(b, _)| b).collect()
    }

    /// Packs bits into u64 words, bit `i` at position `i % 64` of word `i / 64`.
    pub fn to_words(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.len().div_ceil(64)];
        for (i, b) in self.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        words
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = vec![0u8; self.len().div_ceil(8)];
        for (i, b) in self.iter().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        bytes
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, QkdError> {
        if bytes.len() != len.div_ceil(8) {
            return Err(QkdError::Parameter(format!(
                "{} bytes cannot hold exactly {len} bits",
                bytes.len()
            )));
        }
        let bits: Vec<bool> = (0..len).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect();
        let spare = bytes.len() * 8 - len;
        if spare > 0 && bytes[bytes.len() - 1] >> (8 - spare) != 0 {
            return Err(QkdError::Parameter("padding bits must be zero".into()));
        }
        Ok(BitString { bits })
    }
}

impl Index<usize> for BitString {
    type Output = bool;
    fn index(&self, i: usize) -> &bool {
        &self.bits[i]
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitString { bits: iter.into_iter().collect() }
    }
}

impl FromIterator<Bit> for BitString {
    fn from_iter<I: IntoIterator<Item = Bit>>(iter: I) -> Self {
        iter.into_iter().map(bool::from).collect()
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        BitString { bits }
    }
}

impl BitXor for &BitString {
    type Output = BitString;
    fn bitxor(self, rhs: &BitString) -> BitString {
        assert_eq!(self.len(), rhs.len(), "xor of bit strings with different lengths");
        self.iter().zip(rhs.iter()).map(|(a, b)| a ^ b).collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "len:{};hex:", self.len())?;
        for byte in self.to_bytes() {
            write!(f, "{byte:02x}")?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = QkdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| QkdError::Parameter(format!("malformed key string: {m}"));
        let (len_part, hex_part) = s.trim().split_once(';').ok_or_else(|| bad("missing ';'"))?;
        let len: usize = len_part
            .strip_prefix("len:")
            .ok_or_else(|| bad("missing 'len:'"))?
            .parse()
            .map_err(|_| bad("length is not an integer"))?;
        let hex = hex_part.strip_prefix("hex:").ok_or_else(|| bad("missing 'hex:'"))?;
        if hex.len() % 2 != 0 {
            return Err(bad("odd number of hex digits"));
        }
        let bytes = (0..hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| bad("invalid hex digit")))
            .collect::<Result<Vec<u8>, _>>()?;
        BitString::from_bytes(&bytes, len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn encoding_is_little_endian_within_bytes() {
        let s: BitString = vec![true, false, false, false, false, false, false, false, false, true].into();
        assert_eq!(s.to_string(), "len:10;hex:0102");
        assert_eq!("len:10;hex:0102".parse::<BitString>().unwrap(), s);
        assert_eq!(BitString::new().to_string(), "len:0;hex:");
    }

    #[test]
    fn rejects_malformed_strings() {
        for bad in ["10;hex:01", "len:x;hex:01", "len:9;hex:0", "len:9;hex:zz01", "len:3;hex:ff", "len:17;hex:01"] {
            assert!(bad.parse::<BitString>().is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn text_encoding_roundtrips(bits in proptest::collection::vec(any::<bool>(), 0..300)) {
            let s = BitString::from(bits);
            prop_assert_eq!(s.to_string().parse::<BitString>().unwrap(), s);
        }
    }
}
