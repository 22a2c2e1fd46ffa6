//! Fixed-length bit strings.
//!
//! Bit `i` is the `i`-th letter of the string. When a string labels a
//! computational basis state, bit 0 is the most significant bit of the
//! amplitude index.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Bits::zeros(len);
        for i in 0..len {
            b.set(i, true);
        }
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Bits::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    /// Parses a string over `{0, 1}`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut b = Bits::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => b.set(i, true),
                _ => return Err(Error::InvalidArgument(format!("bad bit character {c:?}"))),
            }
        }
        Ok(b)
    }

    /// The `len` low bits of `index`, most significant first.
    pub fn from_index(index: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut b = Bits::zeros(len);
        for i in 0..len {
            b.set(i, (index >> (len - 1 - i)) & 1 == 1);
        }
        b
    }

    pub fn to_index(&self) -> u64 {
        assert!(self.len <= 64);
        (0..self.len).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut b = Bits::zeros(len);
        for w in b.words.iter_mut() {
            *w = rng.random();
        }
        b.clear_tail();
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn check_len(&self, other: &Bits) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch { expected: self.len, got: other.len });
        }
        Ok(())
    }

    pub fn xor(&self, other: &Bits) -> Result<Bits> {
        self.check_len(other)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        Ok(Bits { len: self.len, words })
    }

    pub fn and(&self, other: &Bits) -> Result<Bits> {
        self.check_len(other)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Ok(Bits { len: self.len, words })
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Bits) -> Result<bool> {
        self.check_len(other)?;
        let ones: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        Ok(ones % 2 == 1)
    }

    /// Parity of the bits selected by `mask`.
    pub fn masked_parity(&self, mask: &Bits) -> Result<bool> {
        self.dot(mask)
    }

    pub fn concat(&self, other: &Bits) -> Bits {
        let mut out = Bits::zeros(self.len + other.len);
        for i in 0..self.len {
            out.set(i, self.get(i));
        }
        for i in 0..other.len {
            out.set(self.len + i, other.get(i));
        }
        out
    }

    /// Bits `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Bits> {
        if start + len > self.len {
            return Err(Error::SeedUnderflow { need: start + len, got: self.len });
        }
        let mut out = Bits::zeros(len);
        for i in 0..len {
            out.set(i, self.get(start + i));
        }
        Ok(out)
    }

    /// The bits at the listed positions, in order.
    pub fn select(&self, positions: &[usize]) -> Bits {
        let mut out = Bits::zeros(positions.len());
        for (k, &p) in positions.iter().enumerate() {
            out.set(k, self.get(p));
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn ones_positions(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    /// Packs bits into bytes, bit 0 in the high bit of byte 0.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for i in 0..self.len {
            if self.get(i) {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Bits> {
        if bytes.len() * 8 < len {
            return Err(Error::LengthMismatch { expected: len.div_ceil(8), got: bytes.len() });
        }
        let mut b = Bits::zeros(len);
        for i in 0..len {
            b.set(i, bytes[i / 8] & (0x80 >> (i % 8)) != 0);
        }
        Ok(b)
    }

    /// Hex of the packed bytes, truncated to whole nibbles.
    pub fn to_hex(&self) -> String {
        let mut s = hex::encode(self.to_bytes());
        s.truncate(self.len.div_ceil(4));
        s
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Bits> {
        let mut padded = s.to_string();
        if padded.len() % 2 == 1 {
            padded.push('0');
        }
        let bytes = hex::decode(&padded).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Bits::from_bytes(&bytes, len)
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Bits::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Writes integers into a packed bit string.
#[derive(Default)]
pub struct BitWriter {
    bits: Vec<bool>,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_uint(&mut self, value: u64, width: usize) {
        for i in (0..width).rev() {
            self.bits.push((value >> i) & 1 == 1);
        }
    }

    pub fn push_bits(&mut self, b: &Bits) {
        self.bits.extend(b.iter());
    }

    pub fn bit_len(&self) -> usize {
        self.bits.len()
    }

    pub fn finish(self) -> Vec<u8> {
        Bits::from_bools(&self.bits).to_bytes()
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    fn next_bit(&mut self) -> Result<bool> {
        let byte = self
            .bytes
            .get(self.pos / 8)
            .ok_or_else(|| Error::MalformedCiphertext("bit stream exhausted".into()))?;
        let v = byte & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(v)
    }

    pub fn read_uint(&mut self, width: usize) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.next_bit()? as u64;
        }
        Ok(v)
    }

    pub fn read_bits(&mut self, len: usize) -> Result<Bits> {
        let mut b = Bits::zeros(len);
        for i in 0..len {
            b.set(i, self.next_bit()?);
        }
        Ok(b)
    }
}

/// Number of bits needed to write any value below `count`.
pub fn index_width(count: u64) -> usize {
    if count <= 1 {
        0
    } else {
        64 - (count - 1).leading_zeros() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn index_round_trip_is_msb_first() {
        let b = Bits::parse("100").unwrap();
        assert_eq!(b.to_index(), 4);
        assert_eq!(Bits::from_index(4, 3), b);
    }

    #[test]
    fn hex_uses_leading_nibbles() {
        let b = Bits::parse("10").unwrap();
        assert_eq!(b.to_hex(), "8");
        assert_eq!(Bits::from_hex("8", 2).unwrap(), b);
        assert_eq!(Bits::parse("0000000111").unwrap().to_hex(), "01c");
    }

    #[test]
    fn dot_and_mismatch() {
        let a = Bits::parse("110").unwrap();
        let b = Bits::parse("011").unwrap();
        assert!(a.dot(&b).unwrap());
        assert!(a.dot(&Bits::zeros(2)).is_err());
    }

    #[test]
    fn width_of_counts() {
        assert_eq!(index_width(1), 0);
        assert_eq!(index_width(2), 1);
        assert_eq!(index_width(4096), 12);
        assert_eq!(index_width(4097), 13);
    }

    proptest! {
        #[test]
        fn bytes_round_trip(v in proptest::collection::vec(any::<bool>(), 0..200)) {
            let b = Bits::from_bools(&v);
            prop_assert_eq!(Bits::from_bytes(&b.to_bytes(), v.len()).unwrap(), b.clone());
            prop_assert_eq!(Bits::from_hex(&b.to_hex(), v.len()).unwrap(), b);
        }

        #[test]
        fn writer_reader_round_trip(vals in proptest::collection::vec((0u64..1 << 20, 1usize..21), 1..20)) {
            let mut w = BitWriter::new();
            for &(v, width) in &vals {
                w.push_uint(v & ((1 << width) - 1), width);
            }
            let bytes = w.finish();
            let mut r = BitReader::new(&bytes);
            for &(v, width) in &vals {
                prop_assert_eq!(r.read_uint(width).unwrap(), v & ((1 << width) - 1));
            }
        }
    }
}
