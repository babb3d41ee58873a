//! Packed bit vectors with a canonical byte serialization.
//!
//! Bits are packed most-significant-bit first: bit `i` lives in byte `i / 8`
//! at mask `0x80 >> (i % 8)`. Unused trailing bits of the last byte are always
//! zero, so equality and hashing can work on the packed bytes directly.
//!
//! The canonical serialization is a 4-byte big-endian bit length followed by
//! the packed bytes. It is the input format of the tag functions and of the
//! harness file I/O.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    bytes: Vec<u8>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            bytes: vec![0; len.div_ceil(8)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Builds a vector from 0/1 integers; any other value is rejected.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => v.set(i, true),
                other => return Err(Error::param(format!("bit {i} has value {other}"))),
            }
        }
        Ok(v)
    }

    /// Takes the first `len` bits of `bytes` (MSB first).
    pub fn from_packed(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() * 8 < len {
            return Err(Error::param(format!(
                "{} bytes cannot hold {len} bits",
                bytes.len()
            )));
        }
        let mut packed = bytes[..len.div_ceil(8)].to_vec();
        if !len.is_multiple_of(8) {
            let last = packed.len() - 1;
            packed[last] &= 0xffu8 << (8 - len % 8);
        }
        Ok(Self { len, bytes: packed })
    }

    /// The `len`-bit big-endian binary expansion of `index`, so that index 0 is
    /// the all-zero vector and lexicographic order matches integer order.
    pub fn from_index(index: u64, len: usize) -> Result<Self> {
        if len < 64 && index >> len != 0 {
            return Err(Error::param(format!("index {index} does not fit in {len} bits")));
        }
        let mut v = Self::zeros(len);
        for i in 0..len.min(64) {
            if (index >> i) & 1 == 1 {
                v.set(len - 1 - i, true);
            }
        }
        Ok(v)
    }

    /// Inverse of [`BitVector::from_index`]; `None` when the value exceeds 64 bits.
    pub fn to_index(&self) -> Option<u64> {
        let mut out: u64 = 0;
        for i in 0..self.len {
            if out >> 63 != 0 {
                return None;
            }
            out = (out << 1) | self.get(i) as u64;
        }
        Some(out)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill(bytes.as_mut_slice());
        Self::from_packed(&bytes, len).expect("buffer sized for len")
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 0x80u8 >> (i % 8);
        if value {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn as_packed(&self) -> &[u8] {
        &self.bytes
    }

    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for b in out.bytes.iter_mut() {
            *b = !*b;
        }
        if !self.len.is_multiple_of(8) {
            let last = out.bytes.len() - 1;
            out.bytes[last] &= 0xffu8 << (8 - self.len % 8);
        }
        out
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Number of positions where the two vectors differ.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::param(format!(
                "hamming distance of vectors with lengths {} and {}",
                self.len, other.len
            )));
        }
        Ok(self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// 4-byte big-endian bit length, then the packed bytes.
    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        let len = u32::try_from(self.len).expect("bit vectors are shorter than 2^32 bits");
        let mut out = Vec::with_capacity(4 + self.bytes.len());
        out.extend_from_slice(&len.to_be_bytes());
        out.extend_from_slice(&self.bytes);
        out
    }

    pub fn from_canonical_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < 4 {
            return Err(Error::param("canonical bit vector needs a 4-byte length prefix"));
        }
        let len = u32::from_be_bytes([data[0], data[1], data[2], data[3]]) as usize;
        let body = &data[4..];
        if body.len() != len.div_ceil(8) {
            return Err(Error::param(format!(
                "length prefix says {len} bits but {} payload bytes follow",
                body.len()
            )));
        }
        let v = Self::from_packed(body, len)?;
        if v.bytes != body {
            return Err(Error::param("non-zero padding bits in canonical encoding"));
        }
        Ok(v)
    }

    /// Renders as a `0`/`1` string.
    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    pub fn parse_bit_string(s: &str) -> Result<Self> {
        let bits: Vec<u8> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::param(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<_>>()?;
        Self::from_bits(&bits)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({})", self.to_bit_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_packing() {
        let v = BitVector::from_bits(&[1, 0, 1, 1, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(v.as_packed(), &[0b1011_0000, 0b1000_0000]);
        assert_eq!(v.to_canonical_bytes(), vec![0, 0, 0, 9, 0b1011_0000, 0b1000_0000]);
    }

    #[test]
    fn index_round_trip() {
        let v = BitVector::from_index(5, 4).unwrap();
        assert_eq!(v.to_bit_string(), "0101");
        assert_eq!(v.to_index(), Some(5));
        assert!(BitVector::from_index(16, 4).is_err());
        assert_eq!(BitVector::from_index(0, 70).unwrap().to_index(), Some(0));
    }

    #[test]
    fn complement_keeps_padding_clear() {
        let v = BitVector::zeros(3).complement();
        assert_eq!(v.as_packed(), &[0b1110_0000]);
        assert_eq!(v.count_ones(), 3);
    }

    #[test]
    fn canonical_rejects_bad_padding() {
        assert!(BitVector::from_canonical_bytes(&[0, 0, 0, 3, 0b1111_0000]).is_err());
        assert!(BitVector::from_canonical_bytes(&[0, 0, 0, 9, 0]).is_err());
    }

    #[test]
    fn hamming_length_mismatch() {
        let a = BitVector::zeros(3);
        let b = BitVector::zeros(4);
        assert!(matches!(a.hamming(&b), Err(Error::Parameter(_))));
    }
}
