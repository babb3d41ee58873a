//! Tag generation as encoding into a message-indexed code ensemble.
//!
//! For a fixed message `s`, the map `k -> tau(s, k)` is an encoder whose
//! codebook `C(s)` has one codeword per key. Keys are enumerated by their
//! big-endian integer value, so key index `i` selects codeword `i`.
//!
//! Two concrete tag functions are provided, plus an explicit table for
//! constructed ensembles:
//!
//! * [`TagKind::SeededRandomCodebook`]: the tag bits for `(s, k)` are the
//!   first `l_t` bits (MSB first) of
//!   `SHA-256(seed_be64 || canon(s) || canon(k) || j_be32)` for `j = 0, 1, ...`
//!   concatenated, where `canon` is [`BitVector::to_canonical_bytes`].
//! * [`TagKind::KeyedHash`]: the tag bits are the first `l_t` bits of
//!   `HMAC-SHA256(key = canon(k), msg = j_be32 || canon(s))` for
//!   `j = 0, 1, ...` concatenated.
//! * [`TagKind::Table`]: a message-independent list of `2^l_k` codewords.

use std::sync::Arc;

use hmac::{Hmac, Mac};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Largest key length for which exhaustive operations are allowed.
pub const ENUMERATION_CAP: usize = 24;

macro_rules! bit_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash)]
        pub struct $name(BitVector);

        impl $name {
            pub fn new(bits: BitVector) -> Self {
                Self(bits)
            }

            pub fn bits(&self) -> &BitVector {
                &self.0
            }

            pub fn into_bits(self) -> BitVector {
                self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }
        }

        impl From<BitVector> for $name {
            fn from(bits: BitVector) -> Self {
                Self(bits)
            }
        }
    };
}

bit_newtype!(
    /// Shared secret key of `l_k` bits.
    Key
);
bit_newtype!(
    /// Message of `l_s` bits.
    Message
);
bit_newtype!(
    /// Authentication tag of `l_t` bits.
    Tag
);

impl Key {
    /// Key with big-endian integer value `index`.
    pub fn from_index(index: u64, l_k: usize) -> Result<Self> {
        BitVector::from_index(index, l_k).map(Self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TagKind {
    SeededRandomCodebook { seed: u64 },
    KeyedHash,
    Table(Arc<Vec<Tag>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TagFunction {
    kind: TagKind,
    params: SystemParams,
}

impl TagFunction {
    /// Ideal random-code ensemble; only for enumerable key lengths.
    pub fn seeded_random_codebook(params: SystemParams, seed: u64) -> Result<Self> {
        check_enumerable(params.l_k())?;
        Ok(Self {
            kind: TagKind::SeededRandomCodebook { seed },
            params,
        })
    }

    pub fn keyed_hash(params: SystemParams) -> Self {
        Self {
            kind: TagKind::KeyedHash,
            params,
        }
    }

    /// Message-independent codebook; `codewords[i]` is the tag of key index `i`.
    pub fn table(params: SystemParams, codewords: Vec<Tag>) -> Result<Self> {
        check_enumerable(params.l_k())?;
        if codewords.len() as u64 != 1u64 << params.l_k() {
            return Err(Error::param(format!(
                "table has {} codewords, expected 2^{}",
                codewords.len(),
                params.l_k()
            )));
        }
        if let Some(bad) = codewords.iter().find(|c| c.len() != params.l_t()) {
            return Err(Error::param(format!(
                "table codeword of length {} for l_t={}",
                bad.len(),
                params.l_t()
            )));
        }
        Ok(Self {
            kind: TagKind::Table(Arc::new(codewords)),
            params,
        })
    }

    pub fn kind(&self) -> &TagKind {
        &self.kind
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Same tag function under different link parameters (the lengths must match).
    pub fn with_params(&self, params: SystemParams) -> Result<Self> {
        if params.l_k() != self.params.l_k()
            || params.l_t() != self.params.l_t()
            || params.l_s() != self.params.l_s()
        {
            return Err(Error::param("with_params cannot change l_s, l_k or l_t"));
        }
        Ok(Self {
            kind: self.kind.clone(),
            params,
        })
    }

    pub fn is_enumerable(&self) -> bool {
        self.params.l_k() <= ENUMERATION_CAP
    }

    /// `tau(s, k)`.
    pub fn encode(&self, s: &Message, k: &Key) -> Result<Tag> {
        if s.len() != self.params.l_s() {
            return Err(Error::param(format!(
                "message has {} bits, expected l_s={}",
                s.len(),
                self.params.l_s()
            )));
        }
        if k.len() != self.params.l_k() {
            return Err(Error::param(format!(
                "key has {} bits, expected l_k={}",
                k.len(),
                self.params.l_k()
            )));
        }
        let l_t = self.params.l_t();
        let tag = match &self.kind {
            TagKind::SeededRandomCodebook { seed } => {
                let prefix = {
                    let mut h = Sha256::new();
                    h.update(seed.to_be_bytes());
                    h.update(s.bits().to_canonical_bytes());
                    h.update(k.bits().to_canonical_bytes());
                    h
                };
                expand(l_t, |j| {
                    let mut h = prefix.clone();
                    h.update(j.to_be_bytes());
                    h.finalize().to_vec()
                })
            }
            TagKind::KeyedHash => {
                let mac = <Hmac<Sha256> as Mac>::new_from_slice(&k.bits().to_canonical_bytes())
                    .expect("HMAC accepts keys of any length");
                let msg = s.bits().to_canonical_bytes();
                expand(l_t, |j| {
                    let mut m = mac.clone();
                    m.update(&j.to_be_bytes());
                    m.update(&msg);
                    m.finalize().into_bytes().to_vec()
                })
            }
            TagKind::Table(codewords) => {
                let idx = k.bits().to_index().expect("enumerable keys fit in u64") as usize;
                return Ok(codewords[idx].clone());
            }
        };
        Ok(Tag(tag))
    }

    /// The whole codebook `C(s)` in key-index order.
    pub fn codebook(&self, s: &Message) -> Result<Vec<Tag>> {
        check_enumerable(self.params.l_k())?;
        let n = 1u64 << self.params.l_k();
        (0..n)
            .into_par_iter()
            .map(|i| self.encode(s, &Key::from_index(i, self.params.l_k())?))
            .collect()
    }
}

fn expand(len: usize, mut block: impl FnMut(u32) -> Vec<u8>) -> BitVector {
    let mut bytes = Vec::with_capacity(len.div_ceil(8) + 32);
    let mut j = 0u32;
    while bytes.len() * 8 < len {
        bytes.extend(block(j));
        j += 1;
    }
    BitVector::from_packed(&bytes, len).expect("expanded enough bytes")
}

pub(crate) fn check_enumerable(l_k: usize) -> Result<()> {
    if l_k > ENUMERATION_CAP {
        return Err(Error::capability(format!(
            "key length {l_k} exceeds the enumeration cap of {ENUMERATION_CAP} bits"
        )));
    }
    Ok(())
}

/// `L_k / L_t`.
pub fn code_rate(params: &SystemParams) -> f64 {
    params.l_k() as f64 / params.l_t() as f64
}

pub fn hamming_distance(a: &Tag, b: &Tag) -> Result<usize> {
    a.bits().hamming(b.bits())
}

/// Closest pair of codewords within one code of the ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct MinDistance {
    pub distance: usize,
    pub message: Message,
    pub key_a: Key,
    pub key_b: Key,
}

/// Minimum over the listed messages of the minimum distance of `C(s)`.
///
/// Ties resolve to the first message in list order and then to the
/// lexicographically smallest key pair.
pub fn ensemble_min_distance(tf: &TagFunction, messages: &[Message]) -> Result<MinDistance> {
    check_enumerable(tf.params().l_k())?;
    if messages.is_empty() {
        return Err(Error::param("ensemble_min_distance needs at least one message"));
    }
    let mut best: Option<(usize, usize, usize, usize)> = None;
    for (mi, s) in messages.iter().enumerate() {
        let book = tf.codebook(s)?;
        let (d, a, b) = code_min_distance(&book);
        if best.is_none_or(|(bd, ..)| d < bd) {
            best = Some((d, mi, a, b));
        }
        if d == 0 {
            break;
        }
    }
    let (distance, mi, a, b) = best.expect("at least one message");
    let l_k = tf.params().l_k();
    Ok(MinDistance {
        distance,
        message: messages[mi].clone(),
        key_a: Key::from_index(a as u64, l_k)?,
        key_b: Key::from_index(b as u64, l_k)?,
    })
}

/// `(d_min, i, j)` with `i < j` the first closest pair in lexicographic order.
fn code_min_distance(book: &[Tag]) -> (usize, usize, usize) {
    let per_row: Vec<(usize, usize, usize)> = (0..book.len().saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let mut best = (usize::MAX, i, i + 1);
            for j in i + 1..book.len() {
                let d = book[i].bits().hamming(book[j].bits()).expect("equal lengths");
                if d < best.0 {
                    best = (d, i, j);
                    if d == 0 {
                        break;
                    }
                }
            }
            best
        })
        .collect();
    per_row
        .into_iter()
        .min_by_key(|&(d, i, j)| (d, i, j))
        .expect("codebooks have at least two codewords")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l_k: usize, l_t: usize) -> SystemParams {
        SystemParams::new(l_k, l_t, 1, 0.5, 1.0).unwrap()
    }

    fn message(len: usize, fill: bool) -> Message {
        Message::new(BitVector::from_bools(&vec![fill; len]))
    }

    #[test]
    fn rate() {
        assert_eq!(code_rate(&params(128, 256)), 0.5);
        assert_eq!(code_rate(&params(16, 16)), 1.0);
        assert_eq!(code_rate(&params(8, 16)), 0.5);
    }

    #[test]
    fn encode_is_deterministic_and_sized() {
        let p = params(128, 256);
        let tf = TagFunction::keyed_hash(p);
        let s = message(256, true);
        let k = Key::new(BitVector::from_index(77, 128).unwrap());
        let t1 = tf.encode(&s, &k).unwrap();
        let t2 = tf.encode(&s, &k).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.len(), 256);
    }

    #[test]
    fn long_tags_use_several_blocks() {
        let p = params(4, 600);
        let tf = TagFunction::seeded_random_codebook(p, 3).unwrap();
        let t = tf.encode(&message(600, false), &Key::from_index(1, 4).unwrap()).unwrap();
        assert_eq!(t.len(), 600);
        // Later blocks are not copies of the first one.
        assert_ne!(t.bits().as_packed()[..32], t.bits().as_packed()[32..64]);
    }

    #[test]
    fn length_mismatches() {
        let tf = TagFunction::keyed_hash(params(8, 16));
        let k = Key::from_index(0, 8).unwrap();
        assert!(matches!(tf.encode(&message(15, false), &k), Err(Error::Parameter(_))));
        let k7 = Key::from_index(0, 7).unwrap();
        assert!(matches!(tf.encode(&message(16, false), &k7), Err(Error::Parameter(_))));
    }

    #[test]
    fn codebook_cap() {
        assert!(matches!(
            TagFunction::seeded_random_codebook(params(25, 32), 0),
            Err(Error::Capability(_))
        ));
        let tf = TagFunction::keyed_hash(params(25, 32));
        assert!(matches!(tf.codebook(&message(32, false)), Err(Error::Capability(_))));
        assert!(matches!(
            ensemble_min_distance(&tf, &[message(32, false)]),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn min_distance_of_duplicate_codewords_is_zero() {
        let p = params(2, 4);
        let c = |s: &str| Tag::new(BitVector::parse_bit_string(s).unwrap());
        let tf = TagFunction::table(p, vec![c("0000"), c("1111"), c("0011"), c("1111")]).unwrap();
        let md = ensemble_min_distance(&tf, &[message(4, false)]).unwrap();
        assert_eq!(md.distance, 0);
        assert_eq!(md.key_a.bits().to_index(), Some(1));
        assert_eq!(md.key_b.bits().to_index(), Some(3));
    }

    #[test]
    fn min_distance_of_padded_keys_is_one() {
        let p = params(4, 4);
        let book = (0..16).map(|i| Tag::new(BitVector::from_index(i, 4).unwrap())).collect();
        let tf = TagFunction::table(p, book).unwrap();
        let md = ensemble_min_distance(&tf, &[message(4, false)]).unwrap();
        assert_eq!(md.distance, 1);
    }

    #[test]
    fn empty_message_list() {
        let tf = TagFunction::seeded_random_codebook(params(4, 8), 1).unwrap();
        assert!(matches!(ensemble_min_distance(&tf, &[]), Err(Error::Parameter(_))));
    }
}
