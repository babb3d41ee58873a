//! Eve's attacks: exhaustive key recovery from noiseless or noisy tags, and
//! impersonation through the closest codeword pair of the ensemble.
//!
//! Every search scans keys in integer order and, when run in parallel,
//! reduces with "best score, then smaller key index" so the answer matches
//! the sequential scan exactly.

use rayon::prelude::*;

use crate::detector::{correlate, HypothesisStats};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::special::q_function;
use crate::tag_codec::{check_enumerable, Key, Message, Tag, TagFunction};
use crate::waveform::ObservedTag;

/// Eve's record of `(message, observation)` pairs.
#[derive(Debug, Clone, Default)]
pub struct ObservationLog {
    pairs: Vec<(Message, ObservedTag)>,
}

impl ObservationLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, s: Message, y: ObservedTag) -> Result<()> {
        if let Some((_, first)) = self.pairs.first() {
            if first.len() != y.len() {
                return Err(Error::param(format!(
                    "observation of length {} in a log of length-{} tags",
                    y.len(),
                    first.len()
                )));
            }
        }
        self.pairs.push((s, y));
        Ok(())
    }

    pub fn pairs(&self) -> &[(Message, ObservedTag)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    pub guessed_key: Option<Key>,
    pub success: bool,
    pub keys_tested: u64,
    /// Gaussian log-likelihood of the returned key (0 for noiseless lookup).
    pub log_likelihood: f64,
}

/// Table lookup: first key (in integer order) whose tag equals `t`.
pub fn recover_key_noiseless(tf: &TagFunction, s: &Message, t: &Tag) -> Result<AttackResult> {
    let l_k = tf.params().l_k();
    check_enumerable(l_k)?;
    let n = 1u64 << l_k;
    let mut tested = 0u64;
    for i in 0..n {
        let k = Key::from_index(i, l_k)?;
        tested += 1;
        if &tf.encode(s, &k)? == t {
            return Ok(AttackResult {
                guessed_key: Some(k),
                success: true,
                keys_tested: tested,
                log_likelihood: 0.0,
            });
        }
    }
    Ok(AttackResult {
        guessed_key: None,
        success: false,
        keys_tested: tested,
        log_likelihood: f64::NEG_INFINITY,
    })
}

/// Maximum-likelihood key: the codeword with the largest correlation with `y`
/// (equivalently the smallest Euclidean distance). Ties go to the smaller key.
pub fn ml_decode(tf: &TagFunction, s: &Message, y: &ObservedTag) -> Result<AttackResult> {
    let l_k = tf.params().l_k();
    check_enumerable(l_k)?;
    if y.len() != tf.params().l_t() {
        return Err(Error::param(format!(
            "observation has {} samples, expected l_t={}",
            y.len(),
            tf.params().l_t()
        )));
    }
    let book = tf.codebook(s)?;
    let (idx, corr) = ml_decode_codebook(&book, y.samples());
    Ok(AttackResult {
        guessed_key: Some(Key::from_index(idx as u64, l_k)?),
        success: true,
        keys_tested: book.len() as u64,
        log_likelihood: gaussian_log_likelihood(y, corr),
    })
}

/// `(index, correlation)` of the best codeword.
pub fn ml_decode_codebook(book: &[Tag], y: &[f64]) -> (usize, f64) {
    book.par_iter()
        .enumerate()
        .map(|(i, c)| (i, correlate(y, c.bits())))
        .reduce(|| (usize::MAX, f64::NEG_INFINITY), better)
}

fn better(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// `ln p(y | x)` for `x` in {±1}^L at correlation `corr = x . y`.
fn gaussian_log_likelihood(y: &ObservedTag, corr: f64) -> f64 {
    let g = y.gamma_t();
    if !g.is_finite() {
        return 0.0;
    }
    let l = y.len() as f64;
    let norm_y: f64 = y.samples().iter().map(|v| v * v).sum();
    let dist2 = norm_y - 2.0 * corr + l;
    -0.5 * g * dist2 + 0.5 * l * (g / (2.0 * std::f64::consts::PI)).ln()
}

/// Joint maximum likelihood over every pair in the log:
/// `argmax_k sum_i gamma_i (y_i . bpsk(tau(s_i, k)))`.
pub fn ml_decode_joint(tf: &TagFunction, log: &ObservationLog) -> Result<AttackResult> {
    let l_k = tf.params().l_k();
    check_enumerable(l_k)?;
    if log.is_empty() {
        return Err(Error::param("observation log is empty"));
    }
    let n = 1usize << l_k;
    let mut score = vec![0.0; n];
    let mut ll_const = 0.0;
    for (s, y) in log.pairs() {
        let book = tf.codebook(s)?;
        let g = if y.gamma_t().is_finite() { y.gamma_t() } else { 1.0 };
        for (acc, c) in score.iter_mut().zip(&book) {
            *acc += g * correlate(y.samples(), c.bits());
        }
        ll_const += gaussian_log_likelihood(y, 0.0);
    }
    let (idx, best) = score
        .iter()
        .copied()
        .enumerate()
        .fold((usize::MAX, f64::NEG_INFINITY), better);
    Ok(AttackResult {
        guessed_key: Some(Key::from_index(idx as u64, l_k)?),
        success: true,
        keys_tested: n as u64,
        log_likelihood: ll_const + best,
    })
}

/// Attacker's best forgery: message and key whose tag is closest to Bob's.
#[derive(Debug, Clone, PartialEq)]
pub struct Impersonation {
    pub message: Message,
    pub key: Key,
    pub distance: usize,
}

/// Minimizes `d_H(tau(s, k_b), tau(s, k_E))` over listed messages and keys
/// `k_E != k_b`. Ties go to the earlier message, then the smaller key.
pub fn impersonation_search(
    tf: &TagFunction,
    k_b: &Key,
    messages: &[Message],
) -> Result<Impersonation> {
    let l_k = tf.params().l_k();
    check_enumerable(l_k)?;
    if messages.is_empty() {
        return Err(Error::param("impersonation search needs at least one message"));
    }
    if k_b.len() != l_k {
        return Err(Error::param(format!("key has {} bits, expected l_k={l_k}", k_b.len())));
    }
    let kb_idx = k_b.bits().to_index().expect("enumerable key") as usize;
    let mut best: Option<(usize, usize, usize)> = None;
    for (mi, s) in messages.iter().enumerate() {
        let book = tf.codebook(s)?;
        let c_b = &book[kb_idx];
        let (d, k) = book
            .par_iter()
            .enumerate()
            .filter(|(i, _)| *i != kb_idx)
            .map(|(i, c)| (c_b.bits().hamming(c.bits()).expect("equal lengths"), i))
            .min()
            .expect("at least two keys");
        if best.is_none_or(|(bd, ..)| d < bd) {
            best = Some((d, mi, k));
        }
        if d == 0 {
            break;
        }
    }
    let (distance, mi, k) = best.expect("at least one message");
    Ok(Impersonation {
        message: messages[mi].clone(),
        key: Key::from_index(k as u64, l_k)?,
        distance,
    })
}

/// False-acceptance probability of an impersonator at distance `d_star`:
/// `Q((threshold - (L_t - 2 d_star)) / sqrt(L_t / gamma_t))`.
pub fn impersonation_far(d_star: usize, threshold: f64, params: &SystemParams) -> Result<f64> {
    if d_star > params.l_t() {
        return Err(Error::param(format!(
            "distance {d_star} exceeds tag length {}",
            params.l_t()
        )));
    }
    let stats = HypothesisStats::new(params);
    Ok(q_function((threshold - stats.mean_h1_given(d_star)) / stats.sigma()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVector;
    use crate::detector::detection_probability;
    use crate::waveform::bpsk;

    fn padded_keys() -> TagFunction {
        let p = SystemParams::new(4, 4, 1, 0.5, 1.0).unwrap();
        let book = (0..16).map(|i| Tag::new(BitVector::from_index(i, 4).unwrap())).collect();
        TagFunction::table(p, book).unwrap()
    }

    fn zero_message(len: usize) -> Message {
        Message::new(BitVector::zeros(len))
    }

    #[test]
    fn noiseless_lookup() {
        let tf = padded_keys();
        let s = zero_message(4);
        let k = Key::from_index(11, 4).unwrap();
        let t = tf.encode(&s, &k).unwrap();
        let r = recover_key_noiseless(&tf, &s, &t).unwrap();
        assert!(r.success);
        assert_eq!(r.guessed_key, Some(k));
        assert_eq!(r.keys_tested, 12);
    }

    #[test]
    fn noiseless_lookup_miss() {
        let p = SystemParams::new(2, 4, 1, 0.5, 1.0).unwrap();
        let c = |s: &str| Tag::new(BitVector::parse_bit_string(s).unwrap());
        let tf = TagFunction::table(p, vec![c("0000"), c("0001"), c("0011"), c("0111")]).unwrap();
        let r = recover_key_noiseless(&tf, &zero_message(4), &c("1111")).unwrap();
        assert!(!r.success);
        assert_eq!(r.guessed_key, None);
        assert_eq!(r.keys_tested, 4);
    }

    #[test]
    fn ml_noiseless_and_ties() {
        let tf = padded_keys();
        let s = zero_message(4);
        let k = Key::from_index(6, 4).unwrap();
        let y = ObservedTag::new(bpsk(tf.encode(&s, &k).unwrap().bits()), 2.0).unwrap();
        assert_eq!(ml_decode(&tf, &s, &y).unwrap().guessed_key, Some(k));
        // An all-zero observation ties every key; the smallest index wins.
        let y0 = ObservedTag::new(vec![0.0; 4], 2.0).unwrap();
        assert_eq!(ml_decode(&tf, &s, &y0).unwrap().guessed_key, Some(Key::from_index(0, 4).unwrap()));
    }

    #[test]
    fn impersonation_padded_and_duplicate() {
        let tf = padded_keys();
        let k_b = Key::from_index(5, 4).unwrap();
        let found = impersonation_search(&tf, &k_b, &[zero_message(4)]).unwrap();
        assert_eq!(found.distance, 1);
        assert_eq!(found.key, Key::from_index(1, 4).unwrap());

        let p = SystemParams::new(2, 4, 1, 0.5, 1.0).unwrap();
        let c = |s: &str| Tag::new(BitVector::parse_bit_string(s).unwrap());
        let tf = TagFunction::table(p, vec![c("0000"), c("1111"), c("0011"), c("0000")]).unwrap();
        let found = impersonation_search(&tf, &Key::from_index(0, 2).unwrap(), &[zero_message(4)]).unwrap();
        assert_eq!(found.distance, 0);
        assert_eq!(found.key, Key::from_index(3, 2).unwrap());
    }

    #[test]
    fn far_edges() {
        let p = SystemParams::new(8, 16, 1, 0.5, 0.7).unwrap();
        let t = 9.3;
        assert_eq!(impersonation_far(0, t, &p).unwrap(), detection_probability(t, &p));
        assert!((impersonation_far(8, 0.0, &p).unwrap() - 0.5).abs() < 1e-15);
        assert!(impersonation_far(17, 0.0, &p).is_err());
        for d in 0..16 {
            assert!(impersonation_far(d, t, &p).unwrap() > impersonation_far(d + 1, t, &p).unwrap());
        }
    }

    #[test]
    fn capability_cap() {
        let p = SystemParams::new(25, 32, 1, 0.5, 1.0).unwrap();
        let tf = TagFunction::keyed_hash(p);
        let s = zero_message(32);
        let t = Tag::new(BitVector::zeros(32));
        assert!(matches!(recover_key_noiseless(&tf, &s, &t), Err(Error::Capability(_))));
        let y = ObservedTag::new(vec![1.0; 32], 1.0).unwrap();
        assert!(matches!(ml_decode(&tf, &s, &y), Err(Error::Capability(_))));
        let k = Key::new(BitVector::zeros(25));
        assert!(matches!(impersonation_search(&tf, &k, &[s]), Err(Error::Capability(_))));
    }
}
