//! Physical-layer signal chain.
//!
//! Bits map to symbols as `0 -> +1`, `1 -> -1`. Each tag symbol is repeated
//! `q` times, scaled by `rho_t` and added to the `rho_s`-scaled message. After
//! AWGN the receiver subtracts the known message, averages each block of `q`
//! chips and divides by `rho_t`, which leaves `y = bpsk(t) + w` with
//! `Var(w_i) = noise_var / (q rho_t^2) = 1 / gamma_t`.

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::rng::RngStream;
use crate::tag_codec::{code_rate, Message, Tag};

#[derive(Debug, Clone, PartialEq)]
pub struct TaggedSignal {
    samples: Vec<f64>,
}

impl TaggedSignal {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    samples: Vec<f64>,
    noise_var: f64,
}

impl ReceivedSignal {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
}

/// Message-free tag observation `y = bpsk(t) + w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedTag {
    samples: Vec<f64>,
    gamma_t: f64,
}

impl ObservedTag {
    pub fn new(samples: Vec<f64>, gamma_t: f64) -> Result<Self> {
        if !(gamma_t > 0.0) {
            return Err(Error::param(format!("gamma_t must be positive, got {gamma_t}")));
        }
        if samples.is_empty() {
            return Err(Error::param("observed tag must not be empty"));
        }
        Ok(Self { samples, gamma_t })
    }

    /// Draws `bpsk(t) + w` directly with `w_i ~ N(0, 1/gamma_t)`; statistically
    /// identical to the full chain followed by [`cancel_and_despread`].
    pub fn through_equivalent_channel(t: &Tag, gamma_t: f64, rng: &mut RngStream) -> Result<Self> {
        let sd = (1.0 / gamma_t).sqrt();
        let samples = bpsk(t.bits()).into_iter().map(|x| x + sd * rng.gaussian()).collect();
        Self::new(samples, gamma_t)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn gamma_t(&self) -> f64 {
        self.gamma_t
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| x * factor).collect(),
            gamma_t: self.gamma_t,
        }
    }
}

pub fn bpsk(bits: &BitVector) -> Vec<f64> {
    bits.iter().map(|b| if b { -1.0 } else { 1.0 }).collect()
}

/// Hard decision inverse of [`bpsk`]; non-negative samples decide 0.
pub fn slice(samples: &[f64]) -> BitVector {
    let bits: Vec<bool> = samples.iter().map(|&x| x < 0.0).collect();
    BitVector::from_bools(&bits)
}

/// Repeats every symbol of `bpsk(t)` `q` times.
pub fn spread(t: &Tag, q: usize) -> Result<Vec<f64>> {
    if q < 1 {
        return Err(Error::param("spreading factor must be at least 1"));
    }
    Ok(bpsk(t.bits())
        .into_iter()
        .flat_map(|x| std::iter::repeat_n(x, q))
        .collect())
}

/// Block average over consecutive groups of `q` chips.
pub fn despread(chips: &[f64], q: usize) -> Result<Vec<f64>> {
    if q < 1 {
        return Err(Error::param("spreading factor must be at least 1"));
    }
    if !chips.len().is_multiple_of(q) {
        return Err(Error::param(format!(
            "{} chips are not a multiple of q={q}",
            chips.len()
        )));
    }
    Ok(chips
        .chunks_exact(q)
        .map(|c| c.iter().sum::<f64>() / q as f64)
        .collect())
}

/// `u = rho_s bpsk(s) + rho_t spread(t, q)`.
pub fn superpose(s: &Message, t: &Tag, params: &SystemParams) -> Result<TaggedSignal> {
    check_lengths(s, Some(t), params)?;
    let chips = spread(t, params.q())?;
    let samples = bpsk(s.bits())
        .into_iter()
        .zip(chips)
        .map(|(m, c)| params.rho_s() * m + params.rho_t() * c)
        .collect();
    Ok(TaggedSignal { samples })
}

pub fn awgn(u: &TaggedSignal, noise_var: f64, rng: &mut RngStream) -> Result<ReceivedSignal> {
    if !(noise_var >= 0.0) || !noise_var.is_finite() {
        return Err(Error::param(format!("noise variance must be >= 0, got {noise_var}")));
    }
    let sd = noise_var.sqrt();
    let samples = if noise_var == 0.0 {
        u.samples.clone()
    } else {
        u.samples.iter().map(|x| x + sd * rng.gaussian()).collect()
    };
    Ok(ReceivedSignal { samples, noise_var })
}

/// Removes the known message and despreads; `gamma_t = q rho_t^2 / noise_var`
/// (infinite for a noiseless channel).
pub fn cancel_and_despread(
    r: &ReceivedSignal,
    s: &Message,
    params: &SystemParams,
) -> Result<ObservedTag> {
    check_lengths(s, None, params)?;
    if r.samples.len() != params.l_s() {
        return Err(Error::param(format!(
            "received {} samples, expected l_s={}",
            r.samples.len(),
            params.l_s()
        )));
    }
    let residual: Vec<f64> = r
        .samples
        .iter()
        .zip(bpsk(s.bits()))
        .map(|(x, m)| x - params.rho_s() * m)
        .collect();
    let samples = despread(&residual, params.q())?
        .into_iter()
        .map(|x| x / params.rho_t())
        .collect();
    let gamma_t = if r.noise_var == 0.0 {
        f64::INFINITY
    } else {
        params.q() as f64 * params.rho_t().powi(2) / r.noise_var
    };
    ObservedTag::new(samples, gamma_t)
}

/// Runs superpose, AWGN at the noise level implied by `params.gamma_t()`, and
/// cancellation. `noiseless` forces a zero-variance channel.
pub fn transmit(
    s: &Message,
    t: &Tag,
    params: &SystemParams,
    noiseless: bool,
    rng: &mut RngStream,
) -> Result<ObservedTag> {
    let u = superpose(s, t, params)?;
    let var = if noiseless { 0.0 } else { params.channel_noise_var() };
    let r = awgn(&u, var, rng)?;
    cancel_and_despread(&r, s, params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrDb {
    pub gamma_t_db: f64,
    pub eb_n0_db: f64,
}

/// Tag SNR and the equivalent `Eb/N0 = gamma_t / R_c`, both in dB.
pub fn snr_conversions(params: &SystemParams) -> SnrDb {
    let g = params.gamma_t();
    SnrDb {
        gamma_t_db: 10.0 * g.log10(),
        eb_n0_db: 10.0 * (g / code_rate(params)).log10(),
    }
}

/// Inverse of the Eb/N0 relation: `gamma_t = R_c 10^(eb_n0_db / 10)`.
pub fn gamma_from_eb_n0_db(eb_n0_db: f64, rate: f64) -> f64 {
    rate * 10f64.powf(eb_n0_db / 10.0)
}

fn check_lengths(s: &Message, t: Option<&Tag>, params: &SystemParams) -> Result<()> {
    if s.len() != params.l_s() {
        return Err(Error::param(format!(
            "message has {} bits, expected l_s={}",
            s.len(),
            params.l_s()
        )));
    }
    if let Some(t) = t {
        if t.len() != params.l_t() {
            return Err(Error::param(format!(
                "tag has {} bits, expected l_t={}",
                t.len(),
                params.l_t()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag(s: &str) -> Tag {
        Tag::new(BitVector::parse_bit_string(s).unwrap())
    }

    #[test]
    fn bpsk_convention() {
        let b = BitVector::parse_bit_string("010").unwrap();
        assert_eq!(bpsk(&b), vec![1.0, -1.0, 1.0]);
        assert_eq!(bpsk(&BitVector::zeros(8)), vec![1.0; 8]);
        assert_eq!(slice(&bpsk(&b)), b);
    }

    #[test]
    fn spread_examples() {
        assert_eq!(spread(&tag("10"), 3).unwrap(), vec![-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]);
        assert_eq!(spread(&tag("0110"), 1).unwrap(), bpsk(tag("0110").bits()));
        assert!(spread(&tag("1"), 0).is_err());
        let t = tag("1101001");
        assert_eq!(despread(&spread(&t, 5).unwrap(), 5).unwrap(), bpsk(t.bits()));
    }

    #[test]
    fn superpose_all_zero() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let p = SystemParams::from_parts(8, 2, 4, 2, r, r, 1.0).unwrap();
        let s = Message::new(BitVector::zeros(8));
        let u = superpose(&s, &tag("0000"), &p).unwrap();
        for x in u.samples() {
            assert!((x - std::f64::consts::SQRT_2).abs() < 1e-15);
        }
        assert!(superpose(&s, &tag("000"), &p).is_err());
    }

    #[test]
    fn noiseless_awgn_is_identity() {
        let p = SystemParams::new(4, 4, 3, 0.4, 1.0).unwrap();
        let s = Message::new(BitVector::parse_bit_string("101100111000").unwrap());
        let t = tag("1001");
        let u = superpose(&s, &t, &p).unwrap();
        let mut rng = RngStream::new(0, 0);
        let r = awgn(&u, 0.0, &mut rng).unwrap();
        assert_eq!(r.samples(), u.samples());
        let y = cancel_and_despread(&r, &s, &p).unwrap();
        for (a, b) in y.samples().iter().zip(bpsk(t.bits())) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(awgn(&u, -1.0, &mut rng).is_err());
    }

    #[test]
    fn gamma_from_noise() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let p = SystemParams::from_parts(16, 2, 4, 4, r, r, 4.0).unwrap();
        assert!((p.channel_noise_var() - 0.5).abs() < 1e-15);
        let s = Message::new(BitVector::zeros(16));
        let u = superpose(&s, &tag("0000"), &p).unwrap();
        let r = awgn(&u, 0.5, &mut RngStream::new(1, 1)).unwrap();
        let y = cancel_and_despread(&r, &s, &p).unwrap();
        assert!((y.gamma_t() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn snr_examples() {
        let p = SystemParams::new(8, 16, 1, 0.5, 0.5).unwrap();
        let db = snr_conversions(&p);
        assert!(db.eb_n0_db.abs() < 1e-12);
        let p1 = SystemParams::new(16, 16, 1, 0.5, 1.0).unwrap();
        let db1 = snr_conversions(&p1);
        assert_eq!((db1.gamma_t_db, db1.eb_n0_db), (0.0, 0.0));
        // 0.5 * 10^-0.1
        assert!((gamma_from_eb_n0_db(-1.0, 0.5) - 0.397_164_117_362_140_75).abs() < 1e-15);
    }
}
