//! Bob's correlation detector.
//!
//! The statistic `eta = bpsk(c_B) . y` is Gaussian with variance `L_t/gamma_t`
//! under every hypothesis; its mean is `L_t` for the legitimate key and
//! `L_t - 2 d_H(c_B, c_E)` for an impersonator whose codeword sits at Hamming
//! distance `d_H` from Bob's. The threshold is calibrated against the
//! false-alarm probability averaged over impersonator sub-hypotheses.

use std::f64::consts::LN_2;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::rng::RngStream;
use crate::special::{ln_binomial, log_sum_exp, q_function};
use crate::tag_codec::{check_enumerable, Key, Message, Tag, TagFunction};
use crate::waveform::{bpsk, ObservedTag};

/// Largest key length for the exact mutual-information estimator.
pub const MI_KEY_CAP: usize = 12;

/// Mean and variance of the statistic under both hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisStats {
    pub l_t: usize,
    pub mean_h0: f64,
    pub var: f64,
}

impl HypothesisStats {
    pub fn new(params: &SystemParams) -> Self {
        let l_t = params.l_t();
        Self {
            l_t,
            mean_h0: l_t as f64,
            var: l_t as f64 / params.gamma_t(),
        }
    }

    /// Mean under the impersonation sub-hypothesis at distance `d`.
    pub fn mean_h1_given(&self, d: usize) -> f64 {
        self.l_t as f64 - 2.0 * d as f64
    }

    pub fn sigma(&self) -> f64 {
        self.var.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    /// Distances follow Binomial(L_t, 1/2), the ideal random-codebook law.
    BinomialExact,
    /// Distances sampled from `samples` random (message, impersonator key) pairs.
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub threshold: f64,
    pub target_pfa: f64,
    pub calibration: Calibration,
}

impl DetectorConfig {
    /// Uncalibrated configuration; the threshold starts at `+inf` (reject all).
    pub fn new(target_pfa: f64, calibration: Calibration) -> Result<Self> {
        if !(target_pfa > 0.0 && target_pfa < 1.0) {
            return Err(Error::param(format!("target_pfa must be in (0,1), got {target_pfa}")));
        }
        if let Calibration::MonteCarlo { samples: 0 } = calibration {
            return Err(Error::param("Monte Carlo calibration needs at least one sample"));
        }
        Ok(Self {
            threshold: f64::INFINITY,
            target_pfa,
            calibration,
        })
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }
}

/// Mixture of Gaussian sub-hypotheses with common spread, as seen by the
/// threshold test under H1.
#[derive(Debug, Clone, PartialEq)]
pub struct FalseAlarmModel {
    atoms: Vec<(f64, f64)>,
    sigma: f64,
}

impl FalseAlarmModel {
    /// `atoms` are `(mean, weight)` pairs; weights are normalized here.
    pub fn new(atoms: Vec<(f64, f64)>, sigma: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::param("false-alarm model needs at least one sub-hypothesis"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param(format!("sigma must be positive, got {sigma}")));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0) || atoms.iter().any(|a| a.1 < 0.0 || !a.0.is_finite()) {
            return Err(Error::param("sub-hypothesis weights must be non-negative with positive sum"));
        }
        let atoms = atoms.into_iter().map(|(m, w)| (m, w / total)).collect();
        Ok(Self { atoms, sigma })
    }

    pub fn binomial_exact(params: &SystemParams) -> Self {
        let stats = HypothesisStats::new(params);
        let l_t = params.l_t() as u64;
        let atoms = (0..=l_t)
            .map(|d| {
                let w = (ln_binomial(l_t, d) - l_t as f64 * LN_2).exp();
                (stats.mean_h1_given(d as usize), w)
            })
            .collect();
        Self::new(atoms, stats.sigma()).expect("binomial weights are valid")
    }

    /// Empirical distance law over sampled `(s, k_E)` pairs. Messages are drawn
    /// uniformly from `messages`, or uniformly at random when the list is empty;
    /// impersonator keys are uniform (and may coincide with `k_b`).
    pub fn monte_carlo(
        tf: &TagFunction,
        k_b: &Key,
        messages: &[Message],
        samples: usize,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let params = tf.params();
        let stats = HypothesisStats::new(params);
        let mut counts = vec![0u64; params.l_t() + 1];
        for _ in 0..samples {
            let s = if messages.is_empty() {
                Message::new(rng.bits(params.l_s()))
            } else {
                messages[rng.uniform_index(messages.len())].clone()
            };
            let k_e = Key::new(rng.bits(params.l_k()));
            let d = tf.encode(&s, k_b)?.bits().hamming(tf.encode(&s, &k_e)?.bits())?;
            counts[d] += 1;
        }
        let atoms = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(d, &c)| (stats.mean_h1_given(d), c as f64))
            .collect();
        Self::new(atoms, stats.sigma())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `sum_i w_i Q((threshold - mean_i) / sigma)`.
    pub fn expected_false_alarm(&self, threshold: f64) -> f64 {
        self.atoms
            .iter()
            .map(|&(m, w)| w * q_function((threshold - m) / self.sigma))
            .sum()
    }

    /// Smallest threshold whose expected false-alarm probability is at most
    /// `beta`, located by bisection to `1e-9 * sigma`.
    pub fn calibrate(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::param(format!("target false alarm must be in (0,1), got {beta}")));
        }
        let (lo_mean, hi_mean) = self
            .atoms
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(a.0), hi.max(a.0)));
        let mut lo = lo_mean - 40.0 * self.sigma;
        let mut hi = hi_mean + 40.0 * self.sigma;
        let fa_lo = self.expected_false_alarm(lo);
        if fa_lo <= beta {
            return Err(Error::Calibration(format!(
                "target false alarm {beta} is not below the largest achievable value {fa_lo}"
            )));
        }
        let fa_hi = self.expected_false_alarm(hi);
        if fa_hi > beta {
            return Err(Error::Calibration(format!(
                "false alarm {fa_hi} at threshold {hi} still exceeds target {beta}"
            )));
        }
        let tol = 1e-9 * self.sigma;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.expected_false_alarm(mid) <= beta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Threshold for a noiseless channel, where every sub-hypothesis is a
    /// point mass at its mean. Atoms are admitted from the top while their
    /// total weight stays within `beta`; the threshold sits midway between the
    /// last admitted mean and the next one down.
    pub fn calibrate_noiseless(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::param(format!("target false alarm must be in (0,1), got {beta}")));
        }
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (m, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == m => last.1 += w,
                _ => merged.push((m, w)),
            }
        }
        let mut cum = 0.0;
        for (i, &(m, w)) in merged.iter().enumerate() {
            if cum + w > beta {
                return Ok(if i == 0 { m + 1.0 } else { 0.5 * (merged[i - 1].0 + m) });
            }
            cum += w;
        }
        Err(Error::Calibration(format!(
            "target false alarm {beta} is not below the largest achievable value {cum}"
        )))
    }

    /// False-alarm probability of `threshold` on a noiseless channel.
    pub fn noiseless_false_alarm(&self, threshold: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 >= threshold).map(|a| a.1).sum()
    }
}

/// `eta = bpsk(c_b) . y`.
pub fn statistic(y: &ObservedTag, c_b: &Tag) -> Result<f64> {
    if y.len() != c_b.len() {
        return Err(Error::param(format!(
            "observation has {} samples but the codeword has {} bits",
            y.len(),
            c_b.len()
        )));
    }
    Ok(correlate(y.samples(), c_b.bits()))
}

pub(crate) fn correlate(y: &[f64], c: &BitVector) -> f64 {
    y.iter()
        .zip(c.iter())
        .map(|(&v, b)| if b { -v } else { v })
        .sum()
}

/// Builds the false-alarm model requested by `cfg` and calibrates it.
pub fn calibrate_threshold(
    tf: &TagFunction,
    params: &SystemParams,
    cfg: &DetectorConfig,
    k_b: &Key,
    messages: &[Message],
    rng: &mut RngStream,
) -> Result<f64> {
    false_alarm_model(tf, params, cfg, k_b, messages, rng)?.calibrate(cfg.target_pfa)
}

pub fn false_alarm_model(
    tf: &TagFunction,
    params: &SystemParams,
    cfg: &DetectorConfig,
    k_b: &Key,
    messages: &[Message],
    rng: &mut RngStream,
) -> Result<FalseAlarmModel> {
    match cfg.calibration {
        Calibration::BinomialExact => Ok(FalseAlarmModel::binomial_exact(params)),
        Calibration::MonteCarlo { samples } => {
            let tf = tf.with_params(*params)?;
            FalseAlarmModel::monte_carlo(&tf, k_b, messages, samples, rng)
        }
    }
}

/// `P_D = Q((threshold - L_t) / sqrt(L_t / gamma_t))`.
pub fn detection_probability(threshold: f64, params: &SystemParams) -> f64 {
    let stats = HypothesisStats::new(params);
    q_function((threshold - stats.mean_h0) / stats.sigma())
}

/// Largest false-alarm probability over every listed message and every
/// impersonator key other than `k_b`, with the maximizing pair.
pub fn worst_case_false_alarm(
    tf: &TagFunction,
    k_b: &Key,
    messages: &[Message],
    threshold: f64,
) -> Result<(f64, Message, Key)> {
    let found = crate::adversary::impersonation_search(tf, k_b, messages)?;
    let stats = HypothesisStats::new(tf.params());
    let fa = q_function((threshold - stats.mean_h1_given(found.distance)) / stats.sigma());
    Ok((fa, found.message, found.key))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub decision: Decision,
    pub statistic: f64,
}

/// Accepts iff `statistic(y, tau(s, k_b)) >= cfg.threshold`.
pub fn verify(
    y: &ObservedTag,
    s: &Message,
    k_b: &Key,
    tf: &TagFunction,
    cfg: &DetectorConfig,
) -> Result<Verification> {
    let c_b = tf.encode(s, k_b)?;
    let eta = statistic(y, &c_b)?;
    let decision = if eta >= cfg.threshold {
        Decision::Accept
    } else {
        Decision::Reject
    };
    Ok(Verification {
        decision,
        statistic: eta,
    })
}

/// `d(alpha, beta) = alpha log2(alpha/(1-beta)) + (1-alpha) log2((1-alpha)/beta)`.
pub fn d_alpha_beta(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!(
            "d(alpha, beta) needs both arguments in (0,1), got ({alpha}, {beta})"
        )));
    }
    Ok(alpha * (alpha / (1.0 - beta)).log2() + (1.0 - alpha) * ((1.0 - alpha) / beta).log2())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub bits: f64,
    pub std_err: f64,
}

/// Monte Carlo estimate of `I(Y;K)` for the code `C(s)` with the sum over
/// keys in the mixture density evaluated exactly.
pub fn mutual_information_exact(
    tf: &TagFunction,
    s: &Message,
    params: &SystemParams,
    n_mc: usize,
    rng: &mut RngStream,
) -> Result<MiEstimate> {
    if params.l_k() > MI_KEY_CAP {
        return Err(Error::capability(format!(
            "exact mutual information is limited to l_k <= {MI_KEY_CAP}, got {}",
            params.l_k()
        )));
    }
    check_enumerable(params.l_k())?;
    let tf = tf.with_params(*params)?;
    let book = tf.codebook(s)?;
    mutual_information_codebook(&book, params.gamma_t(), n_mc, rng)
}

/// Same estimator on an explicit codebook with uniform prior over codewords.
///
/// Each draw picks a codeword index `k`, forms `y = bpsk(c_k) + w` and scores
/// `log2(p(y|k) / mean_k' p(y|k'))`, using that the Gaussian log-likelihood
/// is `gamma * (y . x_k')` up to terms common to all keys.
pub fn mutual_information_codebook(
    book: &[Tag],
    gamma_t: f64,
    n_mc: usize,
    rng: &mut RngStream,
) -> Result<MiEstimate> {
    if n_mc < 2 {
        return Err(Error::param("need at least two Monte Carlo draws"));
    }
    if book.is_empty() {
        return Err(Error::param("empty codebook"));
    }
    let symbols: Vec<Vec<f64>> = book.iter().map(|c| bpsk(c.bits())).collect();
    let l_t = symbols[0].len();
    let ln_m = (book.len() as f64).ln();
    let sd = (1.0 / gamma_t).sqrt();
    let mut y = vec![0.0; l_t];
    let mut scores = vec![0.0; book.len()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_mc {
        let k = rng.uniform_index(book.len());
        for (yi, xi) in y.iter_mut().zip(&symbols[k]) {
            *yi = xi + sd * rng.gaussian();
        }
        for (score, x) in scores.iter_mut().zip(&symbols) {
            *score = gamma_t * x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        }
        let v = (scores[k] - log_sum_exp(&scores) + ln_m) / LN_2;
        sum += v;
        sum_sq += v * v;
    }
    let n = n_mc as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(MiEstimate {
        bits: mean,
        std_err: (var / n).sqrt(),
    })
}
