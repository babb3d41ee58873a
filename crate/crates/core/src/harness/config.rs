//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # desk scale
//! l_k = 8
//! l_t = 16
//! sweep = -1, 3, 7        # or start:step:stop
//! tag_function = seeded_random_codebook
//! ```
//!
//! Blank lines and `#` comments are ignored; every key may appear at most once.

use std::path::Path;

use crate::detector::Calibration;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::tag_codec::{TagFunction, ENUMERATION_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagFunctionSpec {
    SeededRandomCodebook { seed: u64 },
    KeyedHash,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackSpec {
    None,
    Ml,
    Impersonation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Link parameters; `gamma_t` is a placeholder replaced at each sweep point.
    pub params: SystemParams,
    pub tag_function: TagFunctionSpec,
    /// Eb/N0 grid in dB.
    pub sweep: Vec<f64>,
    pub trials: u64,
    pub target_pfa: f64,
    pub master_seed: u64,
    pub attack: AttackSpec,
    pub calibration: Calibration,
    /// Thread count; 0 lets the pool pick.
    pub workers: usize,
    /// Forces a zero-variance channel for legitimate and impersonated frames.
    pub noiseless: bool,
    /// Eve's SNR as a multiple of Bob's `gamma_t`.
    pub gamma_eve: f64,
    /// Messages drawn for impersonation searches and worst-case false alarm.
    pub num_messages: usize,
}

pub const KEYS: &[&str] = &[
    "l_k",
    "l_t",
    "q",
    "rho_t",
    "tag_function",
    "codebook_seed",
    "sweep",
    "trials",
    "target_pfa",
    "master_seed",
    "attack",
    "calibration",
    "calibration_samples",
    "workers",
    "noiseless",
    "gamma_eve",
    "num_messages",
];

struct Entry {
    line: usize,
    value: String,
}

impl ExperimentConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(0, "", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(&str, Entry)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::config(line, "", format!("expected `key = value`, got `{content}`")));
            };
            let key = key.trim();
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(Error::config(line, key, "unknown key"));
            };
            if let Some((_, prev)) = entries.iter().find(|(k, _)| *k == known) {
                return Err(Error::config(line, key, format!("duplicate key (first set on line {})", prev.line)));
            }
            entries.push((
                known,
                Entry {
                    line,
                    value: value.trim().to_string(),
                },
            ));
        }
        let get = |key: &str| entries.iter().find(|(k, _)| *k == key).map(|(_, e)| e);

        let l_k: usize = required(get("l_k"), "l_k")?;
        let l_t: usize = required(get("l_t"), "l_t")?;
        let q: usize = optional(get("q"), "q", 1)?;
        let rho_t: f64 = optional(get("rho_t"), "rho_t", 0.5)?;
        let params = SystemParams::new(l_k, l_t, q, rho_t, 1.0).map_err(|e| {
            let line = get("rho_t").or(get("l_t")).map_or(0, |e| e.line);
            Error::config(line, "params", e.to_string())
        })?;
        if l_k > l_t {
            return Err(Error::config(
                line_of(get("l_k")),
                "l_k",
                format!("key length {l_k} exceeds tag length {l_t}; code rate must be <= 1"),
            ));
        }

        let seed: u64 = optional(get("codebook_seed"), "codebook_seed", 0)?;
        let tag_function = match get("tag_function").map(|e| e.value.as_str()) {
            None | Some("keyed_hash") => TagFunctionSpec::KeyedHash,
            Some("seeded_random_codebook") => {
                if l_k > ENUMERATION_CAP {
                    return Err(Error::config(
                        line_of(get("tag_function")),
                        "tag_function",
                        format!("seeded_random_codebook needs l_k <= {ENUMERATION_CAP}"),
                    ));
                }
                TagFunctionSpec::SeededRandomCodebook { seed }
            }
            Some(other) => {
                return Err(Error::config(
                    line_of(get("tag_function")),
                    "tag_function",
                    format!("expected seeded_random_codebook or keyed_hash, got `{other}`"),
                ))
            }
        };

        let sweep_entry = get("sweep").ok_or_else(|| Error::config(0, "sweep", "missing required key"))?;
        let sweep = parse_sweep(&sweep_entry.value)
            .map_err(|m| Error::config(sweep_entry.line, "sweep", m))?;

        let trials: u64 = optional(get("trials"), "trials", 1000)?;
        if trials < 1 {
            return Err(Error::config(line_of(get("trials")), "trials", "must be at least 1"));
        }
        let target_pfa: f64 = optional(get("target_pfa"), "target_pfa", 0.01)?;
        if !(target_pfa > 0.0 && target_pfa < 1.0) {
            return Err(Error::config(line_of(get("target_pfa")), "target_pfa", "must be in (0,1)"));
        }
        let master_seed: u64 = optional(get("master_seed"), "master_seed", 0)?;
        let attack = match get("attack").map(|e| e.value.as_str()) {
            None | Some("none") => AttackSpec::None,
            Some("ml") => AttackSpec::Ml,
            Some("impersonation") => AttackSpec::Impersonation,
            Some(other) => {
                return Err(Error::config(
                    line_of(get("attack")),
                    "attack",
                    format!("expected ml, impersonation or none, got `{other}`"),
                ))
            }
        };
        let samples: usize = optional(get("calibration_samples"), "calibration_samples", 10_000)?;
        let calibration = match get("calibration").map(|e| e.value.as_str()) {
            None | Some("binomial_exact") => Calibration::BinomialExact,
            Some("monte_carlo") => {
                if samples == 0 {
                    return Err(Error::config(
                        line_of(get("calibration_samples")),
                        "calibration_samples",
                        "must be at least 1",
                    ));
                }
                Calibration::MonteCarlo { samples }
            }
            Some(other) => {
                return Err(Error::config(
                    line_of(get("calibration")),
                    "calibration",
                    format!("expected binomial_exact or monte_carlo, got `{other}`"),
                ))
            }
        };
        let workers: usize = optional(get("workers"), "workers", 0)?;
        let noiseless: bool = optional(get("noiseless"), "noiseless", false)?;
        let gamma_eve: f64 = optional(get("gamma_eve"), "gamma_eve", 1.0)?;
        if !(gamma_eve > 0.0 && gamma_eve.is_finite()) {
            return Err(Error::config(line_of(get("gamma_eve")), "gamma_eve", "must be positive"));
        }
        let num_messages: usize = optional(get("num_messages"), "num_messages", 4)?;
        if num_messages < 1 {
            return Err(Error::config(line_of(get("num_messages")), "num_messages", "must be at least 1"));
        }

        Ok(Self {
            params,
            tag_function,
            sweep,
            trials,
            target_pfa,
            master_seed,
            attack,
            calibration,
            workers,
            noiseless,
            gamma_eve,
            num_messages,
        })
    }

    /// Tag function at the given link parameters.
    pub fn build_tag_function(&self, params: SystemParams) -> Result<TagFunction> {
        match self.tag_function {
            TagFunctionSpec::SeededRandomCodebook { seed } => TagFunction::seeded_random_codebook(params, seed),
            TagFunctionSpec::KeyedHash => Ok(TagFunction::keyed_hash(params)),
        }
    }
}

fn line_of(e: Option<&Entry>) -> usize {
    e.map_or(0, |e| e.line)
}

fn required<T: std::str::FromStr>(e: Option<&Entry>, field: &str) -> Result<T> {
    let e = e.ok_or_else(|| Error::config(0, field, "missing required key"))?;
    parse_value(e, field)
}

fn optional<T: std::str::FromStr>(e: Option<&Entry>, field: &str, default: T) -> Result<T> {
    match e {
        Some(e) => parse_value(e, field),
        None => Ok(default),
    }
}

fn parse_value<T: std::str::FromStr>(e: &Entry, field: &str) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| Error::config(e.line, field, format!("cannot parse `{}`", e.value)))
}

/// `a, b, c` or `start:step:stop` (inclusive of `stop` up to rounding).
pub fn parse_sweep(value: &str) -> std::result::Result<Vec<f64>, String> {
    let value = value.trim();
    if value.is_empty() {
        return Err("sweep must not be empty".into());
    }
    let num = |s: &str| -> std::result::Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("cannot parse `{}`", s.trim()))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite value `{}`", s.trim()))
        }
    };
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err("range must be start:step:stop".into());
        }
        let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err("range needs step > 0 and stop >= start".into());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 100_000 {
            return Err("range has too many points".into());
        }
        Ok((0..=n).map(|i| start + i as f64 * step).collect())
    } else {
        value.split(',').map(num).collect()
    }
}
