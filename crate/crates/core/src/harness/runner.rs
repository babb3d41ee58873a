//! Seeded sweeps. Every trial draws from its own stream
//! `RngStream::for_trial(master_seed, point, trial)` and the per-point setup
//! (Bob's key, message lists, Monte Carlo calibration) from a dedicated setup
//! stream, so tallies are integer sums that do not depend on scheduling.

use rayon::prelude::*;

use crate::adversary::{impersonation_far, impersonation_search, ml_decode};
use crate::bounds::{p_spb, security_margin, SpbResult};
use crate::detector::{
    detection_probability, false_alarm_model, verify, worst_case_false_alarm,
    Decision, DetectorConfig, FalseAlarmModel,
};
use crate::error::{Error, Result};
use crate::harness::config::{AttackSpec, ExperimentConfig};
use crate::harness::table::Table;
use crate::params::SystemParams;
use crate::rng::RngStream;
use crate::tag_codec::{check_enumerable, code_rate, Key, Message, TagFunction, ENUMERATION_CAP};
use crate::waveform::{gamma_from_eb_n0_db, transmit};

pub const AUTH_COLUMNS: &[&str] = &[
    "eb_n0_db",
    "gamma_t",
    "threshold",
    "p_d_empirical",
    "p_d_closed_form",
    "p_fa_empirical",
    "p_spb",
    "c2",
    "info_secure",
];

pub const ML_ATTACK_COLUMNS: &[&str] = &[
    "eb_n0_db",
    "gamma_t",
    "gamma_eve",
    "trials",
    "errors",
    "p_e_empirical",
    "p_e_std_err",
    "p_spb",
    "ratio",
];

pub const IMPERSONATION_COLUMNS: &[&str] = &[
    "eb_n0_db",
    "gamma_t",
    "threshold",
    "d_star",
    "far_closed_form",
    "far_empirical",
    "far_std_err",
];

pub const BOUNDS_COLUMNS: &[&str] = &["eb_n0_db", "gamma_t", "rc", "c2", "p_spb", "theta", "abs_error_est"];

pub const CALIBRATE_COLUMNS: &[&str] = &[
    "eb_n0_db",
    "gamma_t",
    "threshold",
    "expected_pfa",
    "worst_case_pfa",
    "p_d_closed_form",
];

const SETUP_STREAM: u64 = 1 << 63;

/// Per-point stream for everything that is not an individual trial.
pub fn setup_stream(master_seed: u64, point: usize) -> RngStream {
    RngStream::new(master_seed, SETUP_STREAM | point as u64)
}

/// Runs `f` on a pool of `workers` threads (0 = pool default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        builder = builder.num_threads(workers);
    }
    let pool = builder.build().map_err(Error::io)?;
    Ok(pool.install(f))
}

/// Sums per-trial counters `f(trial)` over `0..trials` in parallel.
pub fn count_trials<const N: usize, F>(trials: u64, f: F) -> Result<[u64; N]>
where
    F: Fn(u64) -> Result<[u64; N]> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).try_reduce(
        || [0u64; N],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            Ok(a)
        },
    )
}

struct Point {
    index: usize,
    eb_n0_db: f64,
    params: SystemParams,
}

fn points(cfg: &ExperimentConfig) -> Result<Vec<Point>> {
    let rc = code_rate(&cfg.params);
    cfg.sweep
        .iter()
        .enumerate()
        .map(|(index, &eb_n0_db)| {
            let gamma = gamma_from_eb_n0_db(eb_n0_db, rc);
            Ok(Point {
                index,
                eb_n0_db,
                params: cfg.params.with_gamma_t(gamma)?,
            })
        })
        .collect()
}

fn random_messages(rng: &mut RngStream, params: &SystemParams, n: usize) -> Vec<Message> {
    (0..n).map(|_| Message::new(rng.bits(params.l_s()))).collect()
}

fn spb_at(params: &SystemParams) -> Result<SpbResult> {
    p_spb(params.l_t(), code_rate(params), params.gamma_t())
}

/// Calibrated false-alarm model and threshold; point-mass calibration when
/// the channel is forced noiseless.
#[allow(clippy::too_many_arguments)]
fn calibrated(
    cfg: &ExperimentConfig,
    tf: &TagFunction,
    params: &SystemParams,
    k_b: &Key,
    messages: &[Message],
    setup: &mut RngStream,
) -> Result<(DetectorConfig, FalseAlarmModel)> {
    let det = DetectorConfig::new(cfg.target_pfa, cfg.calibration)?;
    let model = false_alarm_model(tf, params, &det, k_b, messages, setup)?;
    let threshold = if cfg.noiseless {
        model.calibrate_noiseless(cfg.target_pfa)?
    } else {
        model.calibrate(cfg.target_pfa)?
    };
    Ok((det.with_threshold(threshold), model))
}

fn closed_form_detection(cfg: &ExperimentConfig, threshold: f64, params: &SystemParams) -> f64 {
    if cfg.noiseless {
        if params.l_t() as f64 >= threshold {
            1.0
        } else {
            0.0
        }
    } else {
        detection_probability(threshold, params)
    }
}

fn binomial_std_err(successes: u64, trials: u64) -> f64 {
    let p = successes as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Legitimate and random-key impersonation trials at every sweep point.
pub fn run_auth_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    with_workers(cfg.workers, || auth_sweep(cfg))?
}

fn auth_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(AUTH_COLUMNS);
    for pt in points(cfg)? {
        let params = pt.params;
        let tf = cfg.build_tag_function(params)?;
        let mut setup = setup_stream(cfg.master_seed, pt.index);
        let k_b = Key::new(setup.bits(params.l_k()));
        let (det, _) = calibrated(cfg, &tf, &params, &k_b, &[], &mut setup)?;

        let [legit, forged] = count_trials(cfg.trials, |trial| {
            let mut rng = RngStream::for_trial(cfg.master_seed, pt.index, trial);
            let s = Message::new(rng.bits(params.l_s()));
            let y = transmit(&s, &tf.encode(&s, &k_b)?, &params, cfg.noiseless, &mut rng)?;
            let legit = verify(&y, &s, &k_b, &tf, &det)?.decision == Decision::Accept;
            let k_e = Key::new(rng.bits(params.l_k()));
            let y_e = transmit(&s, &tf.encode(&s, &k_e)?, &params, cfg.noiseless, &mut rng)?;
            let forged = verify(&y_e, &s, &k_b, &tf, &det)?.decision == Decision::Accept;
            Ok([legit as u64, forged as u64])
        })?;

        let spb = spb_at(&params)?;
        let margin = security_margin(&params)?;
        let n = cfg.trials as f64;
        table.push(vec![
            Table::num(pt.eb_n0_db),
            Table::num(params.gamma_t()),
            Table::num(det.threshold),
            Table::num(legit as f64 / n),
            Table::num(closed_form_detection(cfg, det.threshold, &params)),
            Table::num(forged as f64 / n),
            Table::num(spb.p_e_lower),
            Table::num(margin.c2),
            margin.info_secure.to_string(),
        ]);
    }
    Ok(table)
}

/// Key-recovery (`attack = ml` or `none`) or impersonation sweep.
pub fn run_attack_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    check_enumerable(cfg.params.l_k())?;
    with_workers(cfg.workers, || match cfg.attack {
        AttackSpec::Ml | AttackSpec::None => ml_sweep(cfg),
        AttackSpec::Impersonation => impersonation_sweep(cfg),
    })?
}

fn ml_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(ML_ATTACK_COLUMNS);
    for pt in points(cfg)? {
        let eve = pt.params.with_gamma_t(cfg.gamma_eve * pt.params.gamma_t())?;
        let tf = cfg.build_tag_function(eve)?;
        let [errors] = count_trials(cfg.trials, |trial| {
            let mut rng = RngStream::for_trial(cfg.master_seed, pt.index, trial);
            let s = Message::new(rng.bits(eve.l_s()));
            let k = Key::new(rng.bits(eve.l_k()));
            let y = transmit(&s, &tf.encode(&s, &k)?, &eve, cfg.noiseless, &mut rng)?;
            let guess = ml_decode(&tf, &s, &y)?.guessed_key;
            Ok([(guess.as_ref() != Some(&k)) as u64])
        })?;
        let p_e = errors as f64 / cfg.trials as f64;
        let spb = spb_at(&eve)?.p_e_lower;
        table.push(vec![
            Table::num(pt.eb_n0_db),
            Table::num(pt.params.gamma_t()),
            Table::num(eve.gamma_t()),
            cfg.trials.to_string(),
            errors.to_string(),
            Table::num(p_e),
            Table::num(binomial_std_err(errors, cfg.trials)),
            Table::num(spb),
            Table::num(p_e / spb),
        ]);
    }
    Ok(table)
}

/// Number of accepted frames when the sender keys `s` with `k_sender` and Bob
/// verifies against `k_b`.
#[allow(clippy::too_many_arguments)]
pub fn count_acceptances(
    tf: &TagFunction,
    s: &Message,
    k_sender: &Key,
    k_b: &Key,
    det: &DetectorConfig,
    trials: u64,
    master_seed: u64,
    point: usize,
    noiseless: bool,
) -> Result<u64> {
    let params = *tf.params();
    let tag = tf.encode(s, k_sender)?;
    let [accepted] = count_trials(trials, |trial| {
        let mut rng = RngStream::for_trial(master_seed, point, trial);
        let y = transmit(s, &tag, &params, noiseless, &mut rng)?;
        Ok([(verify(&y, s, k_b, tf, det)?.decision == Decision::Accept) as u64])
    })?;
    Ok(accepted)
}

fn impersonation_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(IMPERSONATION_COLUMNS);
    for pt in points(cfg)? {
        let params = pt.params;
        let tf = cfg.build_tag_function(params)?;
        let mut setup = setup_stream(cfg.master_seed, pt.index);
        let k_b = Key::new(setup.bits(params.l_k()));
        let messages = random_messages(&mut setup, &params, cfg.num_messages);
        let (det, _) = calibrated(cfg, &tf, &params, &k_b, &messages, &mut setup)?;
        let best = impersonation_search(&tf, &k_b, &messages)?;
        let accepted = count_acceptances(
            &tf,
            &best.message,
            &best.key,
            &k_b,
            &det,
            cfg.trials,
            cfg.master_seed,
            pt.index,
            cfg.noiseless,
        )?;
        table.push(vec![
            Table::num(pt.eb_n0_db),
            Table::num(params.gamma_t()),
            Table::num(det.threshold),
            best.distance.to_string(),
            Table::num(impersonation_far(best.distance, det.threshold, &params)?),
            Table::num(accepted as f64 / cfg.trials as f64),
            Table::num(binomial_std_err(accepted, cfg.trials)),
        ]);
    }
    Ok(table)
}

/// Capacity and sphere-packing bound over an Eb/N0 grid.
pub fn tabulate_bounds(l_t: usize, r_c: f64, sweep: &[f64]) -> Result<Table> {
    if !(r_c > 0.0 && r_c <= 1.0) {
        return Err(Error::param(format!("code rate must be in (0,1], got {r_c}")));
    }
    let rows: Vec<Vec<String>> = sweep
        .par_iter()
        .map(|&db| {
            let gamma = gamma_from_eb_n0_db(db, r_c);
            let spb = p_spb(l_t, r_c, gamma)?;
            let c2 = crate::bounds::capacity_biawgn(gamma)?.c2;
            Ok(vec![
                Table::num(db),
                Table::num(gamma),
                Table::num(r_c),
                Table::num(c2),
                Table::num(spb.p_e_lower),
                Table::num(spb.theta),
                Table::num(spb.abs_error_est),
            ])
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(BOUNDS_COLUMNS);
    for row in rows {
        table.push(row);
    }
    Ok(table)
}

/// Bounds table for the configured tag length and code rate.
pub fn run_bounds(cfg: &ExperimentConfig) -> Result<Table> {
    with_workers(cfg.workers, || tabulate_bounds(cfg.params.l_t(), code_rate(&cfg.params), &cfg.sweep))?
}

/// Calibrated thresholds, with worst-case false alarm when keys are enumerable.
pub fn run_calibrate(cfg: &ExperimentConfig) -> Result<Table> {
    with_workers(cfg.workers, || calibrate_sweep(cfg))?
}

fn calibrate_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(CALIBRATE_COLUMNS);
    for pt in points(cfg)? {
        let params = pt.params;
        let tf = cfg.build_tag_function(params)?;
        let mut setup = setup_stream(cfg.master_seed, pt.index);
        let k_b = Key::new(setup.bits(params.l_k()));
        let messages = random_messages(&mut setup, &params, cfg.num_messages);
        let (det, model) = calibrated(cfg, &tf, &params, &k_b, &messages, &mut setup)?;
        let threshold = det.threshold;
        let worst = if params.l_k() <= ENUMERATION_CAP {
            Table::num(worst_case_false_alarm(&tf, &k_b, &messages, threshold)?.0)
        } else {
            String::new()
        };
        table.push(vec![
            Table::num(pt.eb_n0_db),
            Table::num(params.gamma_t()),
            Table::num(threshold),
            Table::num(if cfg.noiseless {
                model.noiseless_false_alarm(threshold)
            } else {
                model.expected_false_alarm(threshold)
            }),
            worst,
            Table::num(closed_form_detection(cfg, threshold, &params)),
        ]);
    }
    Ok(table)
}
