use plauth::adversary::{impersonation_far, impersonation_search, ml_decode, recover_key_noiseless};
use plauth::bounds::{capacity_biawgn, p_spb};
use plauth::detector::{
    d_alpha_beta, detection_probability, mutual_information_exact, statistic, verify, Calibration,
    DetectorConfig,
};
use plauth::tag_codec::{hamming_distance, TagFunction};
use plauth::waveform::{bpsk, ObservedTag};
use plauth::{BitVector, Key, Message, RngStream, SystemParams, Tag};
use proptest::prelude::*;

fn bits(len: usize) -> impl Strategy<Value = BitVector> {
    proptest::collection::vec(any::<bool>(), len).prop_map(|v| BitVector::from_bools(&v))
}

fn params(l_k: usize, l_t: usize, gamma: f64) -> SystemParams {
    SystemParams::new(l_k, l_t, 1, 0.5, gamma).unwrap()
}

proptest! {
    #[test]
    fn hamming_is_a_metric(a in bits(37), b in bits(37), c in bits(37)) {
        let d = |x: &BitVector, y: &BitVector| x.hamming(y).unwrap();
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert_eq!(d(&a, &b) == 0, a == b);
        prop_assert_eq!(d(&a, &a.complement()), 37);
    }

    #[test]
    fn canonical_bytes_round_trip(a in (0..70usize).prop_flat_map(bits)) {
        let back = BitVector::from_canonical_bytes(&a.to_canonical_bytes()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn keyed_hash_is_deterministic(s in bits(32), k in bits(16)) {
        let tf = TagFunction::keyed_hash(params(16, 32, 1.0));
        let (s, k) = (Message::new(s), Key::new(k));
        let a = tf.encode(&s, &k).unwrap();
        prop_assert_eq!(a.len(), 32);
        prop_assert_eq!(a, tf.encode(&s, &k).unwrap());
    }

    #[test]
    fn ml_decode_ignores_positive_scaling(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let p = params(6, 16, 0.7);
        let tf = TagFunction::seeded_random_codebook(p, 3).unwrap();
        let mut rng = RngStream::new(seed, 0);
        let s = Message::new(rng.bits(16));
        let k = Key::new(rng.bits(6));
        let y = ObservedTag::through_equivalent_channel(&tf.encode(&s, &k).unwrap(), 0.7, &mut rng).unwrap();
        let a = ml_decode(&tf, &s, &y).unwrap().guessed_key;
        let b = ml_decode(&tf, &s, &y.scaled(scale)).unwrap().guessed_key;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn verify_is_scale_homogeneous(seed in any::<u64>(), scale in 0.01f64..100.0, rho in -20.0f64..40.0) {
        let p = params(8, 32, 0.5);
        let tf = TagFunction::keyed_hash(p);
        let mut rng = RngStream::new(seed, 1);
        let s = Message::new(rng.bits(32));
        let k = Key::new(rng.bits(8));
        let y = ObservedTag::through_equivalent_channel(&tf.encode(&s, &k).unwrap(), 0.5, &mut rng).unwrap();
        let base = DetectorConfig::new(0.01, Calibration::BinomialExact).unwrap();
        let a = verify(&y, &s, &k, &tf, &base.with_threshold(rho)).unwrap();
        let b = verify(&y.scaled(scale), &s, &k, &tf, &base.with_threshold(rho * scale)).unwrap();
        prop_assert_eq!(a.decision, b.decision);
    }

    #[test]
    fn d_alpha_beta_is_non_negative(alpha in 0.001f64..0.999, frac in 0.0f64..1.0) {
        // any beta with alpha <= 1 - beta
        let beta = (1.0 - alpha) * frac.max(1e-3);
        prop_assume!(beta > 0.0 && beta < 1.0);
        prop_assert!(d_alpha_beta(alpha, beta).unwrap() >= -1e-12);
        prop_assert!(d_alpha_beta(alpha, 1.0 - alpha).unwrap().abs() < 1e-12);
    }

    #[test]
    fn detection_probability_decreases(t in 100.0f64..400.0, dt in 0.01f64..10.0) {
        let p = params(128, 256, 0.397);
        prop_assert!(detection_probability(t, &p) > detection_probability(t + dt, &p));
    }

    #[test]
    fn impersonation_far_grows_as_distance_shrinks(d in 1usize..=16, rho in -16.0f64..16.0) {
        let p = params(8, 16, 1.0);
        prop_assert!(impersonation_far(d - 1, rho, &p).unwrap() >= impersonation_far(d, rho, &p).unwrap());
    }

    #[test]
    fn rng_streams_replay(master in any::<u64>(), stream in any::<u64>()) {
        let mut a = RngStream::new(master, stream);
        let mut b = RngStream::new(master, stream);
        let mut c = RngStream::new(master, stream ^ 1);
        let xa: Vec<f64> = (0..8).map(|_| a.gaussian()).collect();
        let xb: Vec<f64> = (0..8).map(|_| b.gaussian()).collect();
        let xc: Vec<f64> = (0..8).map(|_| c.gaussian()).collect();
        prop_assert_eq!(&xa, &xb);
        prop_assert_ne!(&xa, &xc);
    }
}

#[test]
fn noiseless_ml_matches_table_lookup() {
    let p = params(8, 24, 1.0);
    let tf = TagFunction::seeded_random_codebook(p, 11).unwrap();
    let mut rng = RngStream::new(5, 5);
    for _ in 0..20 {
        let s = Message::new(rng.bits(24));
        let book = tf.codebook(&s).unwrap();
        let mut sorted = book.clone();
        sorted.sort_by(|a, b| a.bits().as_packed().cmp(b.bits().as_packed()));
        sorted.dedup();
        if sorted.len() != book.len() {
            continue;
        }
        let k = Key::new(rng.bits(8));
        let t = tf.encode(&s, &k).unwrap();
        let y = ObservedTag::new(bpsk(t.bits()), f64::INFINITY).unwrap();
        let ml = ml_decode(&tf, &s, &y).unwrap();
        let lookup = recover_key_noiseless(&tf, &s, &t).unwrap();
        assert_eq!(ml.guessed_key, lookup.guessed_key);
        assert_eq!(lookup.guessed_key, Some(k));
    }
}

#[test]
fn impersonation_search_matches_triple_loop() {
    let p = params(4, 16, 1.0);
    let tf = TagFunction::seeded_random_codebook(p, 9).unwrap();
    let mut rng = RngStream::new(1, 2);
    let messages: Vec<Message> = (0..4).map(|_| Message::new(rng.bits(16))).collect();
    for kb in 0..16u64 {
        let k_b = Key::from_index(kb, 4).unwrap();
        let mut best: Option<(usize, usize, u64)> = None;
        for (mi, s) in messages.iter().enumerate() {
            for ke in 0..16u64 {
                if ke == kb {
                    continue;
                }
                let d = hamming_distance(
                    &tf.encode(s, &k_b).unwrap(),
                    &tf.encode(s, &Key::from_index(ke, 4).unwrap()).unwrap(),
                )
                .unwrap();
                if best.is_none_or(|(bd, ..)| d < bd) {
                    best = Some((d, mi, ke));
                }
            }
        }
        let (d, mi, ke) = best.unwrap();
        let got = impersonation_search(&tf, &k_b, &messages).unwrap();
        assert_eq!(got.distance, d);
        assert_eq!(got.message, messages[mi]);
        assert_eq!(got.key, Key::from_index(ke, 4).unwrap());
    }
}

/// Pairwise distances of independent keyed-hash tags follow Binomial(16, 1/2).
#[test]
fn keyed_hash_distances_are_binomial() {
    let p = params(32, 16, 1.0);
    let tf = TagFunction::keyed_hash(p);
    let mut rng = RngStream::new(77, 0);
    let n = 4000;
    let mut counts = [0u64; 17];
    for _ in 0..n {
        let s = Message::new(rng.bits(16));
        let a = tf.encode(&s, &Key::new(rng.bits(32))).unwrap();
        let b = tf.encode(&s, &Key::new(rng.bits(32))).unwrap();
        counts[hamming_distance(&a, &b).unwrap()] += 1;
    }
    // bins 0..=4 and 12..=16 pooled so every expected count exceeds 5
    let pmf = |d: u64| (1..=d).fold(1.0, |acc, i| acc * (17 - i) as f64 / i as f64) / 65536.0;
    let bins: Vec<(Vec<u64>, f64)> = std::iter::once((0..=4).collect::<Vec<_>>())
        .chain((5..=11).map(|d| vec![d]))
        .chain(std::iter::once((12..=16).collect()))
        .map(|ds| {
            let e: f64 = ds.iter().map(|&d| pmf(d)).sum::<f64>() * n as f64;
            (ds, e)
        })
        .collect();
    let chi2: f64 = bins
        .iter()
        .map(|(ds, e)| {
            let o: u64 = ds.iter().map(|&d| counts[d as usize]).sum();
            (o as f64 - e).powi(2) / e
        })
        .sum();
    // 8 degrees of freedom, upper 0.1% point
    assert!(chi2 < 26.12, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn keyed_hash_avalanche() {
    let p = params(128, 256, 1.0);
    let tf = TagFunction::keyed_hash(p);
    let mut rng = RngStream::new(3, 3);
    let trials = 1000;
    let mut total = 0.0;
    for _ in 0..trials {
        let s = rng.bits(256);
        let k = Key::new(rng.bits(128));
        let mut s2 = s.clone();
        s2.flip(rng.uniform_index(256));
        let a = tf.encode(&Message::new(s), &k).unwrap();
        let b = tf.encode(&Message::new(s2), &k).unwrap();
        total += hamming_distance(&a, &b).unwrap() as f64 / 256.0;
    }
    let mean = total / trials as f64;
    assert!((0.40..=0.60).contains(&mean), "{mean}");
}

#[test]
fn statistic_moments_under_both_hypotheses() {
    let gamma = 0.5;
    let p = params(16, 64, gamma);
    let tf = TagFunction::keyed_hash(p);
    let mut setup = RngStream::new(8, 0);
    let s = Message::new(setup.bits(64));
    let k_b = Key::new(setup.bits(16));
    let k_e = Key::new(setup.bits(16));
    let c_b = tf.encode(&s, &k_b).unwrap();
    let c_e = tf.encode(&s, &k_e).unwrap();
    let d = hamming_distance(&c_b, &c_e).unwrap() as f64;
    let n = 100_000u64;
    let moments = |c: &Tag, stream: u64| {
        let mut rng = RngStream::new(8, stream);
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let y = ObservedTag::through_equivalent_channel(c, gamma, &mut rng).unwrap();
            let eta = statistic(&y, &c_b).unwrap();
            sum += eta;
            sq += eta * eta;
        }
        let mean = sum / n as f64;
        (mean, sq / n as f64 - mean * mean)
    };
    let var = 64.0 / gamma;
    let (m0, v0) = moments(&c_b, 1);
    assert!((m0 - 64.0).abs() < 4.0 * (var / n as f64).sqrt(), "{m0}");
    assert!((v0 / var - 1.0).abs() < 0.02, "{v0}");
    let (m1, v1) = moments(&c_e, 2);
    assert!((m1 - (64.0 - 2.0 * d)).abs() < 4.0 * (var / n as f64).sqrt(), "{m1}");
    assert!((v1 / var - 1.0).abs() < 0.02, "{v1}");
}

#[test]
fn capacity_is_increasing_and_bounded() {
    let mut prev = 2.0;
    for i in 0..60 {
        let g = 10f64.powf(-3.0 + i as f64 * 0.08);
        let c = capacity_biawgn(g).unwrap();
        assert!((0.0..=1.0).contains(&c.c2));
        // 1 - C_2 is tracked separately, so strictness survives C_2 rounding to 1
        assert!(c.deficit < prev && c.deficit > 0.0, "gamma={g}");
        prev = c.deficit;
    }
}

#[test]
fn spb_monotone_on_grid() {
    for l in [16usize, 64, 256] {
        let mut prev_g = 2.0;
        for db in [-4.0, -2.0, 0.0, 2.0, 4.0, 6.0] {
            let g = 0.5 * 10f64.powf(db / 10.0);
            let v = p_spb(l, 0.5, g).unwrap().p_e_lower;
            assert!(v <= prev_g, "L={l} {db} dB");
            prev_g = v;
            let mut prev_r = -1.0;
            for r in [0.25, 0.5, 0.75, 1.0] {
                let w = p_spb(l, r, g).unwrap().p_e_lower;
                assert!(w >= prev_r, "L={l} {db} dB R={r}");
                prev_r = w;
            }
        }
    }
}

#[test]
fn spb_grows_with_length_above_capacity() {
    for db in [-4.0, -2.0, -1.0] {
        let g = 0.5 * 10f64.powf(db / 10.0);
        assert!(capacity_biawgn(g).unwrap().c2 < 0.5);
        let short = p_spb(64, 0.5, g).unwrap().p_e_lower;
        let long = p_spb(256, 0.5, g).unwrap().p_e_lower;
        assert!(long > short, "{db} dB: {long} vs {short}");
    }
}

const ORACLE_BOOK: [&str; 16] = [
    "11000010", "11010111", "10000000", "01100011", "01001110", "10101011", "11011000", "11100010",
    "11111110", "11110000", "11110010", "01111011", "10000000", "11010010", "10110110", "11111110",
];

fn oracle_setup() -> (TagFunction, Message) {
    let p = params(4, 8, 1.0);
    let tf = TagFunction::seeded_random_codebook(p, 1).unwrap();
    let s = Message::new(BitVector::parse_bit_string("10110010").unwrap());
    (tf, s)
}

#[test]
fn seeded_codebook_matches_reference_derivation() {
    let (tf, s) = oracle_setup();
    let book: Vec<String> = tf.codebook(&s).unwrap().iter().map(|t| t.bits().to_bit_string()).collect();
    assert_eq!(book, ORACLE_BOOK);
    let tf = TagFunction::seeded_random_codebook(params(3, 20, 1.0), 7).unwrap();
    let s = Message::new(BitVector::parse_bit_string(&"1".repeat(20)).unwrap());
    let k = Key::new(BitVector::parse_bit_string("101").unwrap());
    assert_eq!(tf.encode(&s, &k).unwrap().bits().to_bit_string(), "10111001101011100110");
}

#[test]
fn keyed_hash_matches_reference_derivation() {
    let tf = TagFunction::keyed_hash(params(4, 300, 1.0));
    let s = Message::new(BitVector::parse_bit_string(&"1100101011".repeat(30)).unwrap());
    let k = Key::new(BitVector::parse_bit_string("0110").unwrap());
    let want = "111110001011111110100000011111101001001111110110100101111000100000011010100001010101010101011100\
                001101000011111100110011011110001001010110111011010001001011010110001111110110100100101010010111\
                011110001011001101010110010011101011001100111001010000101001100101110111011001111011000010011000\
                010000011011";
    assert_eq!(tf.encode(&s, &k).unwrap().bits().to_bit_string(), want);
}

#[test]
fn mutual_information_limits_and_reference() {
    let (tf, s) = oracle_setup();
    // independent quasi-Monte Carlo evaluation of the same expectation
    let reference = 2.675_136_018_681_339_3;
    let p = params(4, 8, 1.0);
    let est = mutual_information_exact(&tf, &s, &p, 200_000, &mut RngStream::new(21, 0)).unwrap();
    assert!((est.bits - reference).abs() < 3.0 * est.std_err + 1e-3, "{est:?}");

    let low = mutual_information_exact(&tf, &s, &p.with_gamma_t(1e-4).unwrap(), 20_000, &mut RngStream::new(21, 1))
        .unwrap();
    assert!(low.bits.abs() < 3.0 * low.std_err + 1e-3, "{low:?}");

    let p16 = SystemParams::new(4, 16, 1, 0.5, 100.0).unwrap();
    let tf16 = TagFunction::seeded_random_codebook(p16, 2).unwrap();
    let s16 = Message::new(BitVector::zeros(16));
    let book = tf16.codebook(&s16).unwrap();
    for i in 0..book.len() {
        for j in 0..i {
            assert_ne!(book[i], book[j]);
        }
    }
    let high = mutual_information_exact(&tf16, &s16, &p16, 20_000, &mut RngStream::new(21, 2)).unwrap();
    assert!((high.bits - 4.0).abs() < 1e-3, "{high:?}");
}
