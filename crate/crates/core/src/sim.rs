//! Seeded Monte Carlo runs of the full protocol.
//!
//! Signals are grouped into fixed blocks of [`BLOCK_SIZE`] indices. Block `b`
//! draws from `ChaCha8Rng::seed_from_u64(seed)` switched to stream `b`, so the
//! random numbers a signal sees depend only on `(seed, index)`. Workers pick
//! up whole blocks and the per-block tallies are summed, which makes the
//! result identical for every worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{resend_state, UkdPovm};
use crate::error::{Error, Result};
use crate::linalg::Categorical;
use crate::source::{
    measurement_probabilities, single_photon_state, Basis, KeyBit, PhotonNumberSampler,
    SourceConfig, SourceKind,
};

/// Signals per random stream.
pub const BLOCK_SIZE: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Attack {
    None,
    Ukd,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_signals: u64,
    pub source: SourceConfig,
    pub attack: Attack,
    /// Per-photon survival probability of the honest channel; ignored under
    /// attack, where Eve replaces the channel.
    pub channel_transmittance: f64,
    pub seed: u64,
    pub workers: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_signals == 0 {
            return Err(Error::InvalidConfig("n_signals must be at least 1".into()));
        }
        if !(self.channel_transmittance > 0.0 && self.channel_transmittance <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "channel_transmittance must be in (0, 1], got {}",
                self.channel_transmittance
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be positive".into()));
        }
        SourceConfig::new(
            self.source.kind,
            self.source.mu,
            self.source.theta,
            self.source.phi,
        )?;
        if self.attack == Attack::Ukd {
            if self.source.kind != SourceKind::P {
                return Err(Error::InvalidConfig(
                    "the UKD attack needs the phase reference of source P".into(),
                ));
            }
            if self.source.mu == 0.0 {
                return Err(Error::InvalidConfig("the UKD attack needs mu > 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolStats {
    pub sent: u64,
    pub detected: u64,
    pub sifted: u64,
    pub errors: u64,
    pub detection_rate: f64,
    pub detection_rate_std_err: f64,
    /// `errors / sifted`; `None` when nothing was sifted.
    pub error_rate_hat: Option<f64>,
    pub error_rate_std_err: Option<f64>,
    /// Fraction of sifted positions where Eve's record equals Alice's bit.
    /// Only present under attack.
    pub eve_agreement: Option<f64>,
    /// Signals sent with key bit 0 and 1.
    pub sent_by_bit: [u64; 2],
    /// Signals forwarded to Bob (conclusive for Eve, or detected when
    /// unattacked), split by Alice's key bit.
    pub forwarded_by_bit: [u64; 2],
}

/// One signal as seen after Bob's measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawRecord {
    pub alice_basis: Basis,
    pub bob_basis: Basis,
    pub alice_bit: KeyBit,
    /// `None` when Bob's detector did not fire.
    pub bob_bit: Option<KeyBit>,
}

impl RawRecord {
    pub fn is_sifted(&self) -> bool {
        self.bob_bit.is_some() && self.alice_basis == self.bob_basis
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiftedPair {
    pub alice_bit: KeyBit,
    pub bob_bit: KeyBit,
}

impl SiftedPair {
    pub fn is_error(&self) -> bool {
        self.alice_bit != self.bob_bit
    }
}

/// Keeps detected records with matching bases.
pub fn sift(records: &[RawRecord]) -> Vec<SiftedPair> {
    records
        .iter()
        .filter(|r| r.is_sifted())
        .map(|r| SiftedPair {
            alice_bit: r.alice_bit,
            bob_bit: r.bob_bit.expect("sifted records are detected"),
        })
        .collect()
}

/// `(p̂, √(p̂(1 − p̂)/n))` for the sifted error rate.
pub fn estimate_error_rate(sifted: &[SiftedPair]) -> Result<(f64, f64)> {
    if sifted.is_empty() {
        return Err(Error::EmptySiftedKey);
    }
    let errors = sifted.iter().filter(|p| p.is_error()).count() as u64;
    Ok(binomial_estimate(errors, sifted.len() as u64))
}

fn binomial_estimate(successes: u64, trials: u64) -> (f64, f64) {
    let p = successes as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    sent: u64,
    detected: u64,
    sifted: u64,
    errors: u64,
    eve_agree: u64,
    sent_by_bit: [u64; 2],
    forwarded_by_bit: [u64; 2],
}

impl Tally {
    fn merge(mut self, other: Self) -> Self {
        self.sent += other.sent;
        self.detected += other.detected;
        self.sifted += other.sifted;
        self.errors += other.errors;
        self.eve_agree += other.eve_agree;
        for i in 0..2 {
            self.sent_by_bit[i] += other.sent_by_bit[i];
            self.forwarded_by_bit[i] += other.forwarded_by_bit[i];
        }
        self
    }

    fn record(&mut self, record: &RawRecord, eve_bit: Option<KeyBit>) {
        self.sent += 1;
        self.sent_by_bit[record.alice_bit.index()] += 1;
        if record.bob_bit.is_some() {
            self.detected += 1;
            self.forwarded_by_bit[record.alice_bit.index()] += 1;
        }
        if record.is_sifted() {
            self.sifted += 1;
            if record.bob_bit != Some(record.alice_bit) {
                self.errors += 1;
            }
            if eve_bit == Some(record.alice_bit) {
                self.eve_agree += 1;
            }
        }
    }
}

/// Per-run lookup tables, shared read-only by all workers.
enum Channel {
    Honest {
        photons: PhotonNumberSampler,
        transmittance: f64,
        /// `P(Bob reads 1)` indexed by `[alice bit][alice basis][bob basis]`.
        bob_one: [[[f64; 2]; 2]; 2],
    },
    Ukd {
        /// Eve's outcome table per `[bit][basis]`; residual index is the
        /// multiphoton rejection.
        outcomes: Box<[[Categorical; 2]; 2]>,
        /// `P(Bob reads 1)` for the resent photon, `[eve bit][bob basis]`.
        bob_one: [[f64; 2]; 2],
    },
}

impl Channel {
    fn new(config: &RunConfig) -> Result<Self> {
        let phi = config.source.phi;
        match config.attack {
            Attack::None => {
                let bob_one = KeyBit::ALL.map(|bit| {
                    Basis::ALL.map(|basis| {
                        let sent = single_photon_state(bit, basis, phi);
                        Basis::ALL.map(|bob| measurement_probabilities(&sent, bob, phi)[1])
                    })
                });
                Ok(Channel::Honest {
                    photons: PhotonNumberSampler::new(config.source.mu)?,
                    transmittance: config.channel_transmittance,
                    bob_one,
                })
            }
            Attack::Ukd => {
                let povm = UkdPovm::for_source(&config.source)?;
                let table = |bit, basis| {
                    Categorical::new(&povm.signal_outcomes(bit, basis).as_weights())
                };
                let outcomes = Box::new([
                    [table(KeyBit::Zero, Basis::Z)?, table(KeyBit::Zero, Basis::X)?],
                    [table(KeyBit::One, Basis::Z)?, table(KeyBit::One, Basis::X)?],
                ]);
                let bob_one = KeyBit::ALL.map(|bit| {
                    let resent = resend_state(bit, phi);
                    Basis::ALL.map(|bob| measurement_probabilities(&resent, bob, phi)[1])
                });
                Ok(Channel::Ukd { outcomes, bob_one })
            }
        }
    }

    fn run_block(&self, seed: u64, block: u64, len: u64) -> Tally {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        let mut tally = Tally::default();
        for _ in 0..len {
            let (record, eve_bit) = self.signal(&mut rng);
            tally.record(&record, eve_bit);
        }
        tally
    }

    fn signal(&self, rng: &mut ChaCha8Rng) -> (RawRecord, Option<KeyBit>) {
        let choices: u32 = rng.random();
        let alice_basis = Basis::from_index((choices & 1) as usize);
        let alice_bit = KeyBit::from_index(((choices >> 1) & 1) as usize);
        let bob_basis = Basis::from_index(((choices >> 2) & 1) as usize);
        let read = |p_one: f64, rng: &mut ChaCha8Rng| {
            if rng.random::<f64>() < p_one {
                KeyBit::One
            } else {
                KeyBit::Zero
            }
        };

        match self {
            Channel::Honest {
                photons,
                transmittance,
                bob_one,
            } => {
                let n = photons.sample(rng);
                let clicks = n > 0
                    && (*transmittance >= 1.0
                        || rng.random::<f64>() < 1.0 - (1.0 - transmittance).powi(n as i32));
                let bob_bit = clicks.then(|| {
                    read(
                        bob_one[alice_bit.index()][alice_basis as usize][bob_basis as usize],
                        rng,
                    )
                });
                let record = RawRecord {
                    alice_basis,
                    bob_basis,
                    alice_bit,
                    bob_bit,
                };
                (record, None)
            }
            Channel::Ukd { outcomes, bob_one } => {
                let outcome = outcomes[alice_bit.index()][alice_basis as usize].sample(rng);
                // 0 and 1 are conclusive; DK and multiphoton rejection are blocked.
                let eve_bit = (outcome < 2).then(|| KeyBit::from_index(outcome));
                let bob_bit =
                    eve_bit.map(|eve| read(bob_one[eve.index()][bob_basis as usize], rng));
                let record = RawRecord {
                    alice_basis,
                    bob_basis,
                    alice_bit,
                    bob_bit,
                };
                (record, eve_bit)
            }
        }
    }
}

/// Runs `config.n_signals` signals and aggregates the counters.
pub fn run_protocol(config: &RunConfig) -> Result<ProtocolStats> {
    config.validate()?;
    let channel = Channel::new(config)?;
    let n = config.n_signals;
    let blocks = n.div_ceil(BLOCK_SIZE);
    let run = |b: u64| {
        let len = BLOCK_SIZE.min(n - b * BLOCK_SIZE);
        channel.run_block(config.seed, b, len)
    };

    let tally = if config.workers == 1 {
        (0..blocks).map(run).fold(Tally::default(), Tally::merge)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..blocks)
                .into_par_iter()
                .map(run)
                .reduce(Tally::default, Tally::merge)
        })
    };

    let (detection_rate, detection_rate_std_err) = binomial_estimate(tally.detected, tally.sent);
    let error = (tally.sifted > 0).then(|| binomial_estimate(tally.errors, tally.sifted));
    let eve_agreement = (config.attack == Attack::Ukd && tally.sifted > 0)
        .then(|| tally.eve_agree as f64 / tally.sifted as f64);
    Ok(ProtocolStats {
        sent: tally.sent,
        detected: tally.detected,
        sifted: tally.sifted,
        errors: tally.errors,
        detection_rate,
        detection_rate_std_err,
        error_rate_hat: error.map(|e| e.0),
        error_rate_std_err: error.map(|e| e.1),
        eve_agreement,
        sent_by_bit: tally.sent_by_bit,
        forwarded_by_bit: tally.forwarded_by_bit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config(attack: Attack, mu: f64, n: u64, seed: u64) -> RunConfig {
        let kind = match attack {
            Attack::Ukd => SourceKind::P,
            Attack::None => SourceKind::R,
        };
        RunConfig {
            n_signals: n,
            source: SourceConfig::new(kind, mu, 0.0, 0.0).unwrap(),
            attack,
            channel_transmittance: 1.0,
            seed,
            workers: 1,
        }
    }

    fn pair(alice: usize, bob: usize) -> SiftedPair {
        SiftedPair {
            alice_bit: KeyBit::from_index(alice),
            bob_bit: KeyBit::from_index(bob),
        }
    }

    #[test]
    fn sift_rules() {
        let rec = |ab, bb, a, b: Option<usize>| RawRecord {
            alice_basis: ab,
            bob_basis: bb,
            alice_bit: KeyBit::from_index(a),
            bob_bit: b.map(KeyBit::from_index),
        };
        let records = [
            rec(Basis::Z, Basis::X, 0, Some(0)),
            rec(Basis::X, Basis::X, 1, None),
            rec(Basis::X, Basis::X, 1, Some(0)),
            rec(Basis::Z, Basis::Z, 0, Some(0)),
        ];
        let kept = sift(&records);
        assert_eq!(kept, vec![pair(1, 0), pair(0, 0)]);
        assert!(kept[0].is_error());
        assert!(!kept[1].is_error());
    }

    #[test]
    fn error_rate_estimates() {
        let clean: Vec<_> = (0..1000).map(|_| pair(0, 0)).collect();
        assert_eq!(estimate_error_rate(&clean).unwrap(), (0.0, 0.0));

        let mixed: Vec<_> = (0..1000).map(|i| if i < 146 { pair(1, 0) } else { pair(1, 1) }).collect();
        let (p, se) = estimate_error_rate(&mixed).unwrap();
        assert!((p - 0.146).abs() < 1e-15);
        assert!((se - (0.146f64 * 0.854 / 1000.0).sqrt()).abs() < 1e-15);
        assert!((se - 0.01117).abs() < 5e-6);

        let wrong: Vec<_> = (0..10).map(|_| pair(0, 1)).collect();
        assert_eq!(estimate_error_rate(&wrong).unwrap(), (1.0, 0.0));

        assert!(matches!(estimate_error_rate(&[]), Err(Error::EmptySiftedKey)));
    }

    #[test]
    fn invalid_configs() {
        let mut c = config(Attack::None, 0.1, 10, 1);
        c.n_signals = 0;
        assert!(run_protocol(&c).is_err());
        let mut c = config(Attack::None, 0.1, 10, 1);
        c.channel_transmittance = 0.0;
        assert!(run_protocol(&c).is_err());
        let mut c = config(Attack::None, 0.1, 10, 1);
        c.workers = 0;
        assert!(run_protocol(&c).is_err());
        let mut c = config(Attack::Ukd, 0.1, 10, 1);
        c.source.kind = SourceKind::R;
        assert!(run_protocol(&c).is_err());
        let c = config(Attack::Ukd, 0.0, 10, 1);
        assert!(run_protocol(&c).is_err());
        let mut c = config(Attack::None, 0.1, 10, 1);
        c.source.mu = -1.0;
        assert!(run_protocol(&c).is_err());
    }

    #[test]
    fn counters_are_consistent() {
        for attack in [Attack::None, Attack::Ukd] {
            let s = run_protocol(&config(attack, 0.3, 200_003, 5)).unwrap();
            assert_eq!(s.sent, 200_003);
            assert!(s.sifted <= s.detected && s.detected <= s.sent && s.errors <= s.sifted);
            assert_eq!(s.sent_by_bit.iter().sum::<u64>(), s.sent);
            assert_eq!(s.forwarded_by_bit.iter().sum::<u64>(), s.detected);
        }
    }

    #[test]
    fn honest_lossless_run_has_no_errors() {
        let s = run_protocol(&config(Attack::None, 0.5, 100_000, 8)).unwrap();
        assert_eq!(s.errors, 0);
        assert_eq!(s.error_rate_hat, Some(0.0));
        assert_eq!(s.eve_agreement, None);
    }

    #[test]
    fn lossy_channel_thins_detections() {
        let mut c = config(Attack::None, 0.5, 400_000, 9);
        c.channel_transmittance = 0.25;
        let s = run_protocol(&c).unwrap();
        // P(click) = 1 − e^{−μt} for Poisson photons thinned by t.
        let p = -(-0.5f64 * 0.25).exp_m1();
        assert!((s.detection_rate - p).abs() < 3.0 * s.detection_rate_std_err);
        assert_eq!(s.errors, 0);
    }

    #[test]
    fn attacked_run_matches_eve_record_exactly() {
        for seed in [1, 2, 3] {
            let s = run_protocol(&config(Attack::Ukd, 0.2, 100_000, seed)).unwrap();
            assert_eq!(s.eve_agreement, Some(1.0));
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut c = config(Attack::Ukd, 0.1, 3 * BLOCK_SIZE + 17, 77);
        let single = run_protocol(&c).unwrap();
        c.workers = 3;
        assert_eq!(run_protocol(&c).unwrap(), single);
        c.workers = 8;
        assert_eq!(run_protocol(&c).unwrap(), single);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn runs_are_reproducible(seed in any::<u64>(), n in 1u64..5000, mu in 0.01f64..0.8) {
            let c = config(Attack::Ukd, mu, n, seed);
            let a = run_protocol(&c).unwrap();
            let b = run_protocol(&c).unwrap();
            prop_assert_eq!(&a, &b);
            if a.sifted > 0 {
                prop_assert_eq!(a.eve_agreement, Some(1.0));
            }
        }
    }
}
