//! Alice and Bob for the basis-keyed protocol and the BB84 baseline.
//!
//! In the basis-keyed protocol Alice's key bit is her preparation basis
//! (Z -> 0, X -> 1) and Bob's is his measurement basis (X -> 0, Z -> 1). Bob
//! announces his outcome but not his basis, and a round survives sifting
//! only when the announced outcome differs from Alice's prepared bit.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{
    efficiency_control_guess, efficiency_control_round, eve_delayed_measure, intercept_resend,
    pns_split, usd_filter, AttackStrategy, EveRecord, PnsMeasurement, PublicAnnouncement,
    PublicView,
};
use crate::bits::BitString;
use crate::devices::{detect, emit, DetectionEvent, DetectorPair, PhotonPulse, SourceModel};
use crate::error::{check_probability, QkdError, Result};
use crate::postproc::SiftedKeyPair;
use crate::qcore::{depolarize, Basis, Bit, QubitSymbol};
use crate::stream::{chance, round_stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    BasisKey,
    Bb84,
}

/// What Bob says publicly after a click.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Announcement {
    /// Basis-keyed protocol: the outcome bit, basis kept secret.
    Outcome(Bit),
    /// BB84: the basis, outcome kept secret.
    Basis(Basis),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_id: u64,
    pub alice_basis: Basis,
    pub alice_bit: Bit,
    pub photons: u32,
    pub bob_basis: Basis,
    pub detection: DetectionEvent,
    pub announced: Option<Announcement>,
    pub kept: bool,
    pub alice_key_bit: Option<Bit>,
    pub bob_key_bit: Option<Bit>,
    pub double_click_flag: bool,
}

impl RoundRecord {
    /// The part of the round an eavesdropper on the classical channel sees.
    pub fn public(&self) -> PublicAnnouncement {
        PublicAnnouncement {
            round_id: self.round_id,
            detected: self.detection != DetectionEvent::NoClick,
            announcement: self.announced,
            kept: self.kept,
        }
    }

    pub fn has_error(&self) -> bool {
        self.kept && self.alice_key_bit != self.bob_key_bit
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub protocol: ProtocolKind,
    pub n_rounds: u64,
    pub source: SourceModel,
    pub detectors: DetectorPair,
    pub channel_depolarize_p: f64,
    pub channel_loss_p: f64,
    pub attack: AttackStrategy,
    pub rng_seed: u64,
}

impl SessionConfig {
    /// Ideal single-photon session with no noise and no attack.
    pub fn ideal(protocol: ProtocolKind, n_rounds: u64, rng_seed: u64) -> Self {
        SessionConfig {
            protocol,
            n_rounds,
            source: SourceModel::SinglePhoton,
            detectors: DetectorPair::ideal(),
            channel_depolarize_p: 0.0,
            channel_loss_p: 0.0,
            attack: AttackStrategy::None,
            rng_seed,
        }
    }

    pub fn with_attack(mut self, attack: AttackStrategy) -> Self {
        self.attack = attack;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(QkdError::Parameter("a session needs at least one round".into()));
        }
        self.source.validate()?;
        self.detectors.validate()?;
        self.attack.validate()?;
        check_probability("channel depolarizing probability", self.channel_depolarize_p)?;
        check_probability("channel loss probability", self.channel_loss_p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutput {
    pub records: Vec<RoundRecord>,
    /// One record per round, aligned with `records`.
    pub eve: Vec<EveRecord>,
    pub keys: SiftedKeyPair,
}

impl SessionOutput {
    pub fn kept_rounds(&self) -> impl Iterator<Item = (&RoundRecord, &EveRecord)> {
        self.records.iter().zip(&self.eve).filter(|(r, _)| r.kept)
    }

    /// Eve's records and Alice's key bits over kept rounds.
    pub fn kept_eve_view(&self) -> (Vec<EveRecord>, Vec<Bit>) {
        self.kept_rounds()
            .map(|(r, e)| (*e, r.alice_key_bit.expect("kept rounds carry key bits")))
            .unzip()
    }
}

pub fn alice_prepare<R: Rng + ?Sized>(rng: &mut R) -> (Basis, Bit) {
    let basis = Basis::random(rng);
    let bit = Bit::random(rng);
    (basis, bit)
}

pub fn alice_key_bit_basiskey(alice_basis: Basis) -> Bit {
    match alice_basis {
        Basis::Z => Bit::Zero,
        Basis::X => Bit::One,
    }
}

pub fn bob_key_bit_basiskey(bob_basis: Basis) -> Bit {
    match bob_basis {
        Basis::X => Bit::Zero,
        Basis::Z => Bit::One,
    }
}

pub fn sift_basiskey(alice_bit: Bit, announced: Bit) -> bool {
    announced != alice_bit
}

pub fn sift_bb84(alice_basis: Basis, bob_basis: Basis) -> bool {
    alice_basis == bob_basis
}

/// Runs every round and returns the transcript with aligned sifted keys.
///
/// Rounds draw from independent per-round streams, so the output does not
/// depend on how many threads execute it. History-dependent attacks are run
/// sequentially since each round needs the previous announcements.
pub fn run_session(config: &SessionConfig) -> Result<SessionOutput> {
    config.validate()?;
    let uses_history = matches!(
        config.attack,
        AttackStrategy::EfficiencyControl { policy } if policy.uses_history()
    );
    let rounds: Vec<(RoundRecord, EveRecord)> = if uses_history {
        let mut history = Vec::with_capacity(config.n_rounds as usize);
        let mut out = Vec::with_capacity(config.n_rounds as usize);
        for id in 0..config.n_rounds {
            let view = PublicView { round_index: id, history: &history };
            let (rec, eve) = run_round(config, id, &view)?;
            history.push(rec.public());
            out.push((rec, eve));
        }
        out
    } else {
        (0..config.n_rounds)
            .into_par_iter()
            .map(|id| run_round(config, id, &PublicView { round_index: id, history: &[] }))
            .collect::<Result<_>>()?
    };

    let (records, eve): (Vec<_>, Vec<_>) = rounds.into_iter().unzip();
    let keys = SiftedKeyPair::new(
        records.iter().filter(|r| r.kept).map(|r| r.alice_key_bit.unwrap()).collect::<BitString>(),
        records.iter().filter(|r| r.kept).map(|r| r.bob_key_bit.unwrap()).collect::<BitString>(),
    )?;
    Ok(SessionOutput { records, eve, keys })
}

/// One protocol round on its own random stream.
pub fn run_round(
    config: &SessionConfig,
    round_id: u64,
    view: &PublicView<'_>,
) -> Result<(RoundRecord, EveRecord)> {
    let rng = &mut round_stream(config.rng_seed, round_id);
    let protocol = config.protocol;

    let (alice_basis, alice_bit) = alice_prepare(rng);
    let alice_state = QubitSymbol::pure(alice_basis, alice_bit);
    let pulse = emit(config.source, alice_basis, alice_bit, rng)?;

    let mut eve = EveRecord::blank(round_id);
    let mut detectors = config.detectors;
    let mut forwarded = Some(pulse);
    let mut lossless = false;
    let mut delayed: Option<(u32, PnsMeasurement)> = None;

    match config.attack {
        AttackStrategy::None => {}
        AttackStrategy::InterceptResend => {
            if !pulse.is_vacuum() {
                let hit = intercept_resend(pulse.state, protocol, round_id, rng)?;
                forwarded = Some(PhotonPulse::new(1, hit.resent));
                eve = hit.eve;
            }
        }
        AttackStrategy::EfficiencyControl { policy } => {
            let (eta0, eta1) = efficiency_control_round(&policy, view);
            detectors = detectors.with_efficiencies(eta0, eta1);
            detectors.validate()?;
            let guess = efficiency_control_guess(eta0, eta1);
            eve.conclusive = guess.is_some();
            eve.key_guess = guess;
        }
        AttackStrategy::Pns { measurement } => {
            let (fwd, stored) = pns_split(pulse);
            forwarded = Some(fwd);
            if stored > 0 {
                delayed = Some((stored, measurement));
            }
        }
        AttackStrategy::UsdFilter { block_inconclusive, split_two_photon } => {
            if pulse.n >= 3 {
                let out = usd_filter(pulse, protocol, block_inconclusive, round_id, rng)?;
                forwarded = out.forwarded;
                lossless = out.lossless;
                eve = out.eve;
            } else if pulse.n == 2 && split_two_photon {
                let (fwd, stored) = pns_split(pulse);
                forwarded = Some(fwd);
                delayed = Some((stored, PnsMeasurement::RandomBasis));
            }
        }
    }

    let arriving = match forwarded {
        None => PhotonPulse::vacuum(),
        Some(p) if lossless || p.is_vacuum() => p,
        Some(p) => {
            let state = depolarize(p.state, config.channel_depolarize_p, rng)?;
            let survivors = (0..p.n).filter(|_| !chance(rng, config.channel_loss_p)).count() as u32;
            PhotonPulse::new(survivors, state)
        }
    };

    let bob_basis = Basis::random(rng);
    let detection = detect(&arriving, bob_basis, &detectors, rng)?;

    let mut record = RoundRecord {
        round_id,
        alice_basis,
        alice_bit,
        photons: pulse.n,
        bob_basis,
        detection: detection.event,
        announced: None,
        kept: false,
        alice_key_bit: None,
        bob_key_bit: None,
        double_click_flag: detection.double_click,
    };

    if let DetectionEvent::Click(outcome) = detection.event {
        match protocol {
            ProtocolKind::BasisKey => {
                record.announced = Some(Announcement::Outcome(outcome));
                if sift_basiskey(alice_bit, outcome) {
                    record.kept = true;
                    record.alice_key_bit = Some(alice_key_bit_basiskey(alice_basis));
                    record.bob_key_bit = Some(bob_key_bit_basiskey(bob_basis));
                }
            }
            ProtocolKind::Bb84 => {
                record.announced = Some(Announcement::Basis(bob_basis));
                if sift_bb84(alice_basis, bob_basis) {
                    record.kept = true;
                    record.alice_key_bit = Some(alice_bit);
                    record.bob_key_bit = Some(outcome);
                }
            }
        }
    }

    if let (Some((stored, measurement)), true) = (delayed, record.kept) {
        let announcement = record.announced.expect("kept rounds were announced");
        eve = eve_delayed_measure(round_id, stored, alice_state, announcement, true, measurement, rng)?;
    } else if let Some((stored, _)) = delayed {
        eve.stored_copies = stored;
    }

    Ok((record, eve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::master_stream;

    #[test]
    fn key_bit_maps() {
        assert_eq!(alice_key_bit_basiskey(Basis::Z), Bit::Zero);
        assert_eq!(alice_key_bit_basiskey(Basis::X), Bit::One);
        assert_eq!(bob_key_bit_basiskey(Basis::X), Bit::Zero);
        assert_eq!(bob_key_bit_basiskey(Basis::Z), Bit::One);
    }

    #[test]
    fn sift_rules() {
        assert!(!sift_basiskey(Bit::Zero, Bit::Zero));
        assert!(sift_basiskey(Bit::Zero, Bit::One));
        assert!(sift_bb84(Basis::Z, Basis::Z));
        assert!(!sift_bb84(Basis::Z, Basis::X));
    }

    /// Exhaustive check over every preparation, measurement basis and the
    /// outcomes quantum mechanics allows for it on ideal devices.
    #[test]
    fn noiseless_kept_rounds_agree() {
        for state in QubitSymbol::bb84_states() {
            let QubitSymbol::Pure { basis: a_basis, bit: a_bit } = state else { unreachable!() };
            for bob_basis in Basis::ALL {
                let outcomes: Vec<Bit> =
                    if bob_basis == a_basis { vec![a_bit] } else { Bit::ALL.to_vec() };
                for outcome in outcomes {
                    if sift_basiskey(a_bit, outcome) {
                        assert_eq!(alice_key_bit_basiskey(a_basis), bob_key_bit_basiskey(bob_basis));
                        assert_eq!(bob_basis, a_basis.conjugate());
                    }
                }
            }
        }
    }

    #[test]
    fn preparation_is_uniform_and_independent() {
        let mut rng = master_stream(21);
        let n = 1_000_000usize;
        let mut counts = [[0usize; 2]; 2];
        for _ in 0..n {
            let (b, x) = alice_prepare(&mut rng);
            counts[(b == Basis::Z) as usize][x.as_u8() as usize] += 1;
        }
        let sigma = (0.25 * 0.75 / n as f64).sqrt();
        for c in counts.iter().flatten() {
            assert!((*c as f64 / n as f64 - 0.25).abs() < 4.0 * sigma, "{counts:?}");
        }
        // correlation of two +-1 variables
        let corr = (counts[0][0] + counts[1][1]) as f64 / n as f64 * 2.0 - 1.0;
        assert!(corr.abs() < 4.0 / (n as f64).sqrt());

        let replay = |seed| {
            let mut r = master_stream(seed);
            (0..32).map(|_| alice_prepare(&mut r)).collect::<Vec<_>>()
        };
        assert_eq!(replay(5), replay(5));
    }

    #[test]
    fn record_invariants_hold() {
        for protocol in [ProtocolKind::BasisKey, ProtocolKind::Bb84] {
            let mut cfg = SessionConfig::ideal(protocol, 20_000, 3);
            cfg.channel_depolarize_p = 0.1;
            cfg.detectors = DetectorPair::new(0.9, 0.6, 0.01).unwrap();
            let out = run_session(&cfg).unwrap();
            assert_eq!(out.keys.len(), out.records.iter().filter(|r| r.kept).count());
            for r in &out.records {
                if r.kept {
                    assert!(r.announced.is_some() && r.alice_key_bit.is_some() && r.bob_key_bit.is_some());
                    match (protocol, r.announced.unwrap()) {
                        (ProtocolKind::BasisKey, Announcement::Outcome(a)) => assert_ne!(a, r.alice_bit),
                        (ProtocolKind::Bb84, Announcement::Basis(_)) => assert_eq!(r.alice_basis, r.bob_basis),
                        other => panic!("wrong announcement kind {other:?}"),
                    }
                }
                if r.detection == DetectionEvent::NoClick {
                    assert!(!r.kept && r.announced.is_none());
                }
            }
        }
    }

    #[test]
    fn public_view_hides_secret_fields() {
        let out = run_session(&SessionConfig::ideal(ProtocolKind::BasisKey, 2000, 1)).unwrap();
        for r in &out.records {
            // only the outcome is ever published, never a basis
            assert!(!matches!(r.public().announcement, Some(Announcement::Basis(_))));
        }
        let out = run_session(&SessionConfig::ideal(ProtocolKind::Bb84, 2000, 1)).unwrap();
        for r in &out.records {
            assert!(r.public().outcome().is_none());
        }
    }

    #[test]
    fn ideal_sift_fractions() {
        let n = 200_000;
        for (protocol, p) in [(ProtocolKind::BasisKey, 0.25), (ProtocolKind::Bb84, 0.5)] {
            let out = run_session(&SessionConfig::ideal(protocol, n, 17)).unwrap();
            let f = out.keys.len() as f64 / n as f64;
            assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "{protocol:?}: {f}");
            assert_eq!(out.keys.alice(), out.keys.bob());
        }
    }

    #[test]
    fn replay_is_independent_of_thread_count() {
        let mut cfg = SessionConfig::ideal(ProtocolKind::BasisKey, 5000, 99)
            .with_attack(AttackStrategy::InterceptResend);
        cfg.source = SourceModel::WeakCoherent { mu: 0.6 };
        cfg.channel_loss_p = 0.3;
        let run_with = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_session(&cfg).unwrap())
        };
        let one = run_with(1);
        assert_eq!(one, run_with(4));
        assert_eq!(one, run_session(&cfg).unwrap());
    }

    #[test]
    fn history_policy_runs_sequentially() {
        use crate::adversary::EfficiencyPolicy;
        let cfg = SessionConfig::ideal(ProtocolKind::BasisKey, 1000, 4).with_attack(
            AttackStrategy::EfficiencyControl { policy: EfficiencyPolicy::MirrorLastAnnouncement },
        );
        let out = run_session(&cfg).unwrap();
        // the first click is on detector 0 and the policy keeps it the only live one
        assert!(out.records.iter().filter_map(|r| r.detection.click_bit()).all(|b| b == Bit::Zero));
        assert_eq!(out, run_session(&cfg).unwrap());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = SessionConfig::ideal(ProtocolKind::BasisKey, 0, 0);
        assert!(run_session(&cfg).is_err());
        cfg.n_rounds = 10;
        cfg.channel_loss_p = 2.0;
        assert!(run_session(&cfg).is_err());
        cfg.channel_loss_p = 0.0;
        cfg.source = SourceModel::WeakCoherent { mu: -1.0 };
        assert!(matches!(run_session(&cfg), Err(QkdError::Parameter(_))));
    }
}
