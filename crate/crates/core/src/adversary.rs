//! Eavesdropping strategies and estimates of what Eve learns.
//!
//! Eve's knowledge boundary follows the protocol's announcements: she sees
//! announced outcomes (basis-keyed) or announced bases (BB84) and the sift
//! verdicts, but never Bob's basis in the basis-keyed protocol.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::devices::PhotonPulse;
use crate::error::{check_probability, QkdError, Result};
use crate::protocol::{alice_key_bit_basiskey, Announcement, ProtocolKind};
use crate::qcore::{measure, usd_success_prob, Basis, Bit, QubitSymbol};
use crate::stream::chance;

/// How Eve sets Bob's detector efficiencies each round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EfficiencyPolicy {
    Fixed { eta0: f64, eta1: f64 },
    /// (1, 0) on even rounds, (0, 1) on odd rounds.
    Alternating,
    /// Keeps only the detector that fired in the last announced click.
    MirrorLastAnnouncement,
}

impl EfficiencyPolicy {
    pub fn uses_history(&self) -> bool {
        matches!(self, EfficiencyPolicy::MirrorLastAnnouncement)
    }

    pub fn validate(&self) -> Result<()> {
        if let EfficiencyPolicy::Fixed { eta0, eta1 } = *self {
            check_probability("eta0", eta0)?;
            check_probability("eta1", eta1)?;
        }
        Ok(())
    }
}

/// What Eve does with a stored photon once the round has been sifted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PnsMeasurement {
    /// Measure every stored copy in one uniformly random basis.
    RandomBasis,
    /// Like `RandomBasis`, but the basis is a function of the announced outcome.
    ConditionedBasis,
    /// Optimal unambiguous discrimination on all stored copies.
    OptimalUsd,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackStrategy {
    #[default]
    None,
    InterceptResend,
    EfficiencyControl { policy: EfficiencyPolicy },
    Pns { measurement: PnsMeasurement },
    /// USD on pulses with three or more photons; with `block_inconclusive`
    /// Eve drops every pulse she failed to identify. Two-photon pulses are
    /// split and stored when `split_two_photon` is set.
    UsdFilter { block_inconclusive: bool, split_two_photon: bool },
}

impl AttackStrategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            AttackStrategy::EfficiencyControl { policy } => policy.validate(),
            _ => Ok(()),
        }
    }
}

/// Eve's per-round knowledge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EveRecord {
    pub round_id: u64,
    pub stored_copies: u32,
    pub conclusive: bool,
    /// Guess of the key bit (basis-keyed: Alice's basis bit; BB84: Alice's bit).
    pub key_guess: Option<Bit>,
    pub suppressed: bool,
    /// Basis Eve measured in, when her strategy has one.
    pub eve_basis: Option<Basis>,
}

impl EveRecord {
    pub fn blank(round_id: u64) -> Self {
        EveRecord { round_id, ..Default::default() }
    }
}

/// Everything an efficiency-control policy may look at. Bob's basis is not
/// part of it.
///
/// ```compile_fail
/// # use basiskey::adversary::PublicView;
/// fn peek(view: &PublicView<'_>) { let _ = view.bob_basis; }
/// ```
#[derive(Debug, Clone, Copy)]
pub struct PublicView<'a> {
    pub round_index: u64,
    /// One entry per earlier round, in order.
    pub history: &'a [PublicAnnouncement],
}

/// The publicly announced part of one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicAnnouncement {
    pub round_id: u64,
    pub detected: bool,
    pub announcement: Option<Announcement>,
    pub kept: bool,
}

impl PublicAnnouncement {
    pub fn outcome(&self) -> Option<Bit> {
        match self.announcement {
            Some(Announcement::Outcome(b)) => Some(b),
            _ => None,
        }
    }
}

pub fn efficiency_control_round(policy: &EfficiencyPolicy, view: &PublicView<'_>) -> (f64, f64) {
    match *policy {
        EfficiencyPolicy::Fixed { eta0, eta1 } => (eta0, eta1),
        EfficiencyPolicy::Alternating => {
            if view.round_index.is_multiple_of(2) {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            }
        }
        EfficiencyPolicy::MirrorLastAnnouncement => {
            match view.history.iter().rev().find_map(|a| a.outcome()) {
                Some(Bit::One) => (0.0, 1.0),
                _ => (1.0, 0.0),
            }
        }
    }
}

/// Eve's best public guess under efficiency control: the bit of the detector
/// she left more sensitive. No guess when both are equal.
pub fn efficiency_control_guess(eta0: f64, eta1: f64) -> Option<Bit> {
    if eta0 > eta1 {
        Some(Bit::Zero)
    } else if eta1 > eta0 {
        Some(Bit::One)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interception {
    pub resent: QubitSymbol,
    pub eve: EveRecord,
}

/// Measure in a uniformly random basis and resend the result.
pub fn intercept_resend<R: Rng + ?Sized>(
    state: QubitSymbol,
    protocol: ProtocolKind,
    round_id: u64,
    rng: &mut R,
) -> Result<Interception> {
    let basis = Basis::random(rng);
    let outcome = measure(state, basis, rng)?;
    let key_guess = match protocol {
        ProtocolKind::BasisKey => alice_key_bit_basiskey(basis),
        ProtocolKind::Bb84 => outcome,
    };
    Ok(Interception {
        resent: QubitSymbol::pure(basis, outcome),
        eve: EveRecord {
            round_id,
            conclusive: true,
            key_guess: Some(key_guess),
            eve_basis: Some(basis),
            ..Default::default()
        },
    })
}

/// Keep all but one photon of a multi-photon pulse. Returns the forwarded
/// pulse and the number of stored copies; pulses with fewer than two photons
/// pass through untouched.
pub fn pns_split(pulse: PhotonPulse) -> (PhotonPulse, u32) {
    if pulse.n < 2 {
        (pulse, 0)
    } else {
        (PhotonPulse::new(1, pulse.state), pulse.n - 1)
    }
}

/// Eve measures her stored copies after the sifting announcement.
pub fn eve_delayed_measure<R: Rng + ?Sized>(
    round_id: u64,
    stored_copies: u32,
    alice_state: QubitSymbol,
    announcement: Announcement,
    kept: bool,
    strategy: PnsMeasurement,
    rng: &mut R,
) -> Result<EveRecord> {
    if !kept {
        return Err(QkdError::Contract("delayed measurement is only defined on kept rounds".into()));
    }
    if stored_copies == 0 {
        return Err(QkdError::Contract("delayed measurement needs at least one stored copy".into()));
    }
    let QubitSymbol::Pure { basis: alice_basis, .. } = alice_state else {
        return Err(QkdError::Contract(format!("Alice's state must be pure, got {alice_state}")));
    };
    let mut record = EveRecord { round_id, stored_copies, ..Default::default() };

    match announcement {
        // BB84 reveals the basis, so every stored copy is read out exactly.
        Announcement::Basis(b) => {
            let bit = measure(alice_state, b, rng)?;
            record.conclusive = true;
            record.key_guess = Some(bit);
            record.eve_basis = Some(b);
        }
        Announcement::Outcome(announced) => match strategy {
            PnsMeasurement::RandomBasis | PnsMeasurement::ConditionedBasis => {
                let m = if strategy == PnsMeasurement::RandomBasis {
                    Basis::random(rng)
                } else if announced == Bit::Zero {
                    Basis::Z
                } else {
                    Basis::X
                };
                record.eve_basis = Some(m);
                // Kept means Alice's bit is the complement of the announcement,
                // so if Alice used basis m every copy must read !announced.
                let mut conclusive = false;
                for _ in 0..stored_copies {
                    if measure(alice_state, m, rng)? == announced {
                        conclusive = true;
                    }
                }
                if conclusive {
                    record.conclusive = true;
                    record.key_guess = Some(alice_key_bit_basiskey(m.conjugate()));
                }
            }
            PnsMeasurement::OptimalUsd => {
                if chance(rng, usd_success_prob(stored_copies)?) {
                    record.conclusive = true;
                    record.key_guess = Some(alice_key_bit_basiskey(alice_basis));
                }
            }
        },
    }
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UsdFilterOutcome {
    /// `None` when Eve blocked the pulse.
    pub forwarded: Option<PhotonPulse>,
    /// Conclusive pulses reach Bob over Eve's own lossless, noiseless link.
    pub lossless: bool,
    pub eve: EveRecord,
}

/// USD on the stored part of a pulse with at least three photons.
///
/// Smaller pulses are returned unchanged with `applied == false` semantics:
/// the caller decides the two-photon fallback.
pub fn usd_filter<R: Rng + ?Sized>(
    pulse: PhotonPulse,
    protocol: ProtocolKind,
    block_inconclusive: bool,
    round_id: u64,
    rng: &mut R,
) -> Result<UsdFilterOutcome> {
    let mut eve = EveRecord::blank(round_id);
    if pulse.n < 3 {
        return Ok(UsdFilterOutcome { forwarded: Some(pulse), lossless: false, eve });
    }
    let QubitSymbol::Pure { basis, bit } = pulse.state else {
        return Err(QkdError::Contract(format!("source emitted non-pure state {}", pulse.state)));
    };
    let (forward, stored) = pns_split(pulse);
    eve.stored_copies = stored;
    if chance(rng, usd_success_prob(stored)?) {
        eve.conclusive = true;
        eve.key_guess = Some(match protocol {
            ProtocolKind::BasisKey => alice_key_bit_basiskey(basis),
            ProtocolKind::Bb84 => bit,
        });
        Ok(UsdFilterOutcome { forwarded: Some(forward), lossless: true, eve })
    } else if block_inconclusive {
        eve.suppressed = true;
        Ok(UsdFilterOutcome { forwarded: None, lossless: false, eve })
    } else {
        Ok(UsdFilterOutcome { forwarded: Some(forward), lossless: false, eve })
    }
}

/// The suppression is hidden by the honest channel when Eve blocks no more
/// pulses than an honest lossy line would drop.
pub fn loss_covered(suppression_rate: f64, honest_loss_p: f64) -> bool {
    suppression_rate <= honest_loss_p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveInformation {
    pub conclusive_fraction: f64,
    /// Fraction of conclusive guesses that match the key; `None` without any.
    pub guess_accuracy: Option<f64>,
    pub mutual_information_bits: f64,
}

/// Mutual information in bits between the key bit (rows) and Eve's guess
/// (columns 0, 1, inconclusive), given a joint probability table.
pub fn mutual_information(joint: &[[f64; 3]; 2]) -> f64 {
    let total: f64 = joint.iter().flatten().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let row: Vec<f64> = joint.iter().map(|r| r.iter().sum::<f64>() / total).collect();
    let col: Vec<f64> = (0..3).map(|j| (joint[0][j] + joint[1][j]) / total).collect();
    let mut mi = 0.0;
    for (i, r) in joint.iter().enumerate() {
        for (j, &p) in r.iter().enumerate() {
            let p = p / total;
            if p > 0.0 {
                mi += p * (p / (row[i] * col[j])).log2();
            }
        }
    }
    mi.max(0.0)
}

/// Plug-in estimate over aligned kept rounds.
pub fn eve_information(records: &[EveRecord], true_keys: &[Bit]) -> Result<EveInformation> {
    if records.is_empty() {
        return Err(QkdError::Parameter("no kept rounds to evaluate".into()));
    }
    if records.len() != true_keys.len() {
        return Err(QkdError::Parameter(format!(
            "{} Eve records for {} key bits",
            records.len(),
            true_keys.len()
        )));
    }
    let mut joint = [[0.0f64; 3]; 2];
    let (mut conclusive, mut correct) = (0usize, 0usize);
    for (rec, &key) in records.iter().zip(true_keys) {
        let col = match (rec.conclusive, rec.key_guess) {
            (true, Some(g)) => {
                conclusive += 1;
                if g == key {
                    correct += 1;
                }
                g.as_u8() as usize
            }
            _ => 2,
        };
        joint[key.as_u8() as usize][col] += 1.0;
    }
    Ok(EveInformation {
        conclusive_fraction: conclusive as f64 / records.len() as f64,
        guess_accuracy: (conclusive > 0).then(|| correct as f64 / conclusive as f64),
        mutual_information_bits: mutual_information(&joint),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::master_stream;

    fn z0() -> QubitSymbol {
        QubitSymbol::pure(Basis::Z, Bit::Zero)
    }

    #[test]
    fn intercept_resend_resends_its_measurement() {
        let mut rng = master_stream(1);
        for _ in 0..1000 {
            let i = intercept_resend(z0(), ProtocolKind::BasisKey, 0, &mut rng).unwrap();
            let QubitSymbol::Pure { basis, bit } = i.resent else { panic!() };
            assert_eq!(i.eve.eve_basis, Some(basis));
            if basis == Basis::Z {
                assert_eq!(bit, Bit::Zero);
                assert_eq!(i.eve.key_guess, Some(Bit::Zero));
            } else {
                assert_eq!(i.eve.key_guess, Some(Bit::One));
            }
        }
    }

    #[test]
    fn split_keeps_all_but_one() {
        let p = |n| PhotonPulse::new(n, z0());
        assert_eq!(pns_split(p(2)), (p(1), 1));
        assert_eq!(pns_split(p(3)), (p(1), 2));
        assert_eq!(pns_split(p(1)), (p(1), 0));
        assert_eq!(pns_split(PhotonPulse::vacuum()), (PhotonPulse::vacuum(), 0));
    }

    /// Alice sends bit 1 in `alice_basis`, Bob announced 0 (a kept round), and
    /// Eve measures in Z (ConditionedBasis maps announcement 0 to Z).
    fn conclusive_rate(alice_basis: Basis, trials: usize) -> f64 {
        let alice = QubitSymbol::pure(alice_basis, Bit::One);
        let mut rng = master_stream(3);
        let mut hits = 0;
        for _ in 0..trials {
            let r = eve_delayed_measure(
                0,
                1,
                alice,
                Announcement::Outcome(Bit::Zero),
                true,
                PnsMeasurement::ConditionedBasis,
                &mut rng,
            )
            .unwrap();
            assert_eq!(r.eve_basis, Some(Basis::Z));
            if r.conclusive {
                assert_eq!(r.key_guess, Some(alice_key_bit_basiskey(alice_basis)));
                hits += 1;
            }
        }
        hits as f64 / trials as f64
    }

    #[test]
    fn delayed_measurement_in_alices_basis_is_never_conclusive() {
        assert_eq!(conclusive_rate(Basis::Z, 10_000), 0.0);
    }

    #[test]
    fn delayed_measurement_in_bobs_basis_is_conclusive_half_the_time() {
        let n = 200_000;
        let r = conclusive_rate(Basis::X, n);
        assert!((r - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt(), "{r}");
    }

    #[test]
    fn delayed_measurement_contract() {
        let mut rng = master_stream(0);
        let ann = Announcement::Outcome(Bit::One);
        assert!(eve_delayed_measure(0, 1, z0(), ann, false, PnsMeasurement::RandomBasis, &mut rng).is_err());
        assert!(eve_delayed_measure(0, 0, z0(), ann, true, PnsMeasurement::RandomBasis, &mut rng).is_err());
    }

    #[test]
    fn bb84_delayed_measurement_reads_the_bit() {
        let mut rng = master_stream(0);
        let alice = QubitSymbol::pure(Basis::X, Bit::One);
        let r = eve_delayed_measure(0, 1, alice, Announcement::Basis(Basis::X), true, PnsMeasurement::RandomBasis, &mut rng)
            .unwrap();
        assert!(r.conclusive);
        assert_eq!(r.key_guess, Some(Bit::One));
    }

    #[test]
    fn efficiency_policies() {
        let view = PublicView { round_index: 0, history: &[] };
        let fixed = EfficiencyPolicy::Fixed { eta0: 1.0, eta1: 0.0 };
        assert_eq!(efficiency_control_round(&fixed, &view), (1.0, 0.0));
        assert_eq!(efficiency_control_round(&EfficiencyPolicy::Alternating, &view), (1.0, 0.0));
        let odd = PublicView { round_index: 7, history: &[] };
        assert_eq!(efficiency_control_round(&EfficiencyPolicy::Alternating, &odd), (0.0, 1.0));

        let history = [
            PublicAnnouncement { round_id: 0, detected: true, announcement: Some(Announcement::Outcome(Bit::One)), kept: true },
            PublicAnnouncement { round_id: 1, detected: false, announcement: None, kept: false },
        ];
        let view = PublicView { round_index: 2, history: &history };
        assert_eq!(efficiency_control_round(&EfficiencyPolicy::MirrorLastAnnouncement, &view), (0.0, 1.0));
        assert!(EfficiencyPolicy::Fixed { eta0: 1.2, eta1: 0.0 }.validate().is_err());
        assert_eq!(efficiency_control_guess(1.0, 0.0), Some(Bit::Zero));
        assert_eq!(efficiency_control_guess(0.5, 0.5), None);
    }

    #[test]
    fn usd_filter_on_three_photons() {
        let mut rng = master_stream(11);
        let n = 200_000;
        let mut conclusive = 0;
        for _ in 0..n {
            let out = usd_filter(PhotonPulse::new(3, z0()), ProtocolKind::BasisKey, true, 0, &mut rng).unwrap();
            assert_eq!(out.eve.stored_copies, 2);
            if out.eve.conclusive {
                conclusive += 1;
                assert_eq!(out.forwarded, Some(PhotonPulse::new(1, z0())));
                assert_eq!(out.eve.key_guess, Some(Bit::Zero));
            } else {
                assert!(out.forwarded.is_none() && out.eve.suppressed);
            }
        }
        let r = conclusive as f64 / n as f64;
        assert!((r - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());

        let single = usd_filter(PhotonPulse::new(1, z0()), ProtocolKind::BasisKey, true, 0, &mut rng).unwrap();
        assert_eq!(single.forwarded, Some(PhotonPulse::new(1, z0())));
        assert!(!single.eve.conclusive && !single.eve.suppressed);
        assert!(loss_covered(0.2, 0.5));
        assert!(!loss_covered(0.5, 0.2));
    }

    #[test]
    fn information_estimates() {
        let k = [Bit::Zero, Bit::One, Bit::Zero, Bit::One];
        let full: Vec<EveRecord> = k
            .iter()
            .map(|&b| EveRecord { conclusive: true, key_guess: Some(b), ..Default::default() })
            .collect();
        let info = eve_information(&full, &k).unwrap();
        assert_eq!(info.conclusive_fraction, 1.0);
        assert_eq!(info.guess_accuracy, Some(1.0));
        assert!((info.mutual_information_bits - 1.0).abs() < 1e-12);

        let none = vec![EveRecord::default(); 4];
        let info = eve_information(&none, &k).unwrap();
        assert_eq!(info.guess_accuracy, None);
        assert_eq!(info.mutual_information_bits, 0.0);
        assert!(eve_information(&[], &[]).is_err());
        assert!(eve_information(&none[..3], &k).is_err());
    }

    #[test]
    fn mutual_information_of_partial_erasure() {
        // conclusive with probability c, uniform key: I = c bits
        let c = 0.25;
        let joint = [[0.5 * c, 0.0, 0.5 * (1.0 - c)], [0.0, 0.5 * c, 0.5 * (1.0 - c)]];
        assert!((mutual_information(&joint) - c).abs() < 1e-12);
    }
}
