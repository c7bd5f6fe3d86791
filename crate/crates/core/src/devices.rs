//! Photon sources and Bob's two-detector measurement unit.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, QkdError, Result};
use crate::qcore::{measure, Basis, Bit, QubitSymbol};
use crate::stream::chance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceModel {
    SinglePhoton,
    /// Phase-randomized weak coherent pulses with Poisson(mu) photon number.
    WeakCoherent { mu: f64 },
    /// Every pulse carries exactly `n` photons.
    Fock { n: u32 },
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SourceModel::WeakCoherent { mu } if !(mu >= 0.0 && mu.is_finite()) => Err(
                QkdError::Parameter(format!("mean photon number must be >= 0, got {mu}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Photon-number state with all photons carrying the same symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhotonPulse {
    pub n: u32,
    pub state: QubitSymbol,
}

impl PhotonPulse {
    pub fn vacuum() -> Self {
        PhotonPulse { n: 0, state: QubitSymbol::Vacuum }
    }

    pub fn new(n: u32, state: QubitSymbol) -> Self {
        if n == 0 {
            Self::vacuum()
        } else {
            PhotonPulse { n, state }
        }
    }

    pub fn is_vacuum(&self) -> bool {
        self.n == 0
    }
}

pub fn emit<R: Rng + ?Sized>(
    source: SourceModel,
    basis: Basis,
    bit: Bit,
    rng: &mut R,
) -> Result<PhotonPulse> {
    source.validate()?;
    let n = match source {
        SourceModel::SinglePhoton => 1,
        SourceModel::Fock { n } => n,
        SourceModel::WeakCoherent { mu: 0.0 } => 0,
        SourceModel::WeakCoherent { mu } => {
            let poisson = Poisson::new(mu).map_err(|e| QkdError::Parameter(e.to_string()))?;
            poisson.sample(rng) as u32
        }
    };
    Ok(PhotonPulse::new(n, QubitSymbol::pure(basis, bit)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubleClickPolicy {
    /// Squash to a uniformly random bit and flag the round.
    #[default]
    RandomAssign,
    Discard,
}

/// Two threshold detectors, one per outcome bit. Efficiencies do not depend
/// on which basis Bob selected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorPair {
    pub eta0: f64,
    pub eta1: f64,
    pub dark_prob: f64,
    pub double_click_policy: DoubleClickPolicy,
}

impl Default for DetectorPair {
    fn default() -> Self {
        DetectorPair::ideal()
    }
}

impl DetectorPair {
    pub fn ideal() -> Self {
        DetectorPair {
            eta0: 1.0,
            eta1: 1.0,
            dark_prob: 0.0,
            double_click_policy: DoubleClickPolicy::RandomAssign,
        }
    }

    pub fn new(eta0: f64, eta1: f64, dark_prob: f64) -> Result<Self> {
        let d = DetectorPair { eta0, eta1, dark_prob, ..Self::ideal() };
        d.validate()?;
        Ok(d)
    }

    pub fn with_efficiencies(self, eta0: f64, eta1: f64) -> Self {
        DetectorPair { eta0, eta1, ..self }
    }

    pub fn efficiency(&self, bit: Bit) -> f64 {
        match bit {
            Bit::Zero => self.eta0,
            Bit::One => self.eta1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("eta0", self.eta0)?;
        check_probability("eta1", self.eta1)?;
        check_probability("dark count probability", self.dark_prob)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionEvent {
    NoClick,
    Click(Bit),
    DoubleClick,
}

impl DetectionEvent {
    pub fn click_bit(&self) -> Option<Bit> {
        match self {
            DetectionEvent::Click(b) => Some(*b),
            _ => None,
        }
    }
}

/// A detection after the double-click policy has been applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    /// Never `DoubleClick`.
    pub event: DetectionEvent,
    pub double_click: bool,
}

/// The raw click pattern of one gate, before any double-click squashing.
pub fn click_pattern<R: Rng + ?Sized>(
    pulse: &PhotonPulse,
    bob_basis: Basis,
    detectors: &DetectorPair,
    rng: &mut R,
) -> Result<DetectionEvent> {
    detectors.validate()?;
    let mut fired = [false; 2];
    if !pulse.is_vacuum() {
        for _ in 0..pulse.n {
            let bit = measure(pulse.state, bob_basis, rng)?;
            let eta = detectors.efficiency(bit);
            if chance(rng, eta) {
                fired[bit.as_u8() as usize] = true;
            }
        }
    }
    for f in fired.iter_mut() {
        if chance(rng, detectors.dark_prob) {
            *f = true;
        }
    }
    Ok(match fired {
        [false, false] => DetectionEvent::NoClick,
        [true, false] => DetectionEvent::Click(Bit::Zero),
        [false, true] => DetectionEvent::Click(Bit::One),
        [true, true] => DetectionEvent::DoubleClick,
    })
}

pub fn detect<R: Rng + ?Sized>(
    pulse: &PhotonPulse,
    bob_basis: Basis,
    detectors: &DetectorPair,
    rng: &mut R,
) -> Result<Detection> {
    let raw = click_pattern(pulse, bob_basis, detectors, rng)?;
    Ok(match raw {
        DetectionEvent::DoubleClick => Detection {
            event: match detectors.double_click_policy {
                DoubleClickPolicy::RandomAssign => DetectionEvent::Click(Bit::random(rng)),
                DoubleClickPolicy::Discard => DetectionEvent::NoClick,
            },
            double_click: true,
        },
        event => Detection { event, double_click: false },
    })
}
