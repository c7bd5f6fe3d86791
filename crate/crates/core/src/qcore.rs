//! Symbolic BB84 states and the handful of quantum operations the protocol
//! needs: projective measurement in X/Z, depolarization, overlaps and the
//! optimal unambiguous-discrimination rate.
//!
//! Every state that appears in the protocol lies in the discrete BB84 set, so
//! states are carried as symbols and all probabilities are closed-form.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, QkdError, Result};
use crate::stream::chance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::X, Basis::Z];

    pub fn conjugate(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Basis {
        if rng.random::<bool>() {
            Basis::Z
        } else {
            Basis::X
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::X => f.write_str("X"),
            Basis::Z => f.write_str("Z"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub const ALL: [Bit; 2] = [Bit::Zero, Bit::One];

    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Bit {
        Bit::from(rng.random::<bool>())
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn is_one(self) -> bool {
        self == Bit::One
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl From<Bit> for bool {
    fn from(b: Bit) -> Self {
        b.is_one()
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// One of the four BB84 states, the maximally mixed state, or vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitSymbol {
    Pure { basis: Basis, bit: Bit },
    MaximallyMixed,
    Vacuum,
}

impl QubitSymbol {
    pub fn pure(basis: Basis, bit: Bit) -> Self {
        QubitSymbol::Pure { basis, bit }
    }

    /// The four BB84 states in a fixed order: |0>_x, |1>_x, |0>_z, |1>_z.
    pub fn bb84_states() -> [QubitSymbol; 4] {
        [
            QubitSymbol::pure(Basis::X, Bit::Zero),
            QubitSymbol::pure(Basis::X, Bit::One),
            QubitSymbol::pure(Basis::Z, Bit::Zero),
            QubitSymbol::pure(Basis::Z, Bit::One),
        ]
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, QubitSymbol::Pure { .. })
    }
}

impl fmt::Display for QubitSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitSymbol::Pure { basis, bit } => {
                write!(f, "|{}>_{}", bit, basis.to_string().to_lowercase())
            }
            QubitSymbol::MaximallyMixed => f.write_str("I/2"),
            QubitSymbol::Vacuum => f.write_str("vac"),
        }
    }
}

/// Projective measurement of `state` in `basis`.
///
/// Vacuum is rejected: whether anything clicks at all is the detector
/// model's business.
pub fn measure<R: Rng + ?Sized>(state: QubitSymbol, basis: Basis, rng: &mut R) -> Result<Bit> {
    match state {
        QubitSymbol::Pure { basis: b, bit } if b == basis => Ok(bit),
        QubitSymbol::Pure { .. } | QubitSymbol::MaximallyMixed => Ok(Bit::random(rng)),
        QubitSymbol::Vacuum => Err(QkdError::Contract(
            "cannot measure vacuum; route empty pulses through the detector model".into(),
        )),
    }
}

/// Depolarizing channel: replaces the state by I/2 with probability `p`.
pub fn depolarize<R: Rng + ?Sized>(state: QubitSymbol, p: f64, rng: &mut R) -> Result<QubitSymbol> {
    check_probability("depolarizing probability", p)?;
    if state == QubitSymbol::Vacuum {
        return Ok(state);
    }
    if chance(rng, p) {
        Ok(QubitSymbol::MaximallyMixed)
    } else {
        Ok(state)
    }
}

/// |<a|b>| for two BB84 states.
pub fn overlap_magnitude(a: QubitSymbol, b: QubitSymbol) -> Result<f64> {
    match (a, b) {
        (
            QubitSymbol::Pure { basis: ba, bit: xa },
            QubitSymbol::Pure { basis: bb, bit: xb },
        ) => Ok(if ba != bb {
            FRAC_1_SQRT_2
        } else if xa == xb {
            1.0
        } else {
            0.0
        }),
        _ => Err(QkdError::Contract(format!(
            "overlap is defined for pure BB84 states only, got {a} and {b}"
        ))),
    }
}

/// Optimal conclusive probability for unambiguously discriminating `n_copies`
/// copies of one of two pure states whose single-copy overlap is 1/sqrt(2).
///
/// The n-copy overlap is (1/sqrt(2))^n, and the optimal rate is one minus it.
pub fn usd_success_prob(n_copies: u32) -> Result<f64> {
    if n_copies == 0 {
        return Err(QkdError::Parameter(
            "unambiguous discrimination needs at least one copy".into(),
        ));
    }
    // 2^(-n/2), exact for even n
    Ok(1.0 - 0.5f64.powf(n_copies as f64 / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn conjugate_and_flip_are_involutions() {
        for b in Basis::ALL {
            assert_ne!(b.conjugate(), b);
            assert_eq!(b.conjugate().conjugate(), b);
        }
        for x in Bit::ALL {
            assert_eq!(x.flip().flip(), x);
        }
    }

    #[test]
    fn same_basis_measurement_is_deterministic() {
        let mut rng = rng();
        for state in QubitSymbol::bb84_states() {
            let QubitSymbol::Pure { basis, bit } = state else { unreachable!() };
            for _ in 0..100_000 {
                assert_eq!(measure(state, basis, &mut rng).unwrap(), bit);
            }
        }
    }

    #[test]
    fn conjugate_basis_measurement_is_unbiased() {
        let mut rng = rng();
        let n = 1_000_000u32;
        let sigma = (0.25 / n as f64).sqrt();
        for state in QubitSymbol::bb84_states() {
            let QubitSymbol::Pure { basis, .. } = state else { unreachable!() };
            let ones = (0..n)
                .filter(|_| measure(state, basis.conjugate(), &mut rng).unwrap().is_one())
                .count();
            let mean = ones as f64 / n as f64;
            assert!((mean - 0.5).abs() < 4.0 * sigma, "{state}: {mean}");
        }
    }

    #[test]
    fn mixed_state_gives_uniform_bits() {
        let mut rng = rng();
        let n = 200_000;
        let ones = (0..n)
            .filter(|_| measure(QubitSymbol::MaximallyMixed, Basis::Z, &mut rng).unwrap().is_one())
            .count();
        let sigma = (0.25 / n as f64).sqrt();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 4.0 * sigma);
    }

    #[test]
    fn vacuum_cannot_be_measured() {
        let err = measure(QubitSymbol::Vacuum, Basis::X, &mut rng()).unwrap_err();
        assert!(matches!(err, QkdError::Contract(_)));
    }

    #[test]
    fn depolarize_extremes_and_rate() {
        let mut rng = rng();
        let s = QubitSymbol::pure(Basis::X, Bit::One);
        assert_eq!(depolarize(s, 0.0, &mut rng).unwrap(), s);
        assert_eq!(depolarize(s, 1.0, &mut rng).unwrap(), QubitSymbol::MaximallyMixed);
        assert_eq!(depolarize(QubitSymbol::Vacuum, 1.0, &mut rng).unwrap(), QubitSymbol::Vacuum);
        assert!(depolarize(s, 1.5, &mut rng).is_err());
        assert!(depolarize(s, -0.1, &mut rng).is_err());

        let n = 1_000_000;
        let mixed = (0..n)
            .filter(|_| depolarize(s, 0.2, &mut rng).unwrap() == QubitSymbol::MaximallyMixed)
            .count();
        assert!((mixed as f64 / n as f64 - 0.2).abs() < 0.002);
    }

    #[test]
    fn overlap_table() {
        let z0 = QubitSymbol::pure(Basis::Z, Bit::Zero);
        assert_eq!(overlap_magnitude(z0, z0).unwrap(), 1.0);
        assert_eq!(overlap_magnitude(z0, QubitSymbol::pure(Basis::Z, Bit::One)).unwrap(), 0.0);
        let cross = overlap_magnitude(z0, QubitSymbol::pure(Basis::X, Bit::Zero)).unwrap();
        assert!((cross - 0.707_106_781_186_547_5).abs() < 1e-15);
        for a in QubitSymbol::bb84_states() {
            for b in QubitSymbol::bb84_states() {
                assert_eq!(overlap_magnitude(a, b).unwrap(), overlap_magnitude(b, a).unwrap());
            }
        }
        assert!(overlap_magnitude(z0, QubitSymbol::MaximallyMixed).is_err());
    }

    #[test]
    fn usd_rate() {
        // single-copy overlap squared, taken from the overlap table
        let c = overlap_magnitude(
            QubitSymbol::pure(Basis::Z, Bit::Zero),
            QubitSymbol::pure(Basis::X, Bit::Zero),
        )
        .unwrap();
        assert!((usd_success_prob(1).unwrap() - (1.0 - c)).abs() < 1e-15);
        assert!((usd_success_prob(1).unwrap() - 0.292_893_218_813_452_5).abs() < 1e-12);
        assert_eq!(usd_success_prob(2).unwrap(), 0.5);
        assert_eq!(usd_success_prob(4).unwrap(), 0.75);
        assert!((usd_success_prob(1).unwrap() - (1.0 - FRAC_1_SQRT_2)).abs() < 1e-15);
        for n in 1..20 {
            let (a, b) = (usd_success_prob(n).unwrap(), usd_success_prob(n + 1).unwrap());
            assert!(b > a && b < 1.0);
        }
        assert!(usd_success_prob(60).unwrap() > 1.0 - 1e-8);
        assert!(usd_success_prob(0).is_err());
    }
}
