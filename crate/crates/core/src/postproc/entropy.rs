use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};

/// H2(p) in bits, with 0 log 0 = 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QkdError::Parameter(format!("binary entropy needs p in [0, 1], got {p}")));
    }
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Asymptotic secret key length `floor(n (1 - H2(e_p) - f_ec H2(e_b)))`,
/// clamped at zero. Zero means abort.
pub fn key_length(n: u64, e_b: f64, e_p: f64, f_ec: f64) -> Result<u64> {
    if n == 0 {
        return Err(QkdError::Parameter("key length needs n >= 1".into()));
    }
    for (name, e) in [("bit error rate", e_b), ("phase error rate", e_p)] {
        if !(0.0..=0.5).contains(&e) {
            return Err(QkdError::Parameter(format!("{name} must lie in [0, 1/2], got {e}")));
        }
    }
    if !(f_ec >= 1.0 && f_ec.is_finite()) {
        return Err(QkdError::Parameter(format!("reconciliation efficiency must be >= 1, got {f_ec}")));
    }
    let rate = 1.0 - binary_entropy(e_p)? - f_ec * binary_entropy(e_b)?;
    Ok((n as f64 * rate).floor().max(0.0) as u64)
}

/// Key length after charging reconciliation leakage that exceeds the
/// `f_ec H2(e_b)` budget already inside [`key_length`].
pub fn final_key_length(n: u64, e_b: f64, e_p: f64, f_ec: f64, ec_leakage_bits: u64) -> Result<u64> {
    let base = key_length(n, e_b, e_p, f_ec)?;
    let budget = (f_ec * binary_entropy(e_b)? * n as f64).ceil() as u64;
    Ok(base.saturating_sub(ec_leakage_bits.saturating_sub(budget)))
}

/// How the phase error rate used for privacy amplification is obtained from
/// the measured bit error rate. No proven relation exists for the
/// basis-keyed protocol; every report carries the label of the model used.
#[derive(Clone, Copy, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PhaseErrorModel {
    /// e_p = e_b. A placeholder, not a security claim.
    #[default]
    EqualsBitError,
    Fixed(f64),
    #[serde(skip)]
    Custom(fn(f64) -> f64),
}

impl PhaseErrorModel {
    pub fn phase_error(&self, e_b: f64) -> f64 {
        match self {
            PhaseErrorModel::EqualsBitError => e_b,
            PhaseErrorModel::Fixed(e) => *e,
            PhaseErrorModel::Custom(f) => f(e_b),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PhaseErrorModel::EqualsBitError => "e_p = e_b (placeholder, unproven)",
            PhaseErrorModel::Fixed(_) => "e_p fixed by configuration",
            PhaseErrorModel::Custom(_) => "e_p from user-supplied relation",
        }
    }
}

impl fmt::Debug for PhaseErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseErrorModel::EqualsBitError => f.write_str("EqualsBitError"),
            PhaseErrorModel::Fixed(e) => write!(f, "Fixed({e})"),
            PhaseErrorModel::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PartialEq for PhaseErrorModel {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PhaseErrorModel::EqualsBitError, PhaseErrorModel::EqualsBitError) => true,
            (PhaseErrorModel::Fixed(a), PhaseErrorModel::Fixed(b)) => a == b,
            (PhaseErrorModel::Custom(a), PhaseErrorModel::Custom(b)) => std::ptr::fn_addr_eq(*a, *b),
            _ => false,
        }
    }
}
