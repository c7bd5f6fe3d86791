use rand::seq::index;
use rand::Rng;

use super::SiftedKeyPair;
use crate::error::{QkdError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QberEstimate {
    pub e_b_hat: f64,
    /// Sorted positions that were compared in public.
    pub disclosed: Vec<usize>,
    /// The key pair with the disclosed positions removed.
    pub remaining: SiftedKeyPair,
}

pub const MIN_ESTIMATION_LENGTH: usize = 10;

/// Publicly compares a uniformly random `ceil(fraction * n)` positions.
/// Those positions are consumed and never reused.
pub fn estimate_qber<R: Rng + ?Sized>(
    keys: &SiftedKeyPair,
    sample_fraction: f64,
    rng: &mut R,
) -> Result<QberEstimate> {
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(QkdError::Parameter(format!(
            "sample fraction must lie in (0, 1], got {sample_fraction}"
        )));
    }
    let n = keys.len();
    if n < MIN_ESTIMATION_LENGTH {
        return Err(QkdError::Parameter(format!(
            "need at least {MIN_ESTIMATION_LENGTH} sifted bits to estimate the error rate, got {n}"
        )));
    }
    let k = ((sample_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut disclosed = index::sample(rng, n, k).into_vec();
    disclosed.sort_unstable();

    let mut in_sample = vec![false; n];
    let mut mismatches = 0usize;
    for &i in &disclosed {
        in_sample[i] = true;
        if keys.alice()[i] != keys.bob()[i] {
            mismatches += 1;
        }
    }
    let keep: Vec<bool> = in_sample.iter().map(|s| !s).collect();
    let remaining = SiftedKeyPair::new(keys.alice().select(&keep), keys.bob().select(&keep))?;
    Ok(QberEstimate { e_b_hat: mismatches as f64 / k as f64, disclosed, remaining })
}
