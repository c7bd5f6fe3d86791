//! Frequency (monobit) and runs tests on raw key bits.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{QkdError, Result};

pub const RANDOMNESS_Z_THRESHOLD: f64 = 3.0;
pub const MIN_RANDOMNESS_LENGTH: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomnessReport {
    pub monobit_z: f64,
    /// Infinite when the string is constant and the runs statistic is undefined.
    pub runs_z: f64,
    pub pass: bool,
}

/// Monobit z = (2 ones - n) / sqrt(n). The runs z uses the Wald-Wolfowitz
/// mean and variance conditioned on the observed counts of zeros and ones.
pub fn randomness_tests(bits: &BitString) -> Result<RandomnessReport> {
    let n = bits.len();
    if n < MIN_RANDOMNESS_LENGTH {
        return Err(QkdError::Parameter(format!(
            "randomness tests need at least {MIN_RANDOMNESS_LENGTH} bits, got {n}"
        )));
    }
    let nf = n as f64;
    let ones = bits.count_ones() as f64;
    let zeros = nf - ones;
    let monobit_z = (2.0 * ones - nf) / nf.sqrt();

    let runs = 1 + bits.as_slice().windows(2).filter(|w| w[0] != w[1]).count();
    let runs_z = if ones == 0.0 || zeros == 0.0 {
        f64::INFINITY
    } else {
        let mean = 2.0 * ones * zeros / nf + 1.0;
        let var = (mean - 1.0) * (mean - 2.0) / (nf - 1.0);
        if var > 0.0 {
            (runs as f64 - mean) / var.sqrt()
        } else {
            f64::INFINITY
        }
    };
    let pass = monobit_z.abs() < RANDOMNESS_Z_THRESHOLD && runs_z.abs() < RANDOMNESS_Z_THRESHOLD;
    Ok(RandomnessReport { monobit_z, runs_z, pass })
}
