//! Sifted keys to final keys: estimation, reconciliation, privacy
//! amplification.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    binary_entropy, cascade_correct, default_initial_block, estimate_qber, final_key_length,
    randomness_tests, toeplitz_amplify, BlockSchedule, CascadeParams, PhaseErrorModel,
    RandomnessReport, SiftedKeyPair,
};
use crate::bits::BitString;
use crate::error::{QkdError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostprocConfig {
    pub sample_fraction: f64,
    pub cascade_passes: u32,
    /// Overrides the `ceil(0.73 / e)` heuristic.
    pub initial_block: Option<usize>,
    pub schedule: BlockSchedule,
    pub verification_bits: u32,
    /// Reconciliation efficiency assumed by the key-length formula.
    pub f_ec: f64,
    pub phase_error: PhaseErrorModel,
}

impl Default for PostprocConfig {
    fn default() -> Self {
        PostprocConfig {
            sample_fraction: 0.1,
            cascade_passes: 4,
            initial_block: None,
            schedule: BlockSchedule::Doubling,
            verification_bits: 64,
            f_ec: 1.16,
            phase_error: PhaseErrorModel::EqualsBitError,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostprocReport {
    pub n_sifted: u64,
    pub qber_estimate: f64,
    pub bits_disclosed_estimation: u64,
    pub cascade_initial_block: u64,
    /// Cascade parities plus verification hash.
    pub ec_leakage_bits: u64,
    pub ec_success: bool,
    pub phase_error_used: f64,
    pub phase_error_model: String,
    pub final_key_length: u64,
    /// Tests on Bob's raw sifted key; absent when it is too short.
    pub randomness: Option<RandomnessReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FinalKeys {
    pub alice: BitString,
    pub bob: BitString,
}

pub fn postprocess<R: Rng + ?Sized>(
    keys: &SiftedKeyPair,
    config: &PostprocConfig,
    rng: &mut R,
) -> Result<(PostprocReport, FinalKeys)> {
    let randomness = randomness_tests(keys.bob()).ok();
    let estimate = estimate_qber(keys, config.sample_fraction, rng)?;
    let remaining = &estimate.remaining;
    let n_rem = remaining.len();
    let e_b = estimate.e_b_hat;
    let e_p = config.phase_error.phase_error(e_b);

    let mut report = PostprocReport {
        n_sifted: keys.len() as u64,
        qber_estimate: e_b,
        bits_disclosed_estimation: estimate.disclosed.len() as u64,
        cascade_initial_block: 0,
        ec_leakage_bits: 0,
        ec_success: false,
        phase_error_used: e_p,
        phase_error_model: config.phase_error.label().to_string(),
        final_key_length: 0,
        randomness,
    };
    if n_rem < 4 || e_b > 0.5 || !(0.0..=0.5).contains(&e_p) {
        return Ok((report, FinalKeys::default()));
    }

    let initial_block = config.initial_block.unwrap_or_else(|| default_initial_block(e_b, n_rem));
    let params = CascadeParams {
        passes: config.cascade_passes,
        initial_block,
        schedule: config.schedule,
        verification_bits: config.verification_bits,
    };
    let ec = cascade_correct(remaining, params, rng)?;
    report.cascade_initial_block = initial_block as u64;
    report.ec_leakage_bits = ec.total_leakage();
    report.ec_success = ec.success;
    if !ec.success {
        return Ok((report, FinalKeys::default()));
    }

    let out_len = final_key_length(n_rem as u64, e_b, e_p, config.f_ec, report.ec_leakage_bits)? as usize;
    report.final_key_length = out_len as u64;
    if out_len == 0 {
        return Ok((report, FinalKeys::default()));
    }
    let seed: BitString = (0..n_rem + out_len - 1).map(|_| rng.random::<bool>()).collect();
    let finals = FinalKeys {
        alice: toeplitz_amplify(remaining.alice(), &seed, out_len)?,
        bob: toeplitz_amplify(&ec.corrected_bob, &seed, out_len)?,
    };
    Ok((report, finals))
}

impl PostprocReport {
    /// Bits given away or compressed out, against the entropy the key-length
    /// formula charges for.
    pub fn accounting_is_conservative(&self, f_ec: f64) -> Result<bool> {
        let n_rem = self.n_sifted - self.bits_disclosed_estimation;
        if n_rem == 0 {
            return Ok(true);
        }
        let deficit = n_rem as f64
            * (binary_entropy(self.phase_error_used.min(0.5))?
                + f_ec * binary_entropy(self.qber_estimate.min(0.5))?);
        let removed = self.bits_disclosed_estimation + self.ec_leakage_bits + (n_rem - self.final_key_length);
        if self.final_key_length > n_rem {
            return Err(QkdError::Contract("final key longer than the remaining key".into()));
        }
        Ok(removed as f64 + 1.0 >= deficit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postproc::key_length;
    use crate::stream::master_stream;

    fn keys(n: usize, error_rate: f64, seed: u64) -> SiftedKeyPair {
        let mut rng = master_stream(seed);
        let a: BitString = (0..n).map(|_| rng.random::<bool>()).collect();
        let b: BitString = a.iter().map(|x| x ^ (rng.random::<f64>() < error_rate)).collect();
        SiftedKeyPair::new(a, b).unwrap()
    }

    #[test]
    fn error_free_keys_give_identical_final_keys() {
        let k = keys(5000, 0.0, 1);
        let cfg = PostprocConfig::default();
        let (report, finals) = postprocess(&k, &cfg, &mut master_stream(2)).unwrap();
        assert!(report.ec_success);
        assert_eq!(finals.alice, finals.bob);
        let n_rem = 5000 - report.bits_disclosed_estimation;
        assert_eq!(report.bits_disclosed_estimation, 500);
        let expected = final_key_length(n_rem, 0.0, 0.0, cfg.f_ec, report.ec_leakage_bits).unwrap();
        assert_eq!(report.final_key_length, expected);
        assert_eq!(finals.alice.len() as u64, expected);
        assert!(expected <= key_length(n_rem, 0.0, 0.0, cfg.f_ec).unwrap());
        assert!(report.accounting_is_conservative(cfg.f_ec).unwrap());
        assert!(report.randomness.unwrap().pass);
    }

    #[test]
    fn noisy_keys_reconcile() {
        let k = keys(20_000, 0.02, 3);
        let cfg = PostprocConfig::default();
        let (report, finals) = postprocess(&k, &cfg, &mut master_stream(4)).unwrap();
        assert!(report.ec_success);
        assert!(report.final_key_length > 0);
        assert_eq!(finals.alice, finals.bob);
        assert!(report.accounting_is_conservative(cfg.f_ec).unwrap());
        assert!(report.phase_error_model.contains("placeholder"));
    }

    #[test]
    fn high_error_rate_aborts() {
        let k = keys(2000, 0.6, 5);
        let (report, finals) = postprocess(&k, &PostprocConfig::default(), &mut master_stream(6)).unwrap();
        assert_eq!(report.final_key_length, 0);
        assert!(finals.alice.is_empty());
    }
}
