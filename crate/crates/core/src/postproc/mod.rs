//! Classical postprocessing of sifted keys: parameter estimation, Cascade
//! reconciliation, Toeplitz privacy amplification, key-length accounting and
//! raw-key randomness checks.

mod cascade;
mod entropy;
mod estimate;
mod pipeline;
mod randomness;
mod toeplitz;

pub use cascade::{cascade_correct, default_initial_block, BlockSchedule, CascadeOutcome, CascadeParams};
pub use entropy::{binary_entropy, final_key_length, key_length, PhaseErrorModel};
pub use estimate::{estimate_qber, QberEstimate};
pub use pipeline::{postprocess, FinalKeys, PostprocConfig, PostprocReport};
pub use randomness::{randomness_tests, RandomnessReport, RANDOMNESS_Z_THRESHOLD};
pub use toeplitz::toeplitz_amplify;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{QkdError, Result};

/// Alice's and Bob's sifted keys, position-aligned.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SiftedKeyPair {
    alice: BitString,
    bob: BitString,
}

impl SiftedKeyPair {
    pub fn new(alice: BitString, bob: BitString) -> Result<Self> {
        if alice.len() != bob.len() {
            return Err(QkdError::Parameter(format!(
                "sifted keys differ in length: {} vs {}",
                alice.len(),
                bob.len()
            )));
        }
        Ok(SiftedKeyPair { alice, bob })
    }

    pub fn alice(&self) -> &BitString {
        &self.alice
    }

    pub fn bob(&self) -> &BitString {
        &self.bob
    }

    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }

    pub fn errors(&self) -> usize {
        self.alice.hamming_distance(&self.bob)
    }

    pub fn error_rate(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.errors() as f64 / self.len() as f64)
    }
}
