//! Cascade information reconciliation.
//!
//! Bob's key is corrected toward Alice's by exchanging block parities and
//! bisecting blocks whose parities disagree. Each pass uses a fresh public
//! shuffle; every bit flipped in a later pass reopens the blocks of earlier
//! passes that contain it. Every parity Alice reveals is counted as leakage.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SiftedKeyPair;
use crate::bits::BitString;
use crate::error::{QkdError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSchedule {
    /// Block size doubles after every pass.
    #[default]
    Doubling,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeParams {
    pub passes: u32,
    pub initial_block: usize,
    pub schedule: BlockSchedule,
    /// Random subset parities compared after the last pass.
    pub verification_bits: u32,
}

impl CascadeParams {
    pub fn new(passes: u32, initial_block: usize) -> Self {
        CascadeParams { passes, initial_block, schedule: BlockSchedule::Doubling, verification_bits: 64 }
    }
}

/// `ceil(0.73 / e)` clamped to `[4, n / 2]`.
pub fn default_initial_block(e_b_hat: f64, n: usize) -> usize {
    let upper = (n / 2).max(4);
    if e_b_hat <= 0.0 {
        return upper;
    }
    ((0.73 / e_b_hat).ceil() as usize).clamp(4, upper)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeOutcome {
    pub corrected_bob: BitString,
    /// Block and bisection parities disclosed during the passes.
    pub leakage_bits: u64,
    /// Parities disclosed by the final verification hash.
    pub verification_bits: u64,
    /// Verification hash agreed.
    pub success: bool,
}

impl CascadeOutcome {
    pub fn total_leakage(&self) -> u64 {
        self.leakage_bits + self.verification_bits
    }
}

struct Pass {
    blocks: Vec<Vec<usize>>,
    /// Alice's parity per block, known to Bob once disclosed.
    alice_parity: Vec<bool>,
    block_of: Vec<usize>,
}

struct Reconciler<'a> {
    alice: &'a BitString,
    bob: BitString,
    passes: Vec<Pass>,
    leaked: u64,
}

impl Reconciler<'_> {
    fn bob_parity(&self, idx: &[usize]) -> bool {
        self.bob.parity_of(idx)
    }

    /// Bisects a block with odd error parity and returns the error position.
    fn bisect(&mut self, block: &[usize]) -> usize {
        let mut range = block;
        while range.len() > 1 {
            let (left, right) = range.split_at(range.len().div_ceil(2));
            self.leaked += 1;
            range = if self.alice.parity_of(left) != self.bob_parity(left) { left } else { right };
        }
        range[0]
    }

    /// Corrects block `b` of pass `p`, then follows the cascade of blocks in
    /// passes `0..=upto` whose parity the flip disturbed.
    fn correct_from(&mut self, p: usize, b: usize, upto: usize) {
        let mut queue = VecDeque::from([(p, b)]);
        while let Some((q, blk)) = queue.pop_front() {
            let block = &self.passes[q].blocks[blk];
            if self.passes[q].alice_parity[blk] == self.bob_parity(block) {
                continue;
            }
            let block = block.clone();
            let pos = self.bisect(&block);
            self.bob.flip(pos);
            for r in 0..=upto {
                if r != q {
                    queue.push_back((r, self.passes[r].block_of[pos]));
                }
            }
        }
    }
}

pub fn cascade_correct<R: Rng + ?Sized>(
    keys: &SiftedKeyPair,
    params: CascadeParams,
    rng: &mut R,
) -> Result<CascadeOutcome> {
    if params.passes == 0 {
        return Err(QkdError::Parameter("Cascade needs at least one pass".into()));
    }
    if params.initial_block < 2 {
        return Err(QkdError::Parameter(format!(
            "initial block size must be >= 2, got {}",
            params.initial_block
        )));
    }
    let n = keys.len();
    let mut rec = Reconciler { alice: keys.alice(), bob: keys.bob().clone(), passes: Vec::new(), leaked: 0 };
    if n > 0 {
        let mut order: Vec<usize> = (0..n).collect();
        for p in 0..params.passes as usize {
            if p > 0 {
                order.shuffle(rng);
            }
            let size = match params.schedule {
                BlockSchedule::Doubling => params.initial_block.saturating_mul(1 << p.min(40)),
                BlockSchedule::Constant => params.initial_block,
            }
            .min(n);
            let blocks: Vec<Vec<usize>> = order.chunks(size).map(<[usize]>::to_vec).collect();
            let mut block_of = vec![0usize; n];
            for (b, block) in blocks.iter().enumerate() {
                for &i in block {
                    block_of[i] = b;
                }
            }
            let alice_parity: Vec<bool> = blocks.iter().map(|b| keys.alice().parity_of(b)).collect();
            rec.leaked += blocks.len() as u64;
            let n_blocks = blocks.len();
            rec.passes.push(Pass { blocks, alice_parity, block_of });
            for b in 0..n_blocks {
                rec.correct_from(p, b, p);
            }
        }
    }

    let mut success = true;
    for _ in 0..params.verification_bits {
        let subset: Vec<usize> = (0..n).filter(|_| rng.random::<bool>()).collect();
        if keys.alice().parity_of(&subset) != rec.bob.parity_of(&subset) {
            success = false;
        }
    }
    Ok(CascadeOutcome {
        corrected_bob: rec.bob,
        leakage_bits: rec.leaked,
        verification_bits: params.verification_bits as u64,
        success,
    })
}
