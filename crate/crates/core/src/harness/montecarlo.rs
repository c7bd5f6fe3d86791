//! Monte Carlo estimates of the scenario metrics from sampled rounds.

use rayon::prelude::*;

use super::exact::{asymptotic_key_rate, reports_basis_conditionals};
use super::metrics::*;
use super::Scenario;
use crate::adversary::{AttackStrategy, EveRecord, PublicView};
use crate::devices::DetectionEvent;
use crate::error::Result;
use crate::protocol::{run_round, RoundRecord, SessionConfig};

const CHUNK: u64 = 1 << 16;

/// Pooled counts over every sampled round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub rounds: u64,
    pub kept: u64,
    pub errors: u64,
    pub conclusive: u64,
    pub correct: u64,
    pub ones: u64,
    pub double_click: u64,
    pub no_click: u64,
    pub suppressed: u64,
    pub clicks: u64,
    pub click_ones: u64,
    /// Key bit (rows) against Eve's guess 0, 1 or inconclusive.
    pub joint: [[u64; 3]; 2],
    /// (kept, conclusive) over rounds where Eve measured in Alice's basis.
    pub alice_basis: (u64, u64),
    /// Same, for Bob's basis.
    pub bob_basis: (u64, u64),
}

impl Tally {
    pub fn add_round(&mut self, rec: &RoundRecord, eve: &EveRecord) {
        self.rounds += 1;
        self.double_click += rec.double_click_flag as u64;
        self.no_click += (rec.detection == DetectionEvent::NoClick) as u64;
        self.suppressed += eve.suppressed as u64;
        if let Some(b) = rec.detection.click_bit() {
            self.clicks += 1;
            self.click_ones += b.is_one() as u64;
        }
        if !rec.kept {
            return;
        }
        let (a, b) = (rec.alice_key_bit.unwrap(), rec.bob_key_bit.unwrap());
        self.kept += 1;
        self.errors += (a != b) as u64;
        self.ones += b.is_one() as u64;
        let col = match (eve.conclusive, eve.key_guess) {
            (true, Some(g)) => {
                self.conclusive += 1;
                self.correct += (g == a) as u64;
                g.as_u8() as usize
            }
            _ => 2,
        };
        self.joint[a.as_u8() as usize][col] += 1;
        if let Some(m) = eve.eve_basis {
            if m == rec.alice_basis {
                self.alice_basis.0 += 1;
                self.alice_basis.1 += eve.conclusive as u64;
            }
            if m == rec.bob_basis {
                self.bob_basis.0 += 1;
                self.bob_basis.1 += eve.conclusive as u64;
            }
        }
    }

    pub fn merge(mut self, o: &Tally) -> Tally {
        self.rounds += o.rounds;
        self.kept += o.kept;
        self.errors += o.errors;
        self.conclusive += o.conclusive;
        self.correct += o.correct;
        self.ones += o.ones;
        self.double_click += o.double_click;
        self.no_click += o.no_click;
        self.suppressed += o.suppressed;
        self.clicks += o.clicks;
        self.click_ones += o.click_ones;
        for i in 0..2 {
            for j in 0..3 {
                self.joint[i][j] += o.joint[i][j];
            }
        }
        self.alice_basis.0 += o.alice_basis.0;
        self.alice_basis.1 += o.alice_basis.1;
        self.bob_basis.0 += o.bob_basis.0;
        self.bob_basis.1 += o.bob_basis.1;
        self
    }
}

/// Seed of the `repeat`-th independent session under a master seed.
pub fn repeat_seed(master: u64, repeat: u32) -> u64 {
    master ^ (repeat as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Samples one session without keeping its transcript.
pub fn tally_session(config: &SessionConfig) -> Result<Tally> {
    config.validate()?;
    let uses_history = matches!(
        config.attack,
        AttackStrategy::EfficiencyControl { policy } if policy.uses_history()
    );
    if uses_history {
        let mut history = Vec::with_capacity(config.n_rounds as usize);
        let mut tally = Tally::default();
        for id in 0..config.n_rounds {
            let (rec, eve) = run_round(config, id, &PublicView { round_index: id, history: &history })?;
            tally.add_round(&rec, &eve);
            history.push(rec.public());
        }
        return Ok(tally);
    }
    let chunks: Vec<Tally> = (0..config.n_rounds.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut tally = Tally::default();
            for id in c * CHUNK..((c + 1) * CHUNK).min(config.n_rounds) {
                let (rec, eve) = run_round(config, id, &PublicView { round_index: id, history: &[] })?;
                tally.add_round(&rec, &eve);
            }
            Ok(tally)
        })
        .collect::<Result<_>>()?;
    Ok(chunks.iter().fold(Tally::default(), |acc, t| acc.merge(t)))
}

/// Runs `repeats` sessions of `rounds` each and pools their counts.
pub fn run_monte_carlo(scenario: &Scenario, rounds: u64, repeats: u32) -> Result<(Tally, MetricSet)> {
    let mut tally = Tally::default();
    for r in 0..repeats {
        let cfg = SessionConfig {
            n_rounds: rounds,
            rng_seed: repeat_seed(scenario.session.rng_seed, r),
            ..scenario.session.clone()
        };
        tally = tally.merge(&tally_session(&cfg)?);
    }
    Ok((tally, metrics_from_tally(&tally, scenario)))
}

/// Mutual information in bits with its delta-method standard error.
pub fn mutual_information_estimate(joint: &[[u64; 3]; 2]) -> (f64, f64) {
    let n: u64 = joint.iter().flatten().sum();
    if n == 0 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let row: Vec<f64> = joint.iter().map(|r| r.iter().sum::<u64>() as f64 / nf).collect();
    let col: Vec<f64> = (0..3).map(|j| (joint[0][j] + joint[1][j]) as f64 / nf).collect();
    let (mut mi, mut second) = (0.0, 0.0);
    for (i, r) in joint.iter().enumerate() {
        for (j, &c) in r.iter().enumerate() {
            if c > 0 {
                let p = c as f64 / nf;
                let l = (p / (row[i] * col[j])).ln();
                mi += p * l;
                second += p * l * l;
            }
        }
    }
    let var = ((second - mi * mi) / nf).max(0.0);
    ((mi / std::f64::consts::LN_2).max(0.0), var.sqrt() / std::f64::consts::LN_2)
}

pub fn metrics_from_tally(t: &Tally, scenario: &Scenario) -> MetricSet {
    let mut m = MetricSet::new();
    m.insert_opt(SIFT_FRACTION, MetricValue::proportion(t.kept, t.rounds));
    m.insert_opt(QBER, MetricValue::proportion(t.errors, t.kept));
    m.insert_opt(EVE_CONCLUSIVE_FRACTION, MetricValue::proportion(t.conclusive, t.kept));
    let (mi, mi_se) = mutual_information_estimate(&t.joint);
    m.insert(EVE_MUTUAL_INFORMATION, MetricValue::Estimate { value: mi, stderr: mi_se, n: t.kept });
    m.insert_opt(DOUBLE_CLICK_RATE, MetricValue::proportion(t.double_click, t.rounds));
    m.insert_opt(NO_CLICK_RATE, MetricValue::proportion(t.no_click, t.rounds));
    if t.rounds > 0 {
        m.insert(FINAL_KEY_RATE_PER_ROUND, key_rate_estimate(t, scenario.f_ec));
    }
    m.insert_opt(KEY_ONES_FRACTION, MetricValue::proportion(t.ones, t.kept));
    m.insert_opt(EVE_SUPPRESSION_RATE, MetricValue::proportion(t.suppressed, t.rounds));
    m.insert_opt(CLICK_ONES_FRACTION, MetricValue::proportion(t.click_ones, t.clicks));
    m.insert_opt(EVE_GUESS_ACCURACY, MetricValue::proportion(t.correct, t.conclusive));
    if reports_basis_conditionals(&scenario.session.attack) {
        m.insert_opt(EVE_CONCLUSIVE_IN_ALICE_BASIS, MetricValue::proportion(t.alice_basis.1, t.alice_basis.0));
        m.insert_opt(EVE_CONCLUSIVE_IN_BOB_BASIS, MetricValue::proportion(t.bob_basis.1, t.bob_basis.0));
    }
    m
}

fn key_rate_estimate(t: &Tally, f_ec: f64) -> MetricValue {
    let s = t.kept as f64 / t.rounds as f64;
    let q = if t.kept > 0 { t.errors as f64 / t.kept as f64 } else { 0.0 };
    let value = asymptotic_key_rate(s, q, f_ec);
    let r = if s > 0.0 { value / s } else { 0.0 };
    let var_s = s * (1.0 - s) / t.rounds as f64;
    let mut var = r * r * var_s;
    if r > 0.0 && q > 0.0 && q < 0.5 && t.kept > 0 {
        let dr = (1.0 + f_ec) * ((1.0 - q) / q).log2();
        var += s * s * dr * dr * q * (1.0 - q) / t.kept as f64;
    }
    MetricValue::Estimate { value, stderr: var.sqrt(), n: t.rounds }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutual_information_of_a_perfect_copy_is_one_bit() {
        let (mi, se) = mutual_information_estimate(&[[500, 0, 0], [0, 500, 0]]);
        assert!((mi - 1.0).abs() < 1e-12);
        assert!(se < 1e-9);
        let (mi, _) = mutual_information_estimate(&[[250, 250, 0], [250, 250, 0]]);
        assert!(mi.abs() < 1e-12);
    }

    #[test]
    fn tallies_merge_additively() {
        let mut joint = [[0; 3]; 2];
        joint[1][2] = 4;
        let a = Tally { rounds: 3, joint, ..Tally::default() };
        let b = a.merge(&a);
        assert_eq!(b.rounds, 6);
        assert_eq!(b.joint[1][2], 8);
    }

    #[test]
    fn repeat_seeds_differ() {
        assert_ne!(repeat_seed(7, 0), repeat_seed(7, 1));
        assert_eq!(repeat_seed(7, 0), 7);
    }
}
