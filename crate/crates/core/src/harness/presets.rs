//! The preset scenario battery, shipped as the scenario files under
//! `scenarios/` and compiled in.

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::exact::ratio;
use super::metrics::{MetricSet, MetricValue};
use super::montecarlo::run_monte_carlo;
use super::table1::{table1_report, Disturbance, RowResult};
use super::{enumerate_exact, oracle_agreement, parse_scenario, run_scenario, Expectation, Mode, Scenario, ScenarioReport};
use crate::error::{QkdError, Result};

macro_rules! preset {
    ($file:literal) => {
        ($file, include_str!(concat!("../../scenarios/", $file)))
    };
}

/// File name and contents of every preset.
pub const PRESET_FILES: &[(&str, &str)] = &[
    preset!("basiskey-ideal.scn"),
    preset!("bb84-ideal.scn"),
    preset!("basiskey-ideal-mc.scn"),
    preset!("bb84-ideal-mc.scn"),
    preset!("basiskey-intercept-resend.scn"),
    preset!("bb84-intercept-resend.scn"),
    preset!("basiskey-intercept-resend-mc.scn"),
    preset!("bb84-intercept-resend-mc.scn"),
    preset!("basiskey-pns-fock2.scn"),
    preset!("basiskey-pns-usd-mc.scn"),
    preset!("basiskey-usd-filter-fock3.scn"),
    preset!("basiskey-efficiency-control.scn"),
    preset!("bb84-efficiency-control.scn"),
    preset!("basiskey-mismatch.scn"),
    preset!("bb84-mismatch.scn"),
    preset!("basiskey-depolarized.scn"),
    preset!("basiskey-dark-counts.scn"),
    preset!("basiskey-wcp-usd-filter-mc.scn"),
];

pub fn presets() -> Result<Vec<Scenario>> {
    PRESET_FILES
        .iter()
        .map(|(file, text)| {
            parse_scenario(text).map_err(|e| QkdError::Io(format!("preset {file}: {e}")))
        })
        .collect()
}

pub fn preset(name: &str) -> Result<Scenario> {
    presets()?
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| QkdError::Io(format!("no preset named `{name}`")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatteryOptions {
    /// Replaces every preset's seed.
    pub seed: Option<u64>,
    /// Rounds in the Monte Carlo twin of each enumerable preset; 0 skips
    /// the twins.
    pub oracle_rounds: u64,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        BatteryOptions { seed: None, oracle_rounds: 200_000 }
    }
}

/// Runs a scenario and, when it is enumerable, its Monte Carlo twin checked
/// against the exact metrics.
pub fn run_with_oracle(scenario: &Scenario, oracle_rounds: u64) -> Result<Vec<ScenarioReport>> {
    let mut out = vec![run_scenario(scenario)?];
    if scenario.mode == Mode::Enumerate && oracle_rounds > 0 {
        let exact = enumerate_exact(scenario)?;
        let (_, estimate) = run_monte_carlo(scenario, oracle_rounds, 1)?;
        let checks = oracle_agreement(&exact, &estimate);
        out.push(ScenarioReport::from_oracle(&format!("{}:oracle", scenario.name), estimate, &checks));
    }
    Ok(out)
}

/// Every preset, the oracle twins, and the Table I check, in a fixed order.
pub fn run_battery(options: BatteryOptions) -> Result<Vec<ScenarioReport>> {
    let mut scenarios = presets()?;
    if let Some(seed) = options.seed {
        for s in &mut scenarios {
            s.session.rng_seed = seed;
        }
    }
    let reports: Vec<Vec<ScenarioReport>> =
        scenarios.par_iter().map(|s| run_with_oracle(s, options.oracle_rounds)).collect::<Result<_>>()?;
    let mut reports: Vec<ScenarioReport> = reports.into_iter().flatten().collect();
    reports.push(table1_check());
    Ok(reports)
}

/// Table I as a report: its shape, completeness and the disturbance pattern.
pub fn table1_check() -> ScenarioReport {
    let rows = table1_report();
    let total: num_rational::BigRational = rows.iter().map(|r| r.probability.clone()).sum();
    let collapsed_clean = rows
        .iter()
        .filter(|r| r.result == RowResult::Collapsed)
        .all(|r| r.disturbance == Disturbance::None);
    let errors = rows.iter().filter(|r| r.disturbance == Disturbance::Error).count();
    let flag = |b: bool| MetricValue::Exact(if b { num_rational::BigRational::one() } else { num_rational::BigRational::zero() });

    let mut m = MetricSet::new();
    m.insert("rows", MetricValue::Exact(ratio(rows.len() as i64, 1)));
    m.insert("total_probability", MetricValue::Exact(total));
    m.insert("error_rows", MetricValue::Exact(ratio(errors as i64, 1)));
    m.insert("same_basis_row_undisturbed", flag(collapsed_clean));
    let scenario = Scenario {
        name: "table1".into(),
        session: crate::protocol::SessionConfig::ideal(crate::protocol::ProtocolKind::BasisKey, 1, 0),
        mode: Mode::Enumerate,
        f_ec: 1.0,
        expected: vec![
            Expectation::new("rows", ratio(7, 1), 0.0),
            Expectation::new("total_probability", ratio(1, 1), 0.0),
            Expectation::new("error_rows", ratio(2, 1), 0.0),
            Expectation::new("same_basis_row_undisturbed", ratio(1, 1), 0.0),
        ],
    };
    ScenarioReport::new(&scenario, Mode::Enumerate, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_with_a_unique_name() {
        let all = presets().unwrap();
        assert_eq!(all.len(), PRESET_FILES.len());
        let mut names: Vec<&str> = all.iter().map(|s| s.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), all.len());
        for ((file, _), s) in PRESET_FILES.iter().zip(&all) {
            assert_eq!(file.trim_end_matches(".scn"), s.name);
        }
    }

    #[test]
    fn table1_check_passes() {
        assert!(table1_check().passed());
    }
}
