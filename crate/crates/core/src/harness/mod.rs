//! Scenarios, the exact-enumeration oracle, the Monte Carlo runner, reports
//! and the command-line front end.

pub mod cli;
pub mod exact;
pub mod metrics;
pub mod montecarlo;
pub mod presets;
pub mod report;
pub mod scenario;
pub mod table1;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

pub use exact::enumerate_exact;
pub use metrics::{MetricSet, MetricValue};
pub use montecarlo::{run_monte_carlo, Tally};
pub use report::{ExpectationResult, ScenarioReport};
pub use scenario::parse_scenario;
pub use table1::{intercept_resend_table, table1_report, TableRow};

use crate::error::Result;
use crate::protocol::SessionConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Enumerate,
    MonteCarlo { n_rounds: u64, n_repeats: u32 },
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Enumerate => "enumerate",
            Mode::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub metric: String,
    pub expected: f64,
    /// Set when the expected value was written as an exact rational.
    pub expected_exact: Option<BigRational>,
    pub tolerance: f64,
}

impl Expectation {
    pub fn new(metric: &str, expected: BigRational, tolerance: f64) -> Self {
        Expectation {
            metric: metric.to_string(),
            expected: expected.to_f64().unwrap_or(f64::NAN),
            expected_exact: Some(expected),
            tolerance,
        }
    }

    /// Exact metrics checked against an exact zero-tolerance expectation must
    /// match as rationals; everything else compares within the tolerance.
    pub fn check(&self, value: Option<&MetricValue>) -> bool {
        let Some(v) = value else { return false };
        if let (Some(q), Some(e), true) = (v.exact(), &self.expected_exact, self.tolerance == 0.0) {
            return q == e;
        }
        (v.value() - self.expected).abs() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub session: SessionConfig,
    pub mode: Mode,
    /// Reconciliation efficiency used by the asymptotic key-rate metric.
    pub f_ec: f64,
    pub expected: Vec<Expectation>,
}

/// Runs a scenario in its own mode and checks its expectations.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioReport> {
    let metrics = match scenario.mode {
        Mode::Enumerate => enumerate_exact(scenario)?,
        Mode::MonteCarlo { n_rounds, n_repeats } => run_monte_carlo(scenario, n_rounds, n_repeats)?.1,
    };
    Ok(ScenarioReport::new(scenario, scenario.mode, metrics))
}

/// Runs a scenario through the exact oracle regardless of its mode.
pub fn run_enumeration(scenario: &Scenario) -> Result<ScenarioReport> {
    let metrics = enumerate_exact(scenario)?;
    Ok(ScenarioReport::new(scenario, Mode::Enumerate, metrics))
}

/// Number of standard errors a Monte Carlo estimate may sit from the oracle.
pub const ORACLE_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub metric: String,
    pub exact: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub allowance: f64,
    pub pass: bool,
}

/// Compares Monte Carlo estimates with the exact metrics, metric by metric.
///
/// The allowance is `ORACLE_SIGMAS` standard errors. The plug-in mutual
/// information is biased upward by about `(r-1)(c-1) / (2 N ln 2)`, which is
/// added to its allowance.
pub fn oracle_agreement(exact: &MetricSet, estimate: &MetricSet) -> Vec<OracleCheck> {
    exact
        .iter()
        .map(|(name, value)| {
            let mc = estimate.get(name);
            let (est, se, n) = match mc {
                Some(MetricValue::Estimate { value, stderr, n }) => (*value, *stderr, *n),
                Some(other) => (other.value(), 0.0, 0),
                None => (f64::NAN, 0.0, 0),
            };
            let mut allowance = ORACLE_SIGMAS * se;
            if name == metrics::EVE_MUTUAL_INFORMATION && n > 0 {
                allowance += 2.0 / (2.0 * n as f64 * std::f64::consts::LN_2);
            }
            let truth = value.value();
            let pass = (est - truth).abs() <= allowance + 1e-12;
            OracleCheck { metric: name.to_string(), exact: truth, estimate: est, stderr: se, allowance, pass }
        })
        .collect()
}
