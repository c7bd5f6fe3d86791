//! Machine-readable scenario reports in JSON and CSV.

use serde::Serialize;

use super::metrics::{MetricSet, MetricValue};
use super::{Expectation, Mode, OracleCheck, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationResult {
    pub metric: String,
    pub expected: f64,
    pub tolerance: f64,
    /// `None` when the run did not produce the metric.
    pub observed: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub mode: &'static str,
    pub metrics: MetricSet,
    pub expectations: Vec<ExpectationResult>,
}

fn judge(e: &Expectation, metrics: &MetricSet) -> ExpectationResult {
    let value = metrics.get(&e.metric);
    ExpectationResult {
        metric: e.metric.clone(),
        expected: e.expected,
        tolerance: e.tolerance,
        observed: value.map(MetricValue::value),
        pass: e.check(value),
    }
}

impl ScenarioReport {
    pub fn new(scenario: &Scenario, mode: Mode, metrics: MetricSet) -> Self {
        let expectations = scenario.expected.iter().map(|e| judge(e, &metrics)).collect();
        ScenarioReport { scenario: scenario.name.clone(), mode: mode.label(), metrics, expectations }
    }

    /// Report for a Monte Carlo twin, with one expectation per oracle check.
    pub fn from_oracle(name: &str, metrics: MetricSet, checks: &[OracleCheck]) -> Self {
        let expectations = checks
            .iter()
            .map(|c| ExpectationResult {
                metric: c.metric.clone(),
                expected: c.exact,
                tolerance: c.allowance,
                observed: Some(c.estimate),
                pass: c.pass,
            })
            .collect();
        ScenarioReport { scenario: name.to_string(), mode: Mode::MonteCarlo { n_rounds: 0, n_repeats: 0 }.label(), metrics, expectations }
    }

    pub fn passed(&self) -> bool {
        self.expectations.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExpectationResult> {
        self.expectations.iter().filter(|e| !e.pass)
    }
}

pub fn to_json(reports: &[ScenarioReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

pub const CSV_COLUMNS: [&str; 10] =
    ["scenario", "mode", "metric", "value", "stderr", "exact", "n", "expected", "tolerance", "pass"];

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per (scenario, metric). Expectation columns are filled from the
/// first expectation on that metric; expectations on metrics the run did
/// not produce get a row with empty value columns.
pub fn to_csv(reports: &[ScenarioReport]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in reports {
        let mut rows: Vec<(String, Option<&MetricValue>)> =
            r.metrics.iter().map(|(n, v)| (n.to_string(), Some(v))).collect();
        for e in &r.expectations {
            if !rows.iter().any(|(n, _)| n == &e.metric) {
                rows.push((e.metric.clone(), None));
            }
        }
        for (metric, value) in rows {
            let exp = r.expectations.iter().find(|e| e.metric == metric);
            let (v, se, exact, n) = match value {
                Some(MetricValue::Exact(q)) => (value.unwrap().value().to_string(), String::new(), q.to_string(), String::new()),
                Some(MetricValue::Real(x)) => (x.to_string(), String::new(), String::new(), String::new()),
                Some(MetricValue::Estimate { value, stderr, n }) => {
                    (value.to_string(), stderr.to_string(), String::new(), n.to_string())
                }
                None => Default::default(),
            };
            let fields = [
                csv_field(&r.scenario),
                r.mode.to_string(),
                csv_field(&metric),
                v,
                se,
                exact,
                n,
                exp.map(|e| e.expected.to_string()).unwrap_or_default(),
                exp.map(|e| e.tolerance.to_string()).unwrap_or_default(),
                exp.map(|e| e.pass.to_string()).unwrap_or_default(),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}
