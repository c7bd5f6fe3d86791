//! Metric values produced by exact enumeration and by Monte Carlo runs.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

pub const SIFT_FRACTION: &str = "sift_fraction";
pub const QBER: &str = "qber";
pub const EVE_CONCLUSIVE_FRACTION: &str = "eve_conclusive_fraction";
pub const EVE_MUTUAL_INFORMATION: &str = "eve_mutual_information";
pub const DOUBLE_CLICK_RATE: &str = "double_click_rate";
pub const NO_CLICK_RATE: &str = "no_click_rate";
pub const FINAL_KEY_RATE_PER_ROUND: &str = "final_key_rate_per_round";
pub const KEY_ONES_FRACTION: &str = "key_ones_fraction";
pub const EVE_SUPPRESSION_RATE: &str = "eve_suppression_rate";
pub const EVE_GUESS_ACCURACY: &str = "eve_guess_accuracy";
/// Among clicked rounds, the fraction whose (squashed) outcome is 1.
pub const CLICK_ONES_FRACTION: &str = "click_ones_fraction";
pub const EVE_CONCLUSIVE_IN_ALICE_BASIS: &str = "eve_conclusive_given_alice_basis";
pub const EVE_CONCLUSIVE_IN_BOB_BASIS: &str = "eve_conclusive_given_bob_basis";

/// Metrics every run reports, in report order.
pub const STANDARD_METRICS: [&str; 7] = [
    SIFT_FRACTION,
    QBER,
    EVE_CONCLUSIVE_FRACTION,
    EVE_MUTUAL_INFORMATION,
    DOUBLE_CLICK_RATE,
    NO_CLICK_RATE,
    FINAL_KEY_RATE_PER_ROUND,
];

#[derive(Debug, Clone, PartialEq)]
pub enum MetricValue {
    /// Exact rational from enumeration.
    Exact(BigRational),
    /// Computed from exact probabilities but not itself rational.
    Real(f64),
    /// Monte Carlo estimate from `n` trials.
    Estimate { value: f64, stderr: f64, n: u64 },
}

impl MetricValue {
    pub fn value(&self) -> f64 {
        match self {
            MetricValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            MetricValue::Real(v) => *v,
            MetricValue::Estimate { value, .. } => *value,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            MetricValue::Exact(q) => Some(q),
            _ => None,
        }
    }

    pub fn stderr(&self) -> Option<f64> {
        match self {
            MetricValue::Estimate { stderr, .. } => Some(*stderr),
            _ => None,
        }
    }

    /// Binomial proportion with its standard error.
    pub fn proportion(hits: u64, trials: u64) -> Option<MetricValue> {
        (trials > 0).then(|| {
            let p = hits as f64 / trials as f64;
            MetricValue::Estimate { value: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), n: trials }
        })
    }
}

impl Serialize for MetricValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(3))?;
        map.serialize_entry("value", &self.value())?;
        match self {
            MetricValue::Exact(q) => map.serialize_entry("exact", &q.to_string())?,
            MetricValue::Real(_) => map.serialize_entry("exact", &Option::<String>::None)?,
            MetricValue::Estimate { stderr, n, .. } => {
                map.serialize_entry("stderr", stderr)?;
                map.serialize_entry("n", n)?;
            }
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricSet {
    entries: Vec<(String, MetricValue)>,
}

impl MetricSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, value: MetricValue) {
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((name.to_string(), value)),
        }
    }

    pub fn insert_opt(&mut self, name: &str, value: Option<MetricValue>) {
        if let Some(v) = value {
            self.insert(name, v);
        }
    }

    pub fn get(&self, name: &str) -> Option<&MetricValue> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(MetricValue::value)
    }

    /// Standard metrics first in their fixed order, then extras in
    /// insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &MetricValue)> {
        let standard = STANDARD_METRICS.iter().filter_map(|&n| self.get(n).map(|v| (n, v)));
        let extras = self
            .entries
            .iter()
            .filter(|(n, _)| !STANDARD_METRICS.contains(&n.as_str()))
            .map(|(n, v)| (n.as_str(), v));
        standard.chain(extras)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Serialize for MetricSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.len()))?;
        for (name, value) in self.iter() {
            map.serialize_entry(name, value)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn ordering_and_serialization() {
        let mut m = MetricSet::new();
        m.insert("extra", MetricValue::Real(0.5));
        m.insert(QBER, MetricValue::Exact(BigRational::new(BigInt::from(1), BigInt::from(3))));
        m.insert(SIFT_FRACTION, MetricValue::proportion(1, 4).unwrap());
        let names: Vec<&str> = m.iter().map(|(n, _)| n).collect();
        assert_eq!(names, [SIFT_FRACTION, QBER, "extra"]);
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json[QBER]["exact"], "1/3");
        assert_eq!(json[SIFT_FRACTION]["stderr"], (0.25f64 * 0.75 / 4.0).sqrt());
        assert!(json["extra"]["exact"].is_null());
        assert!(MetricValue::proportion(0, 0).is_none());
    }
}
