//! Intercept-resend branch table for one prepared state.

use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::exact::ratio;
use crate::protocol::{alice_key_bit_basiskey, bob_key_bit_basiskey, sift_basiskey};
use crate::qcore::{overlap_magnitude, Basis, Bit, QubitSymbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowResult {
    /// The branch is collapsed; Bob's columns are not expanded.
    Collapsed,
    /// Discarded by sifting.
    Inconclusive,
    /// Bob's key bit on a kept round.
    Key(Bit),
}

impl fmt::Display for RowResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowResult::Collapsed => f.write_str("-"),
            RowResult::Inconclusive => f.write_str("inconclusive"),
            RowResult::Key(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disturbance {
    None,
    Error,
}

impl fmt::Display for Disturbance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Disturbance::None => "none",
            Disturbance::Error => "error!",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub eve_basis: Basis,
    pub resend: QubitSymbol,
    pub bob_basis: Option<Basis>,
    pub outcome: Option<QubitSymbol>,
    pub result: RowResult,
    pub disturbance: Disturbance,
    /// `None` on the collapsed row.
    pub kept: Option<bool>,
    pub probability: BigRational,
}

impl Serialize for TableRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let dash = |o: Option<String>| o.unwrap_or_else(|| "-".into());
        let mut s = serializer.serialize_struct("TableRow", 8)?;
        s.serialize_field("eve_basis", &self.eve_basis.to_string())?;
        s.serialize_field("resend", &self.resend.to_string())?;
        s.serialize_field("bob_basis", &dash(self.bob_basis.map(|b| b.to_string())))?;
        s.serialize_field("outcome", &dash(self.outcome.map(|o| o.to_string())))?;
        s.serialize_field("result", &self.result.to_string())?;
        s.serialize_field("disturbance", &self.disturbance.to_string())?;
        s.serialize_field("kept", &self.kept)?;
        s.serialize_field("probability", &self.probability.to_string())?;
        s.end()
    }
}

fn born(state: QubitSymbol, basis: Basis, bit: Bit) -> BigRational {
    // squared overlaps of BB84 states are 0, 1/2 or 1
    let amp = overlap_magnitude(state, QubitSymbol::pure(basis, bit)).unwrap_or(0.0);
    let sq = (amp * amp * 2.0).round() as i64;
    ratio(sq, 2)
}

/// Every branch of intercept-resend on the basis-keyed protocol for one
/// prepared state. The branch where Eve guesses Alice's basis cannot
/// disturb anything and is shown as a single collapsed row.
pub fn intercept_resend_table(alice: QubitSymbol) -> Vec<TableRow> {
    let QubitSymbol::Pure { basis: a_basis, bit: a_bit } = alice else {
        return Vec::new();
    };
    let half = ratio(1, 2);
    let mut rows = vec![TableRow {
        eve_basis: a_basis,
        resend: alice,
        bob_basis: None,
        outcome: None,
        result: RowResult::Collapsed,
        disturbance: Disturbance::None,
        kept: None,
        probability: half.clone(),
    }];
    let eve_basis = a_basis.conjugate();
    for eve_bit in Bit::ALL {
        let resend = QubitSymbol::pure(eve_basis, eve_bit);
        let p_resend = &half * born(alice, eve_basis, eve_bit);
        for bob_basis in [Basis::X, Basis::Z] {
            for outcome in Bit::ALL {
                let p = &p_resend * &half * born(resend, bob_basis, outcome);
                if p.is_zero() {
                    continue;
                }
                let kept = sift_basiskey(a_bit, outcome);
                let bob_key = bob_key_bit_basiskey(bob_basis);
                let (result, disturbance) = if kept {
                    let err = bob_key != alice_key_bit_basiskey(a_basis);
                    (RowResult::Key(bob_key), if err { Disturbance::Error } else { Disturbance::None })
                } else {
                    (RowResult::Inconclusive, Disturbance::None)
                };
                rows.push(TableRow {
                    eve_basis,
                    resend,
                    bob_basis: Some(bob_basis),
                    outcome: Some(QubitSymbol::pure(bob_basis, outcome)),
                    result,
                    disturbance,
                    kept: Some(kept),
                    probability: p,
                });
            }
        }
    }
    rows
}

/// The table for Alice sending |0>_z.
pub fn table1_report() -> Vec<TableRow> {
    intercept_resend_table(QubitSymbol::pure(Basis::Z, Bit::Zero))
}

pub fn render_text(rows: &[TableRow]) -> String {
    let mut out = format!(
        "{:<6}{:<8}{:<6}{:<9}{:<14}{:<13}{}\n",
        "M_Eve", "resend", "M_Bob", "outcome", "result", "disturbance", "probability"
    );
    for r in rows {
        let dash = |o: Option<String>| o.unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<6}{:<8}{:<6}{:<9}{:<14}{:<13}{}\n",
            r.eve_basis.to_string(),
            r.resend.to_string(),
            dash(r.bob_basis.map(|b| b.to_string())),
            dash(r.outcome.map(|o| o.to_string())),
            r.result.to_string(),
            r.disturbance.to_string(),
            r.probability
        ));
    }
    out
}

pub fn render_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("eve_basis,resend,bob_basis,outcome,result,disturbance,kept,probability\n");
    for r in rows {
        let dash = |o: Option<String>| o.unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.eve_basis,
            r.resend,
            dash(r.bob_basis.map(|b| b.to_string())),
            dash(r.outcome.map(|o| o.to_string())),
            r.result,
            r.disturbance,
            r.kept.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
            r.probability
        ));
    }
    out
}

/// Probability-weighted error rate among kept rows, for the rows that were
/// expanded (the collapsed row has no errors).
pub fn expanded_error_rate(rows: &[TableRow]) -> Option<f64> {
    let kept: BigRational = rows.iter().filter(|r| r.kept == Some(true)).map(|r| r.probability.clone()).sum();
    let errors: BigRational =
        rows.iter().filter(|r| r.disturbance == Disturbance::Error).map(|r| r.probability.clone()).sum();
    (!kept.is_zero()).then(|| (errors / kept).to_f64().unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn s(b: Basis, v: Bit) -> QubitSymbol {
        QubitSymbol::pure(b, v)
    }

    #[test]
    fn matches_the_published_rows() {
        use Basis::{X, Z};
        use Bit::{One as B1, Zero as B0};
        let rows = table1_report();
        type Row = (Basis, QubitSymbol, Option<Basis>, Option<QubitSymbol>, String, String);
        let got: Vec<Row> = rows
            .iter()
            .map(|r| (r.eve_basis, r.resend, r.bob_basis, r.outcome, r.result.to_string(), r.disturbance.to_string()))
            .collect();
        let want = vec![
            (Z, s(Z, B0), None, None, "-", "none"),
            (X, s(X, B0), Some(X), Some(s(X, B0)), "inconclusive", "none"),
            (X, s(X, B0), Some(Z), Some(s(Z, B0)), "inconclusive", "none"),
            (X, s(X, B0), Some(Z), Some(s(Z, B1)), "1", "error!"),
            (X, s(X, B1), Some(X), Some(s(X, B1)), "0", "none"),
            (X, s(X, B1), Some(Z), Some(s(Z, B0)), "inconclusive", "none"),
            (X, s(X, B1), Some(Z), Some(s(Z, B1)), "1", "error!"),
        ];
        let want: Vec<_> =
            want.into_iter().map(|(a, b, c, d, e, f)| (a, b, c, d, e.to_string(), f.to_string())).collect();
        assert_eq!(got, want);
        let probs: Vec<BigRational> = rows.iter().map(|r| r.probability.clone()).collect();
        let q = |n, d| ratio(n, d);
        assert_eq!(probs, vec![q(1, 2), q(1, 8), q(1, 16), q(1, 16), q(1, 8), q(1, 16), q(1, 16)]);
    }

    #[test]
    fn every_state_sums_to_one_and_errs_half_the_time_when_expanded() {
        for alice in QubitSymbol::bb84_states() {
            let rows = intercept_resend_table(alice);
            let total: BigRational = rows.iter().map(|r| r.probability.clone()).sum();
            assert_eq!(total, BigRational::one());
            assert_eq!(rows.len(), 7);
            assert_eq!(expanded_error_rate(&rows), Some(0.5));
        }
    }

    #[test]
    fn renderings_have_one_line_per_row() {
        let rows = table1_report();
        assert_eq!(render_text(&rows).lines().count(), 8);
        assert_eq!(render_csv(&rows).lines().count(), 8);
        let json = serde_json::to_value(&rows).unwrap();
        assert_eq!(json[3]["disturbance"], "error!");
        assert_eq!(json[0]["kept"], serde_json::Value::Null);
    }
}
