//! Line-oriented `key = value` scenario files.
//!
//! ```text
//! # intercept-resend against the basis-keyed protocol
//! name = basiskey-intercept-resend
//! protocol = basis-key
//! mode = enumerate
//! attack = intercept-resend
//! expect qber = 1/3 +- 0
//! ```
//!
//! Recognised keys: `name`, `protocol` (`basis-key`, `bb84`), `mode`
//! (`enumerate`, `monte-carlo`), `rounds`, `repeats`, `seed`, `source`
//! (`single-photon`, `weak-coherent <mu>`, `fock <n>`), `eta0`, `eta1`,
//! `dark`, `double-click` (`random-assign`, `discard`), `depolarize`, `loss`,
//! `attack`, `f-ec`. Attacks are `none`, `intercept-resend`,
//! `efficiency fixed <eta0> <eta1>`, `efficiency alternating`,
//! `efficiency mirror`, `pns random-basis|conditioned-basis|optimal-usd` and
//! `usd-filter block|pass [split2]`. Numbers may be decimals or `p/q`.

use std::collections::HashSet;

use num_traits::ToPrimitive;

use super::exact::parse_decimal;
use super::{Expectation, Mode, Scenario};
use crate::adversary::{AttackStrategy, EfficiencyPolicy, PnsMeasurement};
use crate::devices::{DoubleClickPolicy, SourceModel};
use crate::error::{QkdError, Result};
use crate::protocol::{ProtocolKind, SessionConfig};

fn err(line: usize, message: impl Into<String>) -> QkdError {
    QkdError::Config { line, message: message.into() }
}

fn number(line: usize, key: &str, text: &str) -> Result<f64> {
    parse_decimal(text)
        .and_then(|q| q.to_f64())
        .ok_or_else(|| err(line, format!("{key}: expected a number, got `{text}`")))
}

fn probability(line: usize, key: &str, text: &str) -> Result<f64> {
    let p = number(line, key, text)?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(err(line, format!("{key} must lie in [0, 1], got {text}")))
    }
}

fn integer<T: std::str::FromStr>(line: usize, key: &str, text: &str) -> Result<T> {
    text.parse().map_err(|_| err(line, format!("{key}: expected a non-negative integer, got `{text}`")))
}

fn parse_source(line: usize, text: &str) -> Result<SourceModel> {
    let words: Vec<&str> = text.split_whitespace().collect();
    match words.as_slice() {
        ["single-photon"] => Ok(SourceModel::SinglePhoton),
        ["weak-coherent", mu] => {
            let mu = number(line, "source mu", mu)?;
            if mu < 0.0 {
                return Err(err(line, format!("source mu must be >= 0, got {mu}")));
            }
            Ok(SourceModel::WeakCoherent { mu })
        }
        ["fock", n] => Ok(SourceModel::Fock { n: integer(line, "source photon number", n)? }),
        _ => Err(err(line, format!("unknown source `{text}`"))),
    }
}

fn parse_attack(line: usize, text: &str) -> Result<AttackStrategy> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let pns = |measurement| Ok(AttackStrategy::Pns { measurement });
    match words.as_slice() {
        ["none"] => Ok(AttackStrategy::None),
        ["intercept-resend"] => Ok(AttackStrategy::InterceptResend),
        ["efficiency", "fixed", e0, e1] => Ok(AttackStrategy::EfficiencyControl {
            policy: EfficiencyPolicy::Fixed {
                eta0: probability(line, "attack eta0", e0)?,
                eta1: probability(line, "attack eta1", e1)?,
            },
        }),
        ["efficiency", "alternating"] => {
            Ok(AttackStrategy::EfficiencyControl { policy: EfficiencyPolicy::Alternating })
        }
        ["efficiency", "mirror"] => {
            Ok(AttackStrategy::EfficiencyControl { policy: EfficiencyPolicy::MirrorLastAnnouncement })
        }
        ["pns", "random-basis"] => pns(PnsMeasurement::RandomBasis),
        ["pns", "conditioned-basis"] => pns(PnsMeasurement::ConditionedBasis),
        ["pns", "optimal-usd"] => pns(PnsMeasurement::OptimalUsd),
        ["usd-filter", rest @ ..] if !rest.is_empty() && rest.len() <= 2 => {
            let block_inconclusive = match rest[0] {
                "block" => true,
                "pass" => false,
                other => return Err(err(line, format!("usd-filter: expected block or pass, got `{other}`"))),
            };
            let split_two_photon = match rest.get(1) {
                None => false,
                Some(&"split2") => true,
                Some(other) => return Err(err(line, format!("usd-filter: unexpected `{other}`"))),
            };
            Ok(AttackStrategy::UsdFilter { block_inconclusive, split_two_photon })
        }
        _ => Err(err(line, format!("unknown attack `{text}`"))),
    }
}

fn parse_expectation(line: usize, text: &str) -> Result<Expectation> {
    let (metric, rest) = text
        .split_once('=')
        .ok_or_else(|| err(line, "expect: use `expect <metric> = <value> +- <tolerance>`"))?;
    let metric = metric.trim();
    if metric.is_empty() || metric.contains(char::is_whitespace) {
        return Err(err(line, format!("expect: bad metric name `{metric}`")));
    }
    let (value, tol) = rest
        .split_once("+-")
        .ok_or_else(|| err(line, "expect: missing `+- <tolerance>`"))?;
    let exact = parse_decimal(value)
        .ok_or_else(|| err(line, format!("expect: bad value `{}`", value.trim())))?;
    let tolerance = number(line, "expect tolerance", tol.trim())?;
    if tolerance < 0.0 {
        return Err(err(line, "expect: tolerance must be >= 0"));
    }
    Ok(Expectation { tolerance, ..Expectation::new(metric, exact, 0.0) })
}

/// Parses a scenario file. Every diagnostic carries the 1-based line it
/// refers to; problems with the file as a whole point at line 0.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut session = SessionConfig::ideal(ProtocolKind::BasisKey, 1, 0);
    let mut name = None;
    let mut protocol = None;
    let mut mode_name = "enumerate".to_string();
    let mut mode_line = 0;
    let mut rounds: Option<u64> = None;
    let mut repeats: u32 = 1;
    let mut f_ec = 1.0;
    let mut expected = Vec::new();
    let mut seen = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("expect ") {
            expected.push(parse_expectation(line, rest)?);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(err(line, format!("{key}: missing value")));
        }
        if !seen.insert(key.to_string()) {
            return Err(err(line, format!("duplicate key `{key}`")));
        }
        match key {
            "name" => name = Some(value.to_string()),
            "protocol" => {
                protocol = Some(match value {
                    "basis-key" => ProtocolKind::BasisKey,
                    "bb84" => ProtocolKind::Bb84,
                    _ => return Err(err(line, format!("unknown protocol `{value}`"))),
                })
            }
            "mode" => {
                if value != "enumerate" && value != "monte-carlo" {
                    return Err(err(line, format!("unknown mode `{value}`")));
                }
                mode_name = value.to_string();
                mode_line = line;
            }
            "rounds" => {
                let n: u64 = integer(line, key, value)?;
                if n == 0 {
                    return Err(err(line, "rounds must be positive"));
                }
                rounds = Some(n);
            }
            "repeats" => {
                repeats = integer(line, key, value)?;
                if repeats == 0 {
                    return Err(err(line, "repeats must be positive"));
                }
            }
            "seed" => session.rng_seed = integer(line, key, value)?,
            "source" => session.source = parse_source(line, value)?,
            "eta0" => session.detectors.eta0 = probability(line, key, value)?,
            "eta1" => session.detectors.eta1 = probability(line, key, value)?,
            "dark" => session.detectors.dark_prob = probability(line, key, value)?,
            "double-click" => {
                session.detectors.double_click_policy = match value {
                    "random-assign" => DoubleClickPolicy::RandomAssign,
                    "discard" => DoubleClickPolicy::Discard,
                    _ => return Err(err(line, format!("unknown double-click policy `{value}`"))),
                }
            }
            "depolarize" => session.channel_depolarize_p = probability(line, key, value)?,
            "loss" => session.channel_loss_p = probability(line, key, value)?,
            "attack" => session.attack = parse_attack(line, value)?,
            "f-ec" => {
                f_ec = number(line, key, value)?;
                if f_ec < 1.0 {
                    return Err(err(line, format!("f-ec must be >= 1, got {value}")));
                }
            }
            _ => return Err(err(line, format!("unknown key `{key}`"))),
        }
    }

    let name = name.ok_or_else(|| err(0, "missing required key `name`"))?;
    session.protocol = protocol.ok_or_else(|| err(0, "missing required key `protocol`"))?;
    let mode = if mode_name == "enumerate" {
        Mode::Enumerate
    } else {
        let n_rounds = rounds.ok_or_else(|| err(mode_line, "monte-carlo mode needs `rounds`"))?;
        session.n_rounds = n_rounds;
        Mode::MonteCarlo { n_rounds, n_repeats: repeats }
    };
    Ok(Scenario { name, session, mode, f_ec, expected })
}
