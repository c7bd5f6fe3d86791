//! Exact enumeration of one protocol round as a discrete probability tree.
//!
//! This is a second, independent model of the round: it does not call the
//! sampling code in `protocol`, `devices` or `adversary`, but walks every
//! branch (Alice's state, Eve's choices and outcomes, channel events, Bob's
//! basis, click patterns, Eve's delayed measurement) with exact rational
//! weights. Monte Carlo runs are checked against it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::metrics::*;
use super::Scenario;
use crate::adversary::{mutual_information, AttackStrategy, EfficiencyPolicy, PnsMeasurement};
use crate::devices::{DoubleClickPolicy, SourceModel};
use crate::error::{QkdError, Result};
use crate::postproc::binary_entropy;
use crate::protocol::ProtocolKind;
use crate::qcore::{Basis, Bit, QubitSymbol};

type Q = BigRational;

fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn half() -> Q {
    ratio(1, 2)
}

fn pow(base: &Q, exp: u32) -> Q {
    (0..exp).fold(Q::one(), |acc, _| acc * base)
}

/// Exact rational for a configured probability, read from its shortest
/// decimal representation so that `0.2` becomes `1/5`.
pub fn exact_decimal(x: f64) -> Result<Q> {
    if !x.is_finite() {
        return Err(QkdError::NotEnumerable(format!("non-finite parameter {x}")));
    }
    parse_decimal(&format!("{x}"))
        .ok_or_else(|| QkdError::NotEnumerable(format!("cannot represent {x} exactly")))
}

/// Parses `a/b`, an integer or a plain decimal into an exact rational.
pub fn parse_decimal(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_decimal(n)?;
        let d = parse_decimal(d)?;
        return (!d.is_zero()).then(|| n / d);
    }
    if let Some((mantissa, exp)) = s.split_once(['e', 'E']) {
        let m = parse_decimal(mantissa)?;
        let e: i32 = exp.parse().ok()?;
        let scale = Q::from_integer(num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize));
        return Some(if e >= 0 { m * scale } else { m / scale });
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let q = Q::new(num, den);
    Some(if neg { -q } else { q })
}

/// (P(outcome 0), P(outcome 1)) for a projective measurement.
fn outcome_dist(state: QubitSymbol, basis: Basis) -> [Q; 2] {
    match state {
        QubitSymbol::Pure { basis: b, bit } if b == basis => {
            if bit == Bit::Zero {
                [Q::one(), Q::zero()]
            } else {
                [Q::zero(), Q::one()]
            }
        }
        _ => [half(), half()],
    }
}

/// Optimal USD rate on `k` copies, rational only for even `k`.
fn usd_exact(k: u32) -> Result<Q> {
    if k.is_multiple_of(2) {
        Ok(Q::one() - pow(&half(), k / 2))
    } else {
        Err(QkdError::NotEnumerable(format!(
            "optimal USD on {k} stored copies has the irrational rate 1 - 2^(-{k}/2)"
        )))
    }
}

fn basis_key(basis: Basis) -> Bit {
    if basis == Basis::Z {
        Bit::Zero
    } else {
        Bit::One
    }
}

fn bob_basis_key(basis: Basis) -> Bit {
    if basis == Basis::X {
        Bit::Zero
    } else {
        Bit::One
    }
}

#[derive(Clone)]
struct Params {
    protocol: ProtocolKind,
    eta: [Q; 2],
    dark: Q,
    policy: DoubleClickPolicy,
    depolarize: Q,
    loss: Q,
}

#[derive(Clone, Default)]
struct EveBranch {
    conclusive: bool,
    guess: Option<Bit>,
    eve_basis: Option<Basis>,
    suppressed: bool,
    delayed: Option<(u32, PnsMeasurement)>,
}

#[derive(Clone)]
struct Transit {
    pulse: Option<(u32, QubitSymbol)>,
    lossless: bool,
    eta: [Q; 2],
    eve: EveBranch,
}

#[derive(Default)]
struct Acc {
    kept: Q,
    errors: Q,
    conclusive: Q,
    correct: Q,
    ones: Q,
    double: Q,
    no_click: Q,
    clicks: Q,
    click_ones: Q,
    suppressed: Q,
    joint: [[Q; 3]; 2],
    alice_basis: (Q, Q),
    bob_basis: (Q, Q),
}

/// Exact metrics for an enumerable scenario.
pub fn enumerate_exact(scenario: &Scenario) -> Result<MetricSet> {
    let cfg = &scenario.session;
    cfg.validate()?;
    let n_photons = match cfg.source {
        SourceModel::SinglePhoton => 1,
        SourceModel::Fock { n } => n,
        SourceModel::WeakCoherent { mu: 0.0 } => 0,
        SourceModel::WeakCoherent { mu } => {
            return Err(QkdError::NotEnumerable(format!(
                "source.mu = {mu}: Poisson photon number has unbounded support"
            )))
        }
    };
    let params = Params {
        protocol: cfg.protocol,
        eta: [exact_decimal(cfg.detectors.eta0)?, exact_decimal(cfg.detectors.eta1)?],
        dark: exact_decimal(cfg.detectors.dark_prob)?,
        policy: cfg.detectors.double_click_policy,
        depolarize: exact_decimal(cfg.channel_depolarize_p)?,
        loss: exact_decimal(cfg.channel_loss_p)?,
    };

    let mut acc = Acc::default();
    for a_basis in Basis::ALL {
        for a_bit in Bit::ALL {
            let w = ratio(1, 4);
            let state = QubitSymbol::pure(a_basis, a_bit);
            for (transit, wt) in attack_branches(&params, &cfg.attack, n_photons, state)? {
                let w = &w * wt;
                for (arriving, wc) in channel_branches(&params, &transit) {
                    let w = &w * wc;
                    for bob_basis in Basis::ALL {
                        let w = &w * half();
                        for (click, double, wd) in detection_branches(&params, &transit.eta, arriving, bob_basis) {
                            let w = &w * wd;
                            if w.is_zero() {
                                continue;
                            }
                            let leaf = Leaf { a_basis, a_bit, bob_basis, click, double };
                            accumulate(&params, &mut acc, &leaf, &transit.eve, state, w)?;
                        }
                    }
                }
            }
        }
    }
    Ok(metrics_from(acc, scenario))
}

fn attack_branches(
    params: &Params,
    attack: &AttackStrategy,
    n: u32,
    state: QubitSymbol,
) -> Result<Vec<(Transit, Q)>> {
    let plain = Transit {
        pulse: (n > 0).then_some((n, state)),
        lossless: false,
        eta: params.eta.clone(),
        eve: EveBranch::default(),
    };
    let QubitSymbol::Pure { basis: a_basis, bit: a_bit } = state else { unreachable!() };
    Ok(match *attack {
        AttackStrategy::None => vec![(plain, Q::one())],
        AttackStrategy::InterceptResend if n == 0 => vec![(plain, Q::one())],
        AttackStrategy::InterceptResend => {
            let mut out = Vec::new();
            for m in Basis::ALL {
                for (o, p) in Bit::ALL.into_iter().zip(outcome_dist(state, m)) {
                    let guess = match params.protocol {
                        ProtocolKind::BasisKey => basis_key(m),
                        ProtocolKind::Bb84 => o,
                    };
                    let t = Transit {
                        pulse: Some((1, QubitSymbol::pure(m, o))),
                        eve: EveBranch { conclusive: true, guess: Some(guess), eve_basis: Some(m), ..Default::default() },
                        ..plain.clone()
                    };
                    out.push((t, half() * p));
                }
            }
            out
        }
        AttackStrategy::EfficiencyControl { policy } => match policy {
            EfficiencyPolicy::Fixed { eta0, eta1 } => {
                let guess = if eta0 > eta1 {
                    Some(Bit::Zero)
                } else if eta1 > eta0 {
                    Some(Bit::One)
                } else {
                    None
                };
                let t = Transit {
                    eta: [exact_decimal(eta0)?, exact_decimal(eta1)?],
                    eve: EveBranch { conclusive: guess.is_some(), guess, ..Default::default() },
                    ..plain
                };
                vec![(t, Q::one())]
            }
            other => {
                return Err(QkdError::NotEnumerable(format!(
                    "efficiency policy {other:?} depends on the round index or history"
                )))
            }
        },
        AttackStrategy::Pns { measurement } => {
            if n >= 2 {
                let t = Transit {
                    pulse: Some((1, state)),
                    eve: EveBranch { delayed: Some((n - 1, measurement)), ..Default::default() },
                    ..plain
                };
                vec![(t, Q::one())]
            } else {
                vec![(plain, Q::one())]
            }
        }
        AttackStrategy::UsdFilter { block_inconclusive, split_two_photon } => {
            if n >= 3 {
                let p = usd_exact(n - 1)?;
                let guess = match params.protocol {
                    ProtocolKind::BasisKey => basis_key(a_basis),
                    ProtocolKind::Bb84 => a_bit,
                };
                let hit = Transit {
                    pulse: Some((1, state)),
                    lossless: true,
                    eve: EveBranch { conclusive: true, guess: Some(guess), ..Default::default() },
                    ..plain.clone()
                };
                let miss = if block_inconclusive {
                    Transit {
                        pulse: None,
                        eve: EveBranch { suppressed: true, ..Default::default() },
                        ..plain
                    }
                } else {
                    Transit { pulse: Some((1, state)), ..plain }
                };
                vec![(hit, p.clone()), (miss, Q::one() - p)]
            } else if n == 2 && split_two_photon {
                let t = Transit {
                    pulse: Some((1, state)),
                    eve: EveBranch { delayed: Some((1, PnsMeasurement::RandomBasis)), ..Default::default() },
                    ..plain
                };
                vec![(t, Q::one())]
            } else {
                vec![(plain, Q::one())]
            }
        }
    })
}

fn binomial(n: u32, k: u32) -> Q {
    let mut c = Q::one();
    for i in 0..k {
        c = c * int((n - i) as i64) / int((i + 1) as i64);
    }
    c
}

/// Photon count and symbol reaching Bob.
fn channel_branches(params: &Params, transit: &Transit) -> Vec<(Option<(u32, QubitSymbol)>, Q)> {
    let Some((n, state)) = transit.pulse else {
        return vec![(None, Q::one())];
    };
    if transit.lossless {
        return vec![(Some((n, state)), Q::one())];
    }
    let states = if state.is_pure() {
        vec![(QubitSymbol::MaximallyMixed, params.depolarize.clone()), (state, Q::one() - &params.depolarize)]
    } else {
        vec![(state, Q::one())]
    };
    let keep = Q::one() - &params.loss;
    let mut out = Vec::new();
    for (s, ps) in states {
        for k in 0..=n {
            let p = binomial(n, k) * pow(&keep, k) * pow(&params.loss, n - k) * &ps;
            out.push(((k > 0).then_some((k, s)), p));
        }
    }
    out
}

/// (click bit after squashing, double-click flag, probability).
fn detection_branches(
    params: &Params,
    eta: &[Q; 2],
    arriving: Option<(u32, QubitSymbol)>,
    bob_basis: Basis,
) -> Vec<(Option<Bit>, bool, Q)> {
    // per-photon probabilities of registering in detector 0, 1, or neither
    let (n, p_hit) = match arriving {
        Some((n, s)) => {
            let d = outcome_dist(s, bob_basis);
            (n, [&d[0] * &eta[0], &d[1] * &eta[1]])
        }
        None => (0, [Q::zero(), Q::zero()]),
    };
    let p_none = Q::one() - &p_hit[0] - &p_hit[1];
    let none = pow(&p_none, n);
    let only0 = pow(&(&p_none + &p_hit[0]), n) - &none;
    let only1 = pow(&(&p_none + &p_hit[1]), n) - &none;
    let both = Q::one() - &none - &only0 - &only1;
    let hits = [([false, false], none), ([true, false], only0), ([false, true], only1), ([true, true], both)];

    let dark = [(true, params.dark.clone()), (false, Q::one() - &params.dark)];
    let mut out = Vec::new();
    for (hit, ph) in hits.iter() {
        for (d0, p0) in &dark {
            for (d1, p1) in &dark {
                let p = ph * p0 * p1;
                let fired = [hit[0] || *d0, hit[1] || *d1];
                match fired {
                    [false, false] => out.push((None, false, p)),
                    [true, false] => out.push((Some(Bit::Zero), false, p)),
                    [false, true] => out.push((Some(Bit::One), false, p)),
                    [true, true] => match params.policy {
                        DoubleClickPolicy::RandomAssign => {
                            out.push((Some(Bit::Zero), true, &p * half()));
                            out.push((Some(Bit::One), true, p * half()));
                        }
                        DoubleClickPolicy::Discard => out.push((None, true, p)),
                    },
                }
            }
        }
    }
    out
}

struct Leaf {
    a_basis: Basis,
    a_bit: Bit,
    bob_basis: Basis,
    click: Option<Bit>,
    double: bool,
}

fn accumulate(params: &Params, acc: &mut Acc, leaf: &Leaf, eve: &EveBranch, state: QubitSymbol, w: Q) -> Result<()> {
    if leaf.double {
        acc.double += &w;
    }
    if eve.suppressed {
        acc.suppressed += &w;
    }
    let Some(outcome) = leaf.click else {
        acc.no_click += &w;
        return Ok(());
    };
    acc.clicks += &w;
    if outcome == Bit::One {
        acc.click_ones += &w;
    }
    let (kept, a_key, b_key) = match params.protocol {
        ProtocolKind::BasisKey => {
            (outcome != leaf.a_bit, basis_key(leaf.a_basis), bob_basis_key(leaf.bob_basis))
        }
        ProtocolKind::Bb84 => (leaf.a_basis == leaf.bob_basis, leaf.a_bit, outcome),
    };
    if !kept {
        return Ok(());
    }
    for (e, we) in delayed_branches(params, eve, state, outcome, leaf.bob_basis)? {
        let w = &w * we;
        acc.kept += &w;
        if a_key != b_key {
            acc.errors += &w;
        }
        if b_key == Bit::One {
            acc.ones += &w;
        }
        let col = match (e.conclusive, e.guess) {
            (true, Some(g)) => {
                acc.conclusive += &w;
                if g == a_key {
                    acc.correct += &w;
                }
                g.as_u8() as usize
            }
            _ => 2,
        };
        acc.joint[a_key.as_u8() as usize][col] += &w;
        if let Some(m) = e.eve_basis {
            let hit = if e.conclusive { w.clone() } else { Q::zero() };
            if m == leaf.a_basis {
                acc.alice_basis.0 += &w;
                acc.alice_basis.1 += &hit;
            }
            if m == leaf.bob_basis {
                acc.bob_basis.0 += &w;
                acc.bob_basis.1 += &hit;
            }
        }
    }
    Ok(())
}

/// Eve's delayed measurement on kept rounds, as branches over her basis
/// choice and the conclusive/inconclusive verdict.
fn delayed_branches(
    params: &Params,
    eve: &EveBranch,
    state: QubitSymbol,
    announced: Bit,
    bob_basis: Basis,
) -> Result<Vec<(EveBranch, Q)>> {
    let Some((stored, measurement)) = eve.delayed else {
        return Ok(vec![(eve.clone(), Q::one())]);
    };
    let QubitSymbol::Pure { basis: a_basis, .. } = state else { unreachable!() };
    let base = EveBranch { delayed: None, ..eve.clone() };
    let mut out = Vec::new();
    if params.protocol == ProtocolKind::Bb84 {
        // the announced basis equals Alice's on kept rounds
        for (bit, p) in Bit::ALL.into_iter().zip(outcome_dist(state, bob_basis)) {
            let e = EveBranch { conclusive: true, guess: Some(bit), eve_basis: Some(bob_basis), ..base.clone() };
            out.push((e, p));
        }
        return Ok(out);
    }
    let bases: Vec<(Basis, Q)> = match measurement {
        PnsMeasurement::RandomBasis => Basis::ALL.into_iter().map(|m| (m, half())).collect(),
        PnsMeasurement::ConditionedBasis => {
            vec![(if announced == Bit::Zero { Basis::Z } else { Basis::X }, Q::one())]
        }
        PnsMeasurement::OptimalUsd => {
            let p = usd_exact(stored)?;
            let hit = EveBranch { conclusive: true, guess: Some(basis_key(a_basis)), ..base.clone() };
            let miss = EveBranch { conclusive: false, guess: None, ..base };
            return Ok(vec![(hit, p.clone()), (miss, Q::one() - p)]);
        }
    };
    for (m, pm) in bases {
        // every copy reading !announced is consistent with Alice using m
        let consistent = pow(&outcome_dist(state, m)[announced.flip().as_u8() as usize], stored);
        let hit = EveBranch { conclusive: true, guess: Some(basis_key(m.conjugate())), eve_basis: Some(m), ..base.clone() };
        let miss = EveBranch { conclusive: false, guess: None, eve_basis: Some(m), ..base.clone() };
        out.push((hit, &pm * (Q::one() - &consistent)));
        out.push((miss, pm * consistent));
    }
    Ok(out)
}

fn metrics_from(acc: Acc, scenario: &Scenario) -> MetricSet {
    let mut m = MetricSet::new();
    let exact = |q: Q| MetricValue::Exact(q);
    let cond = |num: &Q, den: &Q| (!den.is_zero()).then(|| MetricValue::Exact(num / den));

    m.insert(SIFT_FRACTION, exact(acc.kept.clone()));
    m.insert_opt(QBER, cond(&acc.errors, &acc.kept));
    m.insert_opt(EVE_CONCLUSIVE_FRACTION, cond(&acc.conclusive, &acc.kept));
    let joint: [[f64; 3]; 2] =
        std::array::from_fn(|i| std::array::from_fn(|j| acc.joint[i][j].to_f64().unwrap_or(0.0)));
    m.insert(EVE_MUTUAL_INFORMATION, MetricValue::Real(mutual_information(&joint)));
    m.insert(DOUBLE_CLICK_RATE, exact(acc.double.clone()));
    m.insert(NO_CLICK_RATE, exact(acc.no_click.clone()));
    let sift = acc.kept.to_f64().unwrap_or(0.0);
    let qber = if acc.kept.is_zero() { 0.0 } else { (&acc.errors / &acc.kept).to_f64().unwrap_or(0.0) };
    m.insert(FINAL_KEY_RATE_PER_ROUND, MetricValue::Real(asymptotic_key_rate(sift, qber, scenario.f_ec)));
    m.insert_opt(KEY_ONES_FRACTION, cond(&acc.ones, &acc.kept));
    m.insert(EVE_SUPPRESSION_RATE, exact(acc.suppressed.clone()));
    m.insert_opt(CLICK_ONES_FRACTION, cond(&acc.click_ones, &acc.clicks));
    m.insert_opt(EVE_GUESS_ACCURACY, cond(&acc.correct, &acc.conclusive));
    if reports_basis_conditionals(&scenario.session.attack) {
        m.insert_opt(EVE_CONCLUSIVE_IN_ALICE_BASIS, cond(&acc.alice_basis.1, &acc.alice_basis.0));
        m.insert_opt(EVE_CONCLUSIVE_IN_BOB_BASIS, cond(&acc.bob_basis.1, &acc.bob_basis.0));
    }
    m
}

/// Attacks whose delayed measurement has a basis worth conditioning on.
pub(crate) fn reports_basis_conditionals(attack: &AttackStrategy) -> bool {
    matches!(
        attack,
        AttackStrategy::Pns { measurement: PnsMeasurement::RandomBasis | PnsMeasurement::ConditionedBasis }
            | AttackStrategy::UsdFilter { split_two_photon: true, .. }
    )
}

/// Sifted rounds per sent round times `1 - H2(e_p) - f_ec H2(e_b)` with the
/// placeholder `e_p = e_b`, clamped at zero.
pub fn asymptotic_key_rate(sift: f64, qber: f64, f_ec: f64) -> f64 {
    if qber > 0.5 {
        return 0.0;
    }
    let h = binary_entropy(qber).unwrap_or(1.0);
    sift * (1.0 - (1.0 + f_ec) * h).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_decimal("0.2"), Some(ratio(1, 5)));
        assert_eq!(parse_decimal("1/3"), Some(ratio(1, 3)));
        assert_eq!(parse_decimal("3"), Some(int(3)));
        assert_eq!(parse_decimal(".5"), Some(half()));
        assert_eq!(parse_decimal("-0.25"), Some(ratio(-1, 4)));
        assert_eq!(parse_decimal("1/0"), None);
        assert_eq!(parse_decimal("2.5e-3"), Some(ratio(1, 400)));
        assert_eq!(parse_decimal("1E2"), Some(int(100)));
        assert_eq!(parse_decimal("abc"), None);
        assert_eq!(exact_decimal(0.1).unwrap(), ratio(1, 10));
    }

    #[test]
    fn detection_distribution_sums_to_one() {
        let params = Params {
            protocol: ProtocolKind::BasisKey,
            eta: [ratio(9, 10), ratio(1, 5)],
            dark: ratio(1, 100),
            policy: DoubleClickPolicy::RandomAssign,
            depolarize: Q::zero(),
            loss: Q::zero(),
        };
        for n in 0..4 {
            let arriving = (n > 0).then_some((n, QubitSymbol::pure(Basis::Z, Bit::One)));
            for b in Basis::ALL {
                let total: Q = detection_branches(&params, &params.eta, arriving, b).into_iter().map(|(_, _, p)| p).sum();
                assert_eq!(total, Q::one());
            }
        }
    }

    #[test]
    fn click_statistics_ignore_bobs_basis_for_unpolarized_input() {
        let params = Params {
            protocol: ProtocolKind::BasisKey,
            eta: [ratio(7, 10), ratio(3, 10)],
            dark: ratio(1, 20),
            policy: DoubleClickPolicy::RandomAssign,
            depolarize: Q::zero(),
            loss: Q::zero(),
        };
        for arriving in [None, Some((1, QubitSymbol::MaximallyMixed)), Some((3, QubitSymbol::MaximallyMixed))] {
            let x = detection_branches(&params, &params.eta, arriving, Basis::X);
            let z = detection_branches(&params, &params.eta, arriving, Basis::Z);
            assert_eq!(x, z);
        }
    }

    #[test]
    fn usd_rates() {
        assert_eq!(usd_exact(2).unwrap(), half());
        assert_eq!(usd_exact(4).unwrap(), ratio(3, 4));
        assert!(usd_exact(1).is_err());
    }
}
