use basiskey::adversary::AttackStrategy;
use basiskey::harness::metrics::{QBER, SIFT_FRACTION};
use basiskey::harness::{run_monte_carlo, Mode, Scenario};
use basiskey::protocol::{ProtocolKind, SessionConfig};

fn intercept_resend() -> Scenario {
    Scenario {
        name: "ir".into(),
        session: SessionConfig::ideal(ProtocolKind::BasisKey, 1, 99).with_attack(AttackStrategy::InterceptResend),
        mode: Mode::MonteCarlo { n_rounds: 50_000, n_repeats: 2 },
        f_ec: 1.0,
        expected: vec![],
    }
}

#[test]
fn fixed_seed_gives_identical_metrics() {
    let s = intercept_resend();
    let a = run_monte_carlo(&s, 50_000, 2).unwrap();
    let b = run_monte_carlo(&s, 50_000, 2).unwrap();
    assert_eq!(a, b);
    let mut other = s.clone();
    other.session.rng_seed += 1;
    assert_ne!(a.0, run_monte_carlo(&other, 50_000, 2).unwrap().0);
}

#[test]
fn doubling_rounds_shrinks_standard_errors_by_root_two() {
    let s = intercept_resend();
    let (_, small) = run_monte_carlo(&s, 100_000, 1).unwrap();
    let (_, large) = run_monte_carlo(&s, 200_000, 1).unwrap();
    for name in [SIFT_FRACTION, QBER] {
        let ratio = large.get(name).unwrap().stderr().unwrap() / small.get(name).unwrap().stderr().unwrap();
        assert!((ratio * 2f64.sqrt() - 1.0).abs() < 0.2, "{name}: ratio {ratio}");
    }
}

#[test]
fn repeats_pool_like_one_long_run() {
    let s = intercept_resend();
    let (pooled, m) = run_monte_carlo(&s, 40_000, 5).unwrap();
    assert_eq!(pooled.rounds, 200_000);
    let se = m.get(QBER).unwrap().stderr().unwrap();
    assert!((m.value(QBER).unwrap() - 1.0 / 3.0).abs() < 4.0 * se);
}
