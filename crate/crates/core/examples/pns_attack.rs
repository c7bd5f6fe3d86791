// Photon-number splitting on two-photon pulses. Eve stores one photon and
// measures it once the announcement tells her which outcome Bob got.

use basiskey::adversary::{AttackStrategy, PnsMeasurement};
use basiskey::devices::SourceModel;
use basiskey::harness::metrics::*;
use basiskey::harness::{enumerate_exact, run_monte_carlo, Mode, Scenario};
use basiskey::protocol::{ProtocolKind, SessionConfig};
use basiskey::qcore::usd_success_prob;

fn scenario(measurement: PnsMeasurement) -> Scenario {
    let mut session = SessionConfig::ideal(ProtocolKind::BasisKey, 1, 11)
        .with_attack(AttackStrategy::Pns { measurement });
    session.source = SourceModel::Fock { n: 2 };
    Scenario { name: format!("{measurement:?}"), session, mode: Mode::Enumerate, f_ec: 1.0, expected: vec![] }
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let m = enumerate_exact(&scenario(PnsMeasurement::RandomBasis))?;
    for name in [EVE_CONCLUSIVE_IN_ALICE_BASIS, EVE_CONCLUSIVE_IN_BOB_BASIS, EVE_CONCLUSIVE_FRACTION] {
        println!("{name:<34} {}", m.get(name).unwrap().exact().unwrap());
    }
    println!("{:<34} {:.4}", EVE_MUTUAL_INFORMATION, m.value(EVE_MUTUAL_INFORMATION).unwrap());

    // one stored copy gives an irrational USD rate, so this one is sampled
    let (_, usd) = run_monte_carlo(&scenario(PnsMeasurement::OptimalUsd), 400_000, 1)?;
    let c = usd.get(EVE_CONCLUSIVE_FRACTION).unwrap();
    println!(
        "optimal USD conclusive {:.4} +- {:.4} (bound {:.4})",
        c.value(),
        c.stderr().unwrap(),
        usd_success_prob(1)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
