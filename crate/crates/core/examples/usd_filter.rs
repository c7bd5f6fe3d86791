// USD filtering of multi-photon pulses. On three-photon pulses Eve blocks
// what she cannot identify and learns everything Bob keeps. With weak
// coherent pulses the blocked fraction is compared to an honest line's loss.

use basiskey::adversary::{loss_covered, AttackStrategy};
use basiskey::devices::SourceModel;
use basiskey::harness::metrics::*;
use basiskey::harness::{enumerate_exact, run_monte_carlo, Mode, Scenario};
use basiskey::protocol::{ProtocolKind, SessionConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let attack = AttackStrategy::UsdFilter { block_inconclusive: true, split_two_photon: false };
    let mut session = SessionConfig::ideal(ProtocolKind::BasisKey, 1, 3).with_attack(attack);
    session.source = SourceModel::Fock { n: 3 };
    let fock = Scenario { name: "fock3".into(), session, mode: Mode::Enumerate, f_ec: 1.0, expected: vec![] };
    let m = enumerate_exact(&fock)?;
    println!("fock 3: blocked {}  eve information {:.3} bit per kept round",
        m.get(EVE_SUPPRESSION_RATE).unwrap().exact().unwrap(),
        m.value(EVE_MUTUAL_INFORMATION).unwrap());

    let loss = 0.5;
    let wcp = Scenario {
        name: "wcp".into(),
        session: SessionConfig {
            source: SourceModel::WeakCoherent { mu: 0.5 },
            channel_loss_p: loss,
            ..fock.session.clone()
        },
        ..fock
    };
    let (_, m) = run_monte_carlo(&wcp, 300_000, 1)?;
    let blocked = m.value(EVE_SUPPRESSION_RATE).unwrap();
    println!(
        "mu 0.5: blocked {blocked:.4}, conclusive on kept {:.4}, hidden by loss {loss}: {}",
        m.value(EVE_CONCLUSIVE_FRACTION).unwrap(),
        loss_covered(blocked, loss)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
