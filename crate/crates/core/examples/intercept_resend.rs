// Intercept-resend: the branch table for |0>_z and the error rates it
// produces in both protocols.

use basiskey::adversary::AttackStrategy;
use basiskey::harness::metrics::{QBER, SIFT_FRACTION};
use basiskey::harness::table1::render_text;
use basiskey::harness::{enumerate_exact, table1_report, Mode, Scenario};
use basiskey::protocol::{ProtocolKind, SessionConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", render_text(&table1_report()));

    for protocol in [ProtocolKind::BasisKey, ProtocolKind::Bb84] {
        let scenario = Scenario {
            name: format!("{protocol:?}"),
            session: SessionConfig::ideal(protocol, 1, 0).with_attack(AttackStrategy::InterceptResend),
            mode: Mode::Enumerate,
            f_ec: 1.0,
            expected: vec![],
        };
        let m = enumerate_exact(&scenario)?;
        println!(
            "{:<9} kept {}  qber {}",
            scenario.name,
            m.get(SIFT_FRACTION).unwrap().exact().unwrap(),
            m.get(QBER).unwrap().exact().unwrap()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
