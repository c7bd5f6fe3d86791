// Sift factor of the basis-keyed protocol against BB84, exactly and by
// sampling.

use basiskey::harness::{enumerate_exact, run_monte_carlo, Mode, Scenario};
use basiskey::harness::metrics::SIFT_FRACTION;
use basiskey::protocol::{ProtocolKind, SessionConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    for protocol in [ProtocolKind::BasisKey, ProtocolKind::Bb84] {
        let scenario = Scenario {
            name: format!("{protocol:?}"),
            session: SessionConfig::ideal(protocol, 200_000, 7),
            mode: Mode::Enumerate,
            f_ec: 1.0,
            expected: vec![],
        };
        let exact = enumerate_exact(&scenario)?;
        let (_, sampled) = run_monte_carlo(&scenario, 200_000, 1)?;
        let e = exact.get(SIFT_FRACTION).unwrap();
        let s = sampled.get(SIFT_FRACTION).unwrap();
        println!(
            "{:<9} exact {} sampled {:.4} +- {:.4}",
            scenario.name,
            e.exact().unwrap(),
            s.value(),
            s.stderr().unwrap()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
