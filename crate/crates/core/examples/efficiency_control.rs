// Eve switches Bob's bit-1 detector off. In BB84 the kept key becomes all
// zeros; in the basis-keyed protocol only the public outcome is forced and
// the key stays uniform.

use basiskey::adversary::{eve_information, AttackStrategy, EfficiencyPolicy};
use basiskey::postproc::randomness_tests;
use basiskey::protocol::{run_session, ProtocolKind, SessionConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let attack = AttackStrategy::EfficiencyControl { policy: EfficiencyPolicy::Fixed { eta0: 1.0, eta1: 0.0 } };
    for protocol in [ProtocolKind::BasisKey, ProtocolKind::Bb84] {
        let out = run_session(&SessionConfig::ideal(protocol, 400_000, 5).with_attack(attack))?;
        let (records, keys) = out.kept_eve_view();
        let eve = eve_information(&records, &keys)?;
        let bob = out.keys.bob();
        let test = randomness_tests(bob)?;
        println!(
            "{protocol:?}: {} kept, ones {:.3}, monobit z {:.1}, eve accuracy {:.3}, eve information {:.4} bit",
            bob.len(),
            bob.count_ones() as f64 / bob.len() as f64,
            test.monobit_z,
            eve.guess_accuracy.unwrap_or(f64::NAN),
            eve.mutual_information_bits
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
