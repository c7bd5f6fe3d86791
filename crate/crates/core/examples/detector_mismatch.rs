// Unequal detector efficiencies (1 and 0.2) bias BB84's outcome-derived key
// toward 0. The basis-keyed key is read from the basis choice and is not
// affected.

use basiskey::postproc::randomness_tests;
use basiskey::protocol::{run_session, ProtocolKind, SessionConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    for protocol in [ProtocolKind::BasisKey, ProtocolKind::Bb84] {
        let mut cfg = SessionConfig::ideal(protocol, 700_000, 21);
        cfg.detectors = cfg.detectors.with_efficiencies(1.0, 0.2);
        let out = run_session(&cfg)?;
        let key = out.keys.bob();
        let test = randomness_tests(key)?;
        println!(
            "{protocol:?}: n {} zeros {:.3} monobit z {:+.1} runs z {:+.1} pass {}",
            key.len(),
            1.0 - key.count_ones() as f64 / key.len() as f64,
            test.monobit_z,
            test.runs_z,
            test.pass
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
