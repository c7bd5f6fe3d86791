// A noisy session through estimation, Cascade and Toeplitz hashing.
// The phase error is taken equal to the bit error, a placeholder.

use basiskey::postproc::{key_length, PostprocConfig};
use basiskey::protocol::{ProtocolKind, SessionConfig};
use basiskey::report::run_pipeline;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = SessionConfig::ideal(ProtocolKind::BasisKey, 100_000, 2024);
    // kept error rate p / (1 + p) = 2%
    cfg.channel_depolarize_p = 1.0 / 49.0;
    let pp = PostprocConfig::default();
    let (_, report, finals) = run_pipeline(&cfg, &pp)?;
    let r = report.postproc.as_ref().unwrap();
    println!("sifted {} (qber {:.4})", report.n_kept, report.qber.unwrap());
    println!("estimated e_b {:.4} from {} disclosed bits", r.qber_estimate, r.bits_disclosed_estimation);
    println!("cascade block {} leaked {} bits, success {}", r.cascade_initial_block, r.ec_leakage_bits, r.ec_success);
    let n_rem = r.n_sifted - r.bits_disclosed_estimation;
    println!(
        "final {} bits (formula budget {}), keys equal {}, phase error model: {}",
        r.final_key_length,
        key_length(n_rem, r.qber_estimate, r.phase_error_used, pp.f_ec)?,
        finals.alice == finals.bob,
        r.phase_error_model
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
