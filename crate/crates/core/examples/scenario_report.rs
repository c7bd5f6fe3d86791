// A scenario file evaluated by the exact oracle, checked by sampling, and
// written as a JSON report.

use basiskey::harness::report::to_json;
use basiskey::harness::{enumerate_exact, oracle_agreement, parse_scenario, run_monte_carlo, run_scenario};

const SCENARIO: &str = "\
name = dark-counts
protocol = basis-key
mode = enumerate
eta0 = 0.6
eta1 = 0.6
dark = 0.01
loss = 1/10
expect double_click_rate = 0.0054 +- 0.0002
";

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = parse_scenario(SCENARIO)?;
    let report = run_scenario(&scenario)?;
    println!("{}", to_json(std::slice::from_ref(&report)));

    let exact = enumerate_exact(&scenario)?;
    let (_, sampled) = run_monte_carlo(&scenario, 200_000, 1)?;
    for check in oracle_agreement(&exact, &sampled) {
        println!(
            "{:<34} exact {:.5} sampled {:.5} allowance {:.5} {}",
            check.metric,
            check.exact,
            check.estimate,
            check.allowance,
            if check.pass { "ok" } else { "OFF" }
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
