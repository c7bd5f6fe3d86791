macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(sift_factor, "sift_factor.rs");
example!(intercept_resend, "intercept_resend.rs");
example!(pns_attack, "pns_attack.rs");
example!(usd_filter, "usd_filter.rs");
example!(efficiency_control, "efficiency_control.rs");
example!(detector_mismatch, "detector_mismatch.rs");
example!(postprocessing, "postprocessing.rs");
example!(scenario_report, "scenario_report.rs");

#[test]
fn sift_factor_runs() {
    sift_factor::run().unwrap();
}

#[test]
fn intercept_resend_runs() {
    intercept_resend::run().unwrap();
}

#[test]
fn pns_attack_runs() {
    pns_attack::run().unwrap();
}

#[test]
fn usd_filter_runs() {
    usd_filter::run().unwrap();
}

#[test]
fn efficiency_control_runs() {
    efficiency_control::run().unwrap();
}

#[test]
fn detector_mismatch_runs() {
    detector_mismatch::run().unwrap();
}

#[test]
fn postprocessing_runs() {
    postprocessing::run().unwrap();
}

#[test]
fn scenario_report_runs() {
    scenario_report::run().unwrap();
}
