//! Per-session summary tying the transcript to postprocessing.

use serde::{Deserialize, Serialize};

use crate::adversary::{eve_information, EveInformation};
use crate::devices::DetectionEvent;
use crate::error::Result;
use crate::postproc::{postprocess, FinalKeys, PostprocConfig, PostprocReport};
use crate::protocol::{run_session, ProtocolKind, SessionConfig, SessionOutput};
use crate::stream::round_stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub protocol: ProtocolKind,
    pub n_rounds: u64,
    pub n_detected: u64,
    pub n_kept: u64,
    pub sift_fraction: f64,
    pub qber: Option<f64>,
    pub double_click_rate: f64,
    pub no_click_rate: f64,
    pub eve_suppression_rate: f64,
    pub eve: Option<EveInformation>,
    pub postproc: Option<PostprocReport>,
}

impl SessionReport {
    pub fn from_output(config: &SessionConfig, output: &SessionOutput) -> Self {
        let n = output.records.len() as u64;
        let count = |f: &dyn Fn(usize) -> bool| (0..output.records.len()).filter(|&i| f(i)).count() as u64;
        let n_kept = output.keys.len() as u64;
        let (eve_records, keys) = output.kept_eve_view();
        SessionReport {
            protocol: config.protocol,
            n_rounds: n,
            n_detected: count(&|i| output.records[i].detection != DetectionEvent::NoClick),
            n_kept,
            sift_fraction: n_kept as f64 / n as f64,
            qber: output.keys.error_rate(),
            double_click_rate: count(&|i| output.records[i].double_click_flag) as f64 / n as f64,
            no_click_rate: count(&|i| output.records[i].detection == DetectionEvent::NoClick) as f64
                / n as f64,
            eve_suppression_rate: count(&|i| output.eve[i].suppressed) as f64 / n as f64,
            eve: eve_information(&eve_records, &keys).ok(),
            postproc: None,
        }
    }
}

/// Session, then postprocessing on a stream disjoint from every round's.
pub fn run_pipeline(
    config: &SessionConfig,
    postproc: &PostprocConfig,
) -> Result<(SessionOutput, SessionReport, FinalKeys)> {
    let output = run_session(config)?;
    let mut report = SessionReport::from_output(config, &output);
    let mut rng = round_stream(config.rng_seed, u64::MAX);
    let (pp, finals) = postprocess(&output.keys, postproc, &mut rng)?;
    report.postproc = Some(pp);
    Ok((output, report, finals))
}
