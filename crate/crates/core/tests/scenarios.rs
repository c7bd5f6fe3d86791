use std::collections::BTreeSet;
use std::path::Path;

use basiskey::harness::presets::PRESET_FILES;
use basiskey::harness::{parse_scenario, Mode};

#[test]
fn every_shipped_file_is_a_preset_and_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let on_disk: BTreeSet<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".scn"))
        .collect();
    let compiled: BTreeSet<String> = PRESET_FILES.iter().map(|(f, _)| f.to_string()).collect();
    assert_eq!(on_disk, compiled);
    for name in on_disk {
        let text = std::fs::read_to_string(dir.join(&name)).unwrap();
        let s = parse_scenario(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        if let Mode::MonteCarlo { n_rounds, .. } = s.mode {
            assert_eq!(s.session.n_rounds, n_rounds);
        }
    }
}

#[test]
fn every_expected_metric_is_reported() {
    use basiskey::harness::presets::{presets, run_with_oracle};
    for s in presets().unwrap() {
        if s.mode != Mode::Enumerate {
            continue;
        }
        let r = &run_with_oracle(&s, 0).unwrap()[0];
        for e in &r.expectations {
            assert!(e.observed.is_some(), "{}: {} missing", s.name, e.metric);
        }
    }
}
