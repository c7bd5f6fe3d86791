use basiskey::harness::presets::{run_battery, BatteryOptions};
use basiskey::harness::report::to_json;
use serde_json::Value;

fn validator() -> jsonschema::Validator {
    let text = include_str!("../schema/report.schema.json");
    let schema: Value = serde_json::from_str(text).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn battery_report_validates() {
    let reports = run_battery(BatteryOptions { seed: None, oracle_rounds: 20_000 }).unwrap();
    let json: Value = serde_json::from_str(&to_json(&reports)).unwrap();
    let v = validator();
    let errors: Vec<String> = v.iter_errors(&json).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn schema_rejects_malformed_reports() {
    let v = validator();
    let bad = [
        serde_json::json!([{ "scenario": "x", "mode": "enumerate", "metrics": {} }]),
        serde_json::json!([{ "scenario": "x", "mode": "sampled", "metrics": {}, "expectations": [] }]),
        serde_json::json!([{ "scenario": "x", "mode": "enumerate",
            "metrics": { "qber": { "value": 0.1 } }, "expectations": [] }]),
        serde_json::json!([{ "scenario": "x", "mode": "enumerate", "metrics": {},
            "expectations": [{ "metric": "qber", "expected": 0.1, "tolerance": -1, "pass": true }] }]),
    ];
    for b in bad {
        assert!(!v.is_valid(&b), "{b}");
    }
}
