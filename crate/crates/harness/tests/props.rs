use vmcts::props::{
    run_property_suite, tree_accounting, Fault, PropsReport, REPORT_SCHEMA_VERSION,
};

#[test]
fn suite_passes_and_report_is_valid_json() {
    let report = run_property_suite(3, None);
    let failed: Vec<_> = report.properties.iter().filter(|p| !p.passed).collect();
    assert!(report.passed, "{failed:#?}");
    let text = serde_json::to_string(&report).unwrap();
    let back: PropsReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.schema_version, REPORT_SCHEMA_VERSION);
    assert_eq!(back.properties.len(), report.properties.len());
    assert!(back.properties.iter().all(|p| p.cases > 0));
}

#[test]
fn injected_volume_fault_is_reported_with_node_path() {
    let r = tree_accounting(0, 2, 30, Some(Fault::VolumeAccounting));
    assert!(!r.passed);
    let ce = r.counterexample.expect("counterexample");
    assert_eq!(ce["invariant"], "subtree volume");
    let path = ce["path"].as_array().expect("path");
    assert_eq!(path[0], 0);
    assert!(path.len() > 1);
    assert!(ce["found"].as_f64().unwrap() != ce["expected"].as_f64().unwrap());
}

#[test]
fn faulty_suite_fails_only_the_accounting_property() {
    let report = run_property_suite(0, Some(Fault::VolumeAccounting));
    assert!(!report.passed);
    let failed: Vec<&str> = report
        .properties
        .iter()
        .filter(|p| !p.passed)
        .map(|p| p.name.as_str())
        .collect();
    assert_eq!(failed, ["planner/tree-accounting"]);
}
