use std::process::Command;

fn vmcts() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vmcts"))
}

#[test]
fn run_with_overrides_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = vmcts()
        .args([
            "run",
            "--preset",
            "dubins",
            "--seeds",
            "2",
            "--rollouts",
            "200",
            "--workers",
            "2",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 2);
    assert!(text.lines().skip(1).all(|l| l.contains(",dubins,")));
    assert!(dir.path().join("table.json").exists());
    assert!(dir.path().join("config.json").exists());
}

#[test]
fn export_tree_writes_tree_and_kd_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = vmcts()
        .args([
            "export-tree",
            "--rollouts",
            "200",
            "--size",
            "2",
            "--seed",
            "4",
            "--kd",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let tree: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tree_4.json")).unwrap())
            .unwrap();
    let nodes = tree["nodes"].as_array().unwrap();
    assert!(nodes.len() > 1);
    assert!(nodes[0]["parent"].is_null());
    assert_eq!(tree["maze"]["size_n"], 2);
    assert!(dir.path().join("kd_4.json").exists());
}

#[test]
fn props_exit_code_follows_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let ok = vmcts()
        .args(["props", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(ok.status.success());
    let bad = vmcts()
        .args(["props", "--fault", "volume-accounting", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!bad.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("props.json")).unwrap())
            .unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = vmcts().args(["run", "--preset", "nope"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
    let out = vmcts()
        .args(["export-tree", "--algorithm", "nope"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
