use std::process::{Command, Output};

fn migrisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_migrisk"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_json_and_exit_codes() {
    let o = migrisk(&["analyze", "tests/corpus", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let a = stdout(&o);
    assert!(a.contains("\"rule_id\": \"ARB-SEQ-001\""));
    assert_eq!(
        a,
        stdout(&migrisk(&["analyze", "tests/corpus", "--format", "json"]))
    );

    assert_eq!(
        migrisk(&["analyze", "tests/corpus", "--check"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        migrisk(&["analyze", "tests/corpus/seq_001_clean.sol", "--check"])
            .status
            .code(),
        Some(0)
    );
    let only = stdout(&migrisk(&[
        "analyze",
        "tests/corpus",
        "--rules",
        "ARB-DOS-002",
    ]));
    assert!(only.contains("ARB-DOS-002") && !only.contains("ARB-SEQ-001"));
    assert_eq!(
        migrisk(&["analyze", "tests/corpus", "--rules", "ARB-NOPE"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.sol");
    std::fs::write(&bad, "contract C {").unwrap();
    let o = migrisk(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("expected '}'"));
    assert_eq!(migrisk(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn scenario_commands() {
    let list = stdout(&migrisk(&["scenario", "list"]));
    for id in ["S1", "S2", "S3", "S4", "S5"] {
        assert!(list.contains(id));
    }
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s2.json");
    let o = migrisk(&["scenario", "run", "S2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"observable_fraction\": 0.25"));
    assert!(text.ends_with("}\n"));

    assert_eq!(
        migrisk(&["scenario", "run", "S3", "--check"]).status.code(),
        Some(1)
    );
    let args = [
        "scenario",
        "run",
        "S1",
        "--param",
        "downtime_s=0",
        "--check",
    ];
    assert_eq!(migrisk(&args).status.code(), Some(0));
    assert_eq!(
        migrisk(&["scenario", "run", "S1", "--param", "nope=1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(migrisk(&["scenario", "run", "S9"]).status.code(), Some(2));
}

#[test]
fn gas_alias_and_sim() {
    let calc = stdout(&migrisk(&[
        "gas",
        "calc",
        "--gas-used-l2",
        "100000",
        "--calldata-price-l1",
        "30",
        "--calldata-size-l1",
        "1000",
        "--gas-price-l2",
        "7",
    ]));
    assert!(calc.contains("gas_limit 104286") && calc.contains("730002"));
    let table = stdout(&migrisk(&["gas", "table"]));
    assert!(table.contains("Aave Deposit") && table.contains("$3.87"));

    let a = stdout(&migrisk(&[
        "alias",
        "apply",
        "0x0000000000000000000000000000000000000000",
    ]));
    assert_eq!(a.trim(), "0x1111000000000000000000000000000000001111");
    let u = stdout(&migrisk(&["alias", "undo", a.trim()]));
    assert_eq!(u.trim(), "0x0000000000000000000000000000000000000000");
    assert_eq!(migrisk(&["alias", "apply", "0x12"]).status.code(), Some(2));

    let blocks = stdout(&migrisk(&["sim", "blocks"]));
    assert!(blocks.contains("12:00:30       1002     1000"));
}

#[test]
fn checklist_from_findings_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("findings.json");
    let o = migrisk(&[
        "analyze",
        "tests/corpus/alias_001_planted.sol",
        "--format",
        "json",
    ]);
    std::fs::write(&f, &o.stdout).unwrap();
    let text = stdout(&migrisk(&["checklist", f.to_str().unwrap()]));
    assert!(text.starts_with("1. Pause"));
    assert!(text.contains("aliased address"));
}
