//! End-to-end checks of the `trustware` binary: exit codes, list output,
//! config files, and rerun determinism of written reports.

use std::path::PathBuf;
use std::process::Command;

fn trustware() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trustware"))
}

fn temp_file(tag: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("trustware-cli-{tag}-{}", std::process::id()));
    p
}

#[test]
fn sim_list_names_every_builtin() {
    let output = trustware().args(["sim", "list"]).output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    for name in [
        "legit-two-devices",
        "timeout-no-devices",
        "replay-attack",
        "trust-mining",
        "mining-expiry",
        "trust-eating",
        "clock-skew-30",
        "clock-skew-60",
        "clock-skew-90",
        "shared-device",
        "remote-access",
        "delivery-mode-equivalence",
    ] {
        assert!(text.lines().any(|l| l == name), "missing {name} in:\n{text}");
    }
}

#[test]
fn run_writes_byte_identical_reports_for_same_seed() {
    let out_a = temp_file("rerun-a.jsonl");
    let out_b = temp_file("rerun-b.jsonl");
    for out in [&out_a, &out_b] {
        let status = trustware()
            .args(["sim", "run", "--scenario", "trust-mining", "--seed", "42"])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    std::fs::remove_file(out_a).unwrap();
    std::fs::remove_file(out_b).unwrap();
}

#[test]
fn unknown_scenario_is_a_config_error() {
    let output = trustware().args(["sim", "run", "--scenario", "nonesuch"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn bad_flags_are_usage_errors() {
    let output = trustware().args(["sim", "run", "--bogus"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let output = trustware().args(["frobnicate"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn summary_format_prints_outcomes() {
    let output = trustware()
        .args(["sim", "run", "--scenario", "legit-two-devices", "--format", "summary"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("1 granted"), "summary was:\n{text}");
    assert!(text.contains("alice"));
}

#[test]
fn config_file_scenario_runs_with_overrides() {
    let config = temp_file("scenario.conf");
    std::fs::write(
        &config,
        r#"
[scenario]
name = from-file
seed = 5
duration_s = 40

[manufacturer acme]
rate_limit_s = 10

[device d1]
manufacturer = acme
scope = home

[agent alice]
scope = home
open_at_s = 1
"#,
    )
    .unwrap();
    let output = trustware()
        .args(["sim", "run", "--config"])
        .arg(&config)
        .args(["--set", "scenario.seed=9", "--format", "summary"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("seed 9"));
    assert!(text.contains("1 granted"));
    std::fs::remove_file(config).unwrap();
}

#[test]
fn scenario_assertion_failure_exits_2() {
    // a built-in forced into a state its assertions reject: granting
    // scenario with an impossible threshold
    let config = temp_file("failing.conf");
    std::fs::write(
        &config,
        r#"
[scenario]
name = will-deny
duration_s = 40

[policy]
threshold = 1000

[manufacturer acme]

[device d1]
manufacturer = acme
scope = home

[agent alice]
scope = home
"#,
    )
    .unwrap();
    // file scenarios carry no assertions, so this succeeds even when denied
    let output = trustware()
        .args(["sim", "run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    std::fs::remove_file(config).unwrap();

    // but a built-in with its assertions intact fails loudly when broken:
    // trust-mining run with the delivery mode flipped still passes (the
    // attack is topology-independent), so force a failure via seed... the
    // deterministic way to provoke exit 2 is a scenario whose assertions
    // cannot hold; mining-expiry with direct delivery is exactly that.
    let output = trustware()
        .args(["sim", "run", "--scenario", "mining-expiry", "--delivery-mode", "direct"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn bad_signing_key_is_a_config_error() {
    let config = temp_file("badkey.conf");
    std::fs::write(
        &config,
        "[manufacturer]\nname = acme\nsigning_key_hex = nothex\n",
    )
    .unwrap();
    let output = trustware()
        .args(["manufacturer", "provision", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("signing key"));
    std::fs::remove_file(config).unwrap();
}

#[test]
fn missing_registry_file_is_a_config_error() {
    let config = temp_file("noregistry.conf");
    std::fs::write(
        &config,
        "[relying-party]\nlisten = 127.0.0.1:0\nregistry = /nonexistent/registry.txt\n",
    )
    .unwrap();
    let output = trustware().args(["rp", "serve", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    std::fs::remove_file(config).unwrap();
}

#[test]
fn manufacturer_provision_prints_roster_line() {
    let journal = temp_file("provision.journal");
    let _ = std::fs::remove_file(&journal);
    let config = temp_file("mfr.conf");
    std::fs::write(
        &config,
        format!(
            r#"
[manufacturer]
name = acme
listen = 127.0.0.1:0
signing_key_hex = {}
journal = {}
"#,
            "02".repeat(32),
            journal.display()
        ),
    )
    .unwrap();
    let output = trustware()
        .args(["manufacturer", "provision", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let line = String::from_utf8(output.stdout).unwrap();
    let fields: Vec<&str> = line.trim().split(',').collect();
    assert_eq!(fields.len(), 6, "roster line: {line}");
    assert_eq!(fields[0].len(), 16);
    assert_eq!(fields[1].len(), 16);

    // provisioning again appends to the same journal: both devices survive
    let output = trustware()
        .args(["manufacturer", "provision", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let journal_text = std::fs::read_to_string(&journal).unwrap();
    assert_eq!(journal_text.lines().count(), 2);

    std::fs::remove_file(config).unwrap();
    std::fs::remove_file(journal).unwrap();
}
