//! End-to-end checks of the command-line front end: exit codes, file
//! contracts, determinism, and the shipped presets.

use std::path::{Path, PathBuf};
use std::process::Command;

fn molspec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_molspec"))
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("molspec-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn absorption_preset_runs_and_matches_contract() {
    let dir = tempdir("absorption");
    let out = dir.join("absorption.csv");
    let status = molspec()
        .args(["absorption", "--config"])
        .arg(preset("fig1c_absorption.toml"))
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "omega_l,population");
    assert_eq!(lines.count(), 2041);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempdir("determinism");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for out in [&a, &b] {
        let status = molspec()
            .args(["emission-transient", "--config"])
            .arg(preset("fig1c_emission.toml"))
            .arg("--output")
            .arg(out)
            .args(["--format", "json"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.contains("retained_weight"));
    assert!(text.contains("\"config\""));
}

#[test]
fn fig1d_preset_parses_to_expected_parameters() {
    let text = std::fs::read_to_string(preset("fig1d_transmission.toml")).unwrap();
    let config = molspec::config::parse_config(&text).unwrap();
    let mol = config.molecule.unwrap();
    let cav = config.cavity.unwrap();
    assert_eq!(mol.modes[0].lambda, 0.3);
    assert_eq!(mol.modes[0].gamma_vib, 1.5 * cav.kappa);
    assert_eq!(mol.modes[0].nu, 4.0 * cav.kappa);
    assert_eq!(cav.g, 2.0 * cav.kappa);
    assert_eq!(cav.omega_c, mol.omega_e);
}

#[test]
fn pump_probe_emits_tangent_columns() {
    let dir = tempdir("pump-probe");
    let out = dir.join("pp.csv");
    let status = molspec()
        .args(["pump-probe", "--config"])
        .arg(preset("fig2c_pump_probe.toml"))
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,P_D,P_A,P_D_uncoupled,P_A_tangent\n"));
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempdir("invalid");
    let bad = dir.join("bad.toml");
    std::fs::write(
        &bad,
        r#"
kind = "absorption"

[molecule]
omega_e = 1.0
gamma_rad = 1.0

[[molecule.modes]]
nu = -1.0
gamma_vib = 1.0
lambda = 0.1

[drive]
target = "molecule"
eta = 0.01

[grid]
start = 0.0
stop = 1.0
points = 3
"#,
    )
    .unwrap();
    let output = molspec()
        .args(["absorption", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("molecule.modes[0].nu"), "stderr: {stderr}");
}

#[test]
fn kind_subcommand_mismatch_exits_2() {
    let output = molspec()
        .args(["branching", "--config"])
        .arg(preset("fig1c_absorption.toml"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_config_exits_2() {
    let output = molspec()
        .args(["absorption", "--config", "/nonexistent/path.toml"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn truncation_failure_exits_4() {
    let dir = tempdir("truncation");
    let cfg = dir.join("tight.toml");
    std::fs::write(
        &cfg,
        r#"
kind = "absorption"

[molecule]
omega_e = 1.0
gamma_rad = 1.0

[[molecule.modes]]
nu = 2.0
gamma_vib = 1.0
lambda = 2.0

[drive]
target = "molecule"
eta = 0.01

[grid]
start = 0.0
stop = 10.0
points = 5

[policy]
epsilon = 1e-12
max_order = 2
"#,
    )
    .unwrap();
    let output = molspec()
        .args(["absorption", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn steady_emission_preset_runs() {
    let dir = tempdir("steady");
    let out = dir.join("steady.csv");
    let status = molspec()
        .args(["emission-steady", "--config"])
        .arg(preset("emission_steady.toml"))
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("omega,intensity\n"));
}
