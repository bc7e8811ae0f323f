//! End-to-end checks of the `eitfwm` binary: flag handling, exit codes,
//! machine-readable errors, output determinism and manifest coverage.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eitfwm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eitfwm"))
        .args(args)
        .output()
        .expect("binary should run")
}

#[test]
fn lists_at_least_six_presets() {
    let out = eitfwm(&["--list-presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() >= 6, "{text}");
    for fig in ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"] {
        assert!(lines.iter().any(|l| l.starts_with(&format!("{fig}:"))));
    }
}

#[test]
fn missing_input_is_a_validation_error_with_json_payload() {
    let out = eitfwm(&[]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr should be one JSON object");
    assert_eq!(err["exit_code"], 2);
    assert!(err["error"].as_str().unwrap().contains("--spec"));
}

#[test]
fn unknown_preset_exits_2() {
    let out = eitfwm(&["--preset", "fig99"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("fig99"));
}

#[test]
fn incomplete_spec_reports_every_missing_section() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        "[experiment]\nkind = \"slow_light\"\n\n[medium]\nalpha0_l = 20.0\ngamma_mhz = 20.0\ngamma0_mhz = 1e-3\ndelta_hf_mhz = 6834.7\nomega_mhz = 5.0\n",
    )
    .unwrap();
    let out = eitfwm(&["--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("pulse"), "{err}");
}

fn run_spec_into(dir: &Path, spec: &Path) {
    let out = eitfwm(&["--spec", spec.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--quiet"]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn quick_spec() -> String {
    // small, fast slow-light case
    "[experiment]\nkind = \"slow_light\"\n\n\
     [medium]\nalpha0_l = 20.0\ngamma_mhz = 20.0\ngamma0_mhz = 1e-3\ndelta_hf_mhz = 6834.7\nomega_mhz = 5.0\n\n\
     [pulse]\nfwhm = 3.0\ncenter = 0.0\n\n\
     [grid]\nt_start = -7.0\nt_end = 10.0\nnz = 24\n"
        .to_string()
}

#[test]
fn reruns_are_bit_identical_and_manifest_covers_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, quick_spec()).unwrap();
    let out_dir = dir.path().join("out");

    run_spec_into(&out_dir, &spec);
    let mut first = std::collections::BTreeMap::new();
    for entry in fs::read_dir(&out_dir).unwrap() {
        let path = entry.unwrap().path();
        first.insert(
            path.file_name().unwrap().to_str().unwrap().to_string(),
            fs::read(&path).unwrap(),
        );
    }
    assert!(!first.is_empty());

    // manifest lists exactly the files on disk
    let manifest: serde_json::Value =
        serde_json::from_slice(&first["manifest.json"]).unwrap();
    let listed: std::collections::BTreeSet<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    let on_disk: std::collections::BTreeSet<&str> =
        first.keys().map(|s| s.as_str()).collect();
    assert_eq!(listed, on_disk);
    assert!(manifest["spec"]["medium"].is_object());

    // a second run overwrites every file with identical bytes
    run_spec_into(&out_dir, &spec);
    for (name, bytes) in &first {
        let again = fs::read(out_dir.join(name)).unwrap();
        assert_eq!(&again, bytes, "{name} changed between identical runs");
    }
}

#[test]
fn spec_and_preset_are_mutually_exclusive() {
    let out = eitfwm(&["--spec", "x.toml", "--preset", "fig4"]);
    assert!(!out.status.success());
}

#[test]
fn traces_are_headered_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, quick_spec()).unwrap();
    let out_dir = dir.path().join("out");
    run_spec_into(&out_dir, &spec);

    let text = fs::read_to_string(out_dir.join("output.csv")).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,"), "{header}");
    assert!(header.contains("signal_re") && header.contains("signal_im"));
    let cols = header.split(',').count();
    for line in lines {
        assert_eq!(line.split(',').count(), cols);
        line.split(',').for_each(|v| {
            v.parse::<f64>().unwrap();
        });
    }
}
