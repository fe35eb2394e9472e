use std::process::Command;

fn cbct(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cbct")).args(args).output().unwrap()
}

#[test]
fn pipeline_then_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let small = ["--out", out, "--nx", "8", "--nu", "16", "--n-proj", "12"];
    let run = cbct(&[&["pipeline"], &small[..]].concat());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("psnr") && stdout.contains("mssim") && stdout.contains("cnr"));
    let export = cbct(&[&["export-slices", "--indices", "0,4"], &small[..]].concat());
    assert!(export.status.success(), "{}", String::from_utf8_lossy(&export.stderr));
    assert!(dir.path().join("slices/slice_2_004.pgm").exists());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"geometry": {"sx": 64, "nx": 8, "su": 256, "nu": 16, "SP": 1500, "SO": 1000, "n_proj": 12}, "stages": ["project"]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let run = cbct(&["pipeline", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--stages", "phantom"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out.join("phantom.raw").exists());
    assert!(!out.join("projections.raw").exists());
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["reconstruct", "--out", out, "--nx", "8", "--nu", "16"],
        vec!["pipeline", "--out", out, "--stages", "phantom,radon"],
        vec!["pipeline", "--out", out, "--shadow", "nearest"],
        vec!["pipeline", "--out", out, "--nx", "7"],
    ] {
        let run = cbct(&args);
        assert!(!run.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&run.stderr).starts_with("error: "), "{args:?}");
    }
}
