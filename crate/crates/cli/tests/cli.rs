use std::process::Command;

use onebit_cli::{run_scenario_file, RunOptions, Table};

const SCENARIO: &str = r#"
name = "smoke"
outputs = ["mc_rmse", "bias", "mse_bound", "crb"]
trials = 50
seed = 3

[model]
family = "ula"
sensors = 8

[sweep]
phi = [-20.0, 0.0, 35.0]
snr_db = [5.0, 15.0]

[search]
grid = 512
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_onebit-mcrb"))
}

#[test]
fn run_writes_sorted_rows_with_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("smoke.toml");
    std::fs::write(&config, SCENARIO).unwrap();
    let out = dir.path().join("out");
    let paths = run_scenario_file(&config, &RunOptions::default(), &out).unwrap();
    assert_eq!(paths, vec![out.join("smoke.csv")]);
    let table = Table::from_csv(&std::fs::read_to_string(&paths[0]).unwrap()).unwrap();
    assert_eq!(
        table.header,
        ["doa_deg", "snr_db", "rmse_mml", "rmse_mml_se", "abs_bias_deg", "sqrt_mse_bound", "sqrt_crb", "status"]
    );
    assert_eq!(table.numbers("doa_deg").unwrap(), [-20.0, 0.0, 35.0, -20.0, 0.0, 35.0]);
    assert_eq!(table.numbers("snr_db").unwrap(), [5.0, 5.0, 5.0, 15.0, 15.0, 15.0]);
    assert!(table.rows.iter().all(|r| r.last().unwrap() == "ok"));
    for v in table.numbers("sqrt_mse_bound").unwrap() {
        assert!(v > 0.0 && v.is_finite());
    }
}

#[test]
fn binary_runs_and_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("smoke.toml");
    std::fs::write(&config, SCENARIO).unwrap();
    let run = |seed: &str, out: &str| {
        let status = bin()
            .args(["run", config.to_str().unwrap(), "--seed", seed, "--trials", "20", "--out-dir"])
            .arg(dir.path().join(out))
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(dir.path().join(out).join("smoke.csv")).unwrap()
    };
    let a = run("5", "a");
    assert_eq!(a, run("5", "b"));
    assert_ne!(a, run("6", "c"));
}

#[test]
fn invalid_config_fails_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, SCENARIO.replace("sensors = 8", "sensors = 0")).unwrap();
    let out = bin().args(["run", config.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.sensors"));
}

#[test]
fn list_and_complexity() {
    let out = bin().arg("list").output().unwrap();
    let names = String::from_utf8(out.stdout).unwrap();
    assert_eq!(names.lines().count(), 9);
    assert!(names.contains("fig8") && names.contains("custom"));

    let dir = tempfile::tempdir().unwrap();
    let status = bin().args(["complexity", "--grid", "64", "--out-dir"]).arg(dir.path()).output().unwrap().status;
    assert!(status.success());
    let table = Table::from_csv(&std::fs::read_to_string(dir.path().join("complexity.csv")).unwrap()).unwrap();
    assert_eq!(table.numbers("cost_quantized").unwrap(), table.numbers("measured_quantized").unwrap());
    assert_eq!(table.numbers("cost_fine").unwrap(), table.numbers("measured_fine").unwrap());
    let unknown = bin().args(["preset", "nope"]).output().unwrap();
    assert!(!unknown.status.success());
}
