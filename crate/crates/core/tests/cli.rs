use std::fs;
use std::process::Command;

const CONFIG: &str = r#"{
  "map": { "kind": "circle", "family": { "kind": "linear", "multiplier": 2 } },
  "potential": { "kind": "cosine" },
  "scheme": "collocation",
  "n": [32],
  "t": { "min": -1.0, "max": 1.0, "steps": 5 }
}"#;

fn thermoform() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermoform"))
}

#[test]
fn binary_runs_a_sweep_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("out");
    let status = thermoform()
        .args(["pressure-sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--n", "24,32", "--t-min", "-2", "--workers", "2"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = fs::read_to_string(out.join("pressure_N24.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("-2"));
    assert!(out.join("pressure_N32.csv").exists());
}

#[test]
fn bad_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, CONFIG.replace("\"steps\": 5", "\"steps\": \"five\"")).unwrap();
    let out = thermoform().args(["pressure-sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("steps"));
}

#[test]
fn seed_without_monte_carlo_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, CONFIG).unwrap();
    let out = thermoform()
        .args(["pressure-sweep", "--seed", "7", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
