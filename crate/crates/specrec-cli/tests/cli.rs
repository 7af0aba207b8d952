use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specrec"))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let out_dir = dir.join("artifacts");
    let config = serde_json::json!({
        "schema": 1,
        "manifold": { "variant": "interval", "params": { "length": std::f64::consts::PI } },
        "mesh_h": 1.0,
        "delta_inv": 400.0,
        "noise": { "eig_abs": 0.0, "trace_l2": 0.0, "mix_clusters": false },
        "seed": 7,
        "eta": std::f64::consts::FRAC_PI_8,
        "partition": "arc",
        "control": { "n": 18, "i": 1000, "k": 1000, "c": 1e4, "sigma": 10.0 },
        "d_time": std::f64::consts::PI,
        "net_sigma": null,
        "rho": null,
        "eta_near": null,
        "out_dir": out_dir.to_string_lossy(),
    });
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

#[test]
fn stage_commands_produce_artifacts_and_grades() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());

    let out = bin().args(["generate", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let artifacts = tmp.path().join("artifacts");
    let hash_dir = fs::read_dir(&artifacts).unwrap().next().unwrap().unwrap().path();
    assert!(hash_dir.join("exact.ds").exists());
    assert!(!hash_dir.join("perturbed.ds").exists());

    let out = bin().args(["grade", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("grade prints a JSON report");
    assert!(report["gh_upper"].as_f64().unwrap() > 0.0);
    assert!(hash_dir.join("space.csv").exists());
    assert!(hash_dir.join("report.json").exists());

    // Standalone distances over the artifacts the pipeline just wrote.
    let exact = hash_dir.join("exact.ds");
    let out = bin()
        .arg("spectral-dist")
        .arg(&exact)
        .arg(&exact)
        .args(["--tol", "1e-4"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let delta: f64 = text
        .lines()
        .next()
        .unwrap()
        .strip_prefix("delta,")
        .unwrap()
        .parse()
        .unwrap();
    assert!(delta < 5e-3, "self-distance {delta}");

    let space = hash_dir.join("space.csv");
    let out = bin().arg("gh-dist").arg(&space).arg(&space).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("gh_lower,0"), "unexpected output: {text}");
}

#[test]
fn invalid_config_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap();
    v["control"]["n"] = serde_json::json!(5000);
    fs::write(&cfg, v.to_string()).unwrap();
    let out = bin().args(["grade", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("N"));
}

#[test]
fn sweep_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let table = tmp.path().join("sweep.csv");
    let out = bin()
        .args(["sweep", "--axis", "delta_inv", "--values", "100,200", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&table)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&table).unwrap();
    assert_eq!(text.lines().count(), 3, "header plus two rows: {text}");
    assert!(text.starts_with("value,spectral_delta,d_h,gh_upper,limit_delta,error"));
}
