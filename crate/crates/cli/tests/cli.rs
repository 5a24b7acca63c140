//! End-to-end tests driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aah-heom"))
        .args(args)
        .output()
        .unwrap()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process terminated by signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn filter_sizes_end_to_end() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        r#"
            experiment = "filter_sizes"
            [chain]
            L = 33
            h = 10.0
            [bath]
            kappa = 2.0
            gamma = 2.0
            [filter]
            epsilon = 0.02
            l_min = 9
            l_max = 45
        "#,
    );
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "filter-sizes",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let csv = std::fs::read_to_string(out_dir.join("filter_sizes.csv")).unwrap();
    assert!(csv.starts_with("# schema="), "missing schema line: {csv}");
    let sizes: Vec<usize> = csv
        .lines()
        .skip(2)
        .map(|l| l.parse().unwrap())
        .collect();
    assert!(sizes.contains(&33), "kept sizes: {sizes:?}");
    assert!(sizes.iter().all(|l| l % 2 == 1 && (9..=45).contains(l)));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["schema_version"], "1");
    assert_eq!(manifest["experiment"], "filter_sizes");
    assert_eq!(manifest["points"][0]["status"], "ok");
    assert_eq!(manifest["points"][0]["files"][0], "filter_sizes.csv");
}

#[test]
fn validation_reports_every_invalid_field() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        r#"
            experiment = "dynamics"
            [chain]
            L = 10
            h = -1.0
            [bath]
            kappa = -2.0
            gamma = 2.0
            [time]
            t_max = -5.0
            [integrator]
            rtol = 0.0
            atol = 1e-10
        "#,
    );
    let out = run(&["dynamics", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    let err = stderr(&out);
    for needle in ["chain:", "bath:", "time.t_max", "integrator"] {
        assert!(err.contains(needle), "missing {needle:?} in:\n{err}");
    }
}

#[test]
fn subcommand_must_match_config_experiment() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        r#"
            experiment = "filter_sizes"
            [chain]
            L = 9
            h = 10.0
            [bath]
            kappa = 2.0
            gamma = 2.0
        "#,
    );
    let out = run(&["dynamics", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("experiment"), "stderr: {}", stderr(&out));
}

#[test]
fn verify_reports_problem_sizes_without_running() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        r#"
            experiment = "dynamics"
            [chain]
            L = 33
            h = 10.0
            [bath]
            kappa = 2.0
            gamma = 2.0
            [tier]
            depth = 6
        "#,
    );
    let out = run(&["verify", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.contains("hierarchy dimension 7623"), "report:\n{text}");
    assert!(std::fs::read_dir(tmp.path()).unwrap().count() == 1, "verify wrote files");
}

#[test]
fn verify_counts_two_modes_and_flags_unitary_limit() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        r#"
            experiment = "dynamics"
            [chain]
            L = 15
            h = 10.0
            [bath]
            kappa = 2.0
            gamma = 2.0
            omega0 = 4.0
            [tier]
            depth = 5
        "#,
    );
    let out = run(&["verify", "--config", config.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.contains("modes=2, ADOs=21, hierarchy dimension 4725"), "report:\n{text}");

    let config = write_config(
        tmp.path(),
        r#"
            experiment = "dynamics"
            [chain]
            L = 15
            h = 10.0
            [bath]
            kappa = 0.0
            gamma = 2.0
        "#,
    );
    let out = run(&["verify", "--config", config.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.contains("unitary limit"), "report:\n{text}");
}

#[test]
fn dynamics_runs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        r#"
            experiment = "dynamics"
            [chain]
            L = 5
            h = 10.0
            [bath]
            kappa = 2.0
            gamma = 2.0
            [tier]
            depth = 2
            [time]
            t_max = 0.5
            points = 5
            scale = "linear"
        "#,
    );
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        let out = run(&[
            "dynamics",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--threads",
            "1",
        ]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
        let pops = std::fs::read(dir.join("dynamics_base_populations.csv")).unwrap();
        let obs = std::fs::read(dir.join("dynamics_base_observables.csv")).unwrap();
        assert!(!pops.is_empty() && !obs.is_empty());
        outputs.push((pops, obs));
    }
    assert_eq!(outputs[0], outputs[1], "reruns differ byte-for-byte");
}

#[test]
fn spectrum_run_emits_gap_summary() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        r#"
            experiment = "spectrum"
            [chain]
            L = 5
            h = 10.0
            [bath]
            kappa = 2.0
            gamma = 5.0
            [spectrum]
            generators = ["lindblad"]
        "#,
    );
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "spectrum",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let csv =
        std::fs::read_to_string(out_dir.join("spectrum_base_lindblad.csv")).unwrap();
    assert!(csv.contains("delta="), "missing gap summary:\n{csv}");
    assert!(csv.lines().filter(|l| !l.starts_with('#')).count() > 25);
}

#[test]
fn semiclassical_sweep_writes_every_point() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        r#"
            experiment = "semiclassical"
            [chain]
            L = 21
            h = 10.0
            [bath]
            kappa = 2.0
            gamma = 2.0
            [time]
            t_max = 10.0
            t_min = 0.1
            points = 10
            [sweep]
            gamma = [2.0, 5.0]
        "#,
    );
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "semiclassical",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    for label in ["gamma2", "gamma5"] {
        for suffix in ["populations", "observables"] {
            let path = out_dir.join(format!("semiclassical_{label}_{suffix}.csv"));
            assert!(path.exists(), "missing {}", path.display());
        }
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["points"].as_array().unwrap().len(), 2);
}
