use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use adsvol::mesh::SurfaceMesh;

fn adsvol(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adsvol"))
        .args(args)
        .current_dir(cwd)
        .env_remove("ADSVOL_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn line_value(text: &str, prefix: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(prefix)).unwrap_or_else(|| panic!("no '{prefix}' in\n{text}"));
    line.split('=').nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn mesh_build_prints_counts_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = adsvol(&["mesh", "build", "--genus", "2", "--level", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("χ = -2"), "{}", stdout(&o));

    let o = adsvol(&["mesh", "build", "--genus", "2", "--level", "2", "--out", "m.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let id = stdout(&o).lines().find_map(|l| l.strip_prefix("mesh id ")).unwrap().to_owned();
    let loaded = SurfaceMesh::load(dir.path().join("m.json")).unwrap();
    assert_eq!(loaded.id().to_string(), id);
}

#[test]
fn domain_and_resource_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = adsvol(&["mesh", "build", "--genus", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("genus must be ≥ 2"));

    let o = adsvol(&["mesh", "build", "--genus", "2", "--level", "13"], dir.path());
    assert_eq!(o.status.code(), Some(3));

    let o = adsvol(&["verify", "--n-spec", "bump:amp=-1"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = adsvol(&["verify", "--mesh", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = adsvol(&["bogus"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_fuchsian_reaches_equality() {
    let dir = tempfile::tempdir().unwrap();
    let o = adsvol(&["verify", "--genus", "2", "--level", "2", "--n-spec", "zero", "--nodes", "64", "--out", "r"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let total = line_value(&stdout(&o), "total volume");
    assert!((total - 2.0 * PI * PI).abs() < 1e-8, "{total}");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r/report.json")).unwrap()).unwrap();
    assert_eq!(report["scope"], "slice-wise verification of the per-tau bound");
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 16);
    assert!(report["worst_newton_iterations"].as_u64().unwrap() > 0);
    assert_eq!(report["nodes"].as_array().unwrap().len(), 64);

    let rows = csv_rows(&dir.path().join("r/nodes.csv"));
    assert_eq!(rows.len(), 64);
    let sum: f64 = rows.iter().map(|r| r[1].parse::<f64>().unwrap() * r[2].parse::<f64>().unwrap()).sum();
    assert!((sum - total).abs() < 1e-9);
    assert!(dir.path().join("r/bounds.csv").exists());
}

#[test]
fn verify_bump_has_positive_margin_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        ["verify", "--n-spec", "bump:center=0,amp=0.1,radius=1", "--nodes", "16", "--threads", "2", "--out", out]
    };
    let o = adsvol(&args("a"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(line_value(&stdout(&o), "margin") > 0.0);
    adsvol(&args("b"), dir.path());
    let a = std::fs::read_to_string(dir.path().join("a/report.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/report.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{"level": 1, "nodes": 8, "output_dir": "from-config"}"#).unwrap();
    let o = adsvol(&["--config", "cfg.json", "verify", "--nodes", "12"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("from-config/report.json")).unwrap()).unwrap();
    assert_eq!(report["nodes"].as_array().unwrap().len(), 12);
    assert_eq!(report["vertex_count"], 14);
}

#[test]
fn thread_env_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |value: &str| {
        Command::new(env!("CARGO_BIN_EXE_adsvol"))
            .args(["verify", "--level", "1", "--nodes", "12", "--out", "t"])
            .current_dir(dir.path())
            .env("ADSVOL_THREADS", value)
            .output()
            .unwrap()
    };
    assert_eq!(run("1").status.code(), Some(0));
    assert_eq!(run("0").status.code(), Some(0));
    assert_eq!(run("many").status.code(), Some(2));
}

#[test]
fn slice_gen_fuchsian_equalities() {
    let dir = tempfile::tempdir().unwrap();
    let o = adsvol(&["slice", "gen", "--tau", "0", "--n", "zero", "--out", "s"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for key in ["min sigma ", "max l (1+tau^2) ", "min sigma l (1+tau^2) "] {
        assert!((line_value(&out, key) - 1.0).abs() < 1e-9, "{key}: {out}");
    }
    let slice: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s/slice.json")).unwrap()).unwrap();
    for key in ["tau", "u", "K", "W", "mesh_ref", "lapse", "sigma"] {
        assert!(!slice[key].is_null(), "{key}");
    }
}

#[test]
fn corrupted_slice_exits_4_with_transcript() {
    let dir = tempfile::tempdir().unwrap();
    adsvol(&["mesh", "build", "--level", "2", "--out", "m.json"], dir.path());
    let o = adsvol(
        &["slice", "gen", "--tau", "0.5", "--n", "bump:amp=0.1,radius=1", "--mesh", "m.json", "--out", "s"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let ok = adsvol(&["slice", "check", "--slice", "s/slice.json", "--mesh", "m.json", "--out", "ok"], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));

    let mut slice: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s/slice.json")).unwrap()).unwrap();
    for v in (0..62).step_by(3) {
        slice["K"][v] = serde_json::json!(1e30);
    }
    std::fs::write(dir.path().join("bad.json"), slice.to_string()).unwrap();
    let o = adsvol(&["slice", "check", "--slice", "bad.json", "--mesh", "m.json", "--out", "chk"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    let err = stderr(&o);
    let path = err.lines().find_map(|l| l.strip_prefix("solver transcript: ")).unwrap();
    let transcript = adsvol::cli::parse_transcript_csv(&std::fs::read_to_string(dir.path().join(path)).unwrap()).unwrap();
    assert!(transcript.iterations() >= 1);

    std::fs::write(dir.path().join("garbage.json"), "{not json").unwrap();
    let o = adsvol(&["slice", "check", "--slice", "garbage.json", "--mesh", "m.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_density_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = adsvol(&["sweep", "--tau-min", "-3", "--tau-max", "3", "--steps", "13", "--out", "f"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("f/sweep.csv"));
    assert_eq!(rows.len(), 13);
    for r in &rows {
        let tau: f64 = r[0].parse().unwrap();
        let v: f64 = r[1].parse().unwrap();
        let exact = 4.0 * PI / (1.0 + tau * tau).powi(2);
        assert!((v - exact).abs() < 1e-9 * exact.max(1.0), "{tau}: {v} vs {exact}");
    }

    let o = adsvol(
        &["sweep", "--tau-min", "-3", "--tau-max", "3", "--steps", "13", "--n-spec", "bump:amp=0.2,radius=1", "--out", "b"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for r in csv_rows(&dir.path().join("b/sweep.csv")) {
        assert!(r[1].parse::<f64>().unwrap() >= r[2].parse::<f64>().unwrap());
    }
}
