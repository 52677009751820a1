use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn sgim(args: &[&std::ffi::OsStr]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgim"))
        .args(args)
        .env_remove("SGIM_OUT_DIR")
        .output()
        .unwrap()
}

fn generate(grid: &str, out: &Path, extra: &[&str]) -> Output {
    let g = fixture(grid);
    let b = fixture("blueprint_default");
    let mut args: Vec<&std::ffi::OsStr> = vec![
        "generate".as_ref(),
        g.as_os_str(),
        b.as_os_str(),
        "-o".as_ref(),
        out.as_os_str(),
    ];
    args.extend(extra.iter().map(std::ffi::OsStr::new));
    sgim(&args)
}

fn digests(dir: &Path) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "report.json")
        .map(|e| {
            let bytes = fs::read(e.path()).unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                hex::encode(Sha256::digest(&bytes)),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn generate_writes_the_artifact_set() {
    let out = tempfile::tempdir().unwrap();
    let res = generate("grid_cigre_mv", out.path(), &[]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let names: Vec<String> = digests(out.path()).into_iter().map(|(n, _)| n).collect();
    assert_eq!(
        names,
        [
            "graph.dot",
            "graph.graphml",
            "model.json",
            "netconfig.json",
            "planning.csv",
            "planning.txt",
            "whitelist.csv",
            "whitelist.rules"
        ]
    );
    assert!(out.path().join("report.json").exists());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("analytics") && stdout.contains("wrote netconfig.json"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(generate("grid_12bus", a.path(), &[]).status.success());
    assert!(generate("grid_12bus", b.path(), &["--jobs", "1"])
        .status
        .success());
    assert_eq!(digests(a.path()), digests(b.path()));
}

#[test]
fn missing_grid_exits_with_two() {
    let out = tempfile::tempdir().unwrap();
    let res = generate("grid_absent", out.path(), &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("grid_absent"));
}

#[test]
fn stage_error_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("grid_4bus.json")).unwrap();
    let grid = dir.path().join("open.json");
    fs::write(&grid, text.replace("\"closed\": true", "\"closed\": false")).unwrap();
    let out = dir.path().join("out");
    let b = fixture("blueprint_default");
    let res = sgim(&[
        "generate".as_ref(),
        grid.as_os_str(),
        b.as_os_str(),
        "-o".as_ref(),
        out.as_os_str(),
        "--paradigm".as_ref(),
        "plc".as_ref(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("modeling failed"));
    assert!(out.join("report.json").exists());
}

#[test]
fn modeling_stage_has_no_addresses() {
    let out = tempfile::tempdir().unwrap();
    let res = generate("grid_4bus", out.path(), &["--stage", "modeling"]);
    assert!(res.status.success());
    let names: Vec<String> = digests(out.path()).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, ["graph.dot", "graph.graphml"]);
}

#[test]
fn out_dir_defaults_from_the_environment() {
    let out = tempfile::tempdir().unwrap();
    let res = Command::new(env!("CARGO_BIN_EXE_sgim"))
        .arg("generate")
        .arg(fixture("grid_4bus"))
        .arg(fixture("blueprint_default"))
        .args(["--stage", "modeling"])
        .env("SGIM_OUT_DIR", out.path())
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(out.path().join("graph.dot").exists());
}

#[test]
fn export_reproduces_generated_files() {
    let out = tempfile::tempdir().unwrap();
    assert!(generate("grid_4bus", out.path(), &[]).status.success());
    let model = out.path().join("model.json");
    for (format, file) in [
        ("netconfig", "netconfig.json"),
        ("dot", "graph.dot"),
        ("graphml", "graph.graphml"),
        ("csv", "whitelist.csv"),
        ("rules", "whitelist.rules"),
        ("model", "model.json"),
    ] {
        let res = sgim(&[
            "export".as_ref(),
            model.as_os_str(),
            "--format".as_ref(),
            format.as_ref(),
        ]);
        assert!(res.status.success(), "{format}");
        assert_eq!(
            res.stdout,
            fs::read(out.path().join(file)).unwrap(),
            "{format}"
        );
    }
    let target = out.path().join("copy.dot");
    let res = sgim(&[
        "export".as_ref(),
        model.as_os_str(),
        "--format".as_ref(),
        "dot".as_ref(),
        "-o".as_ref(),
        target.as_os_str(),
    ]);
    assert!(res.status.success());
    assert_eq!(
        fs::read(target).unwrap(),
        fs::read(out.path().join("graph.dot")).unwrap()
    );

    let res = sgim(&[
        "export".as_ref(),
        model.as_os_str(),
        "--format".as_ref(),
        "svg".as_ref(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn validate_accepts_the_fixtures() {
    for grid in ["grid_4bus", "grid_12bus", "grid_cigre_mv"] {
        let g = fixture(grid);
        let b = fixture("blueprint_default.toml");
        let res = sgim(&["validate".as_ref(), g.as_os_str(), b.as_os_str()]);
        assert!(res.status.success(), "{grid}");
        assert_eq!(String::from_utf8_lossy(&res.stdout).trim(), "ok");
    }
}

#[test]
fn validate_reports_findings() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("grid_4bus.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["transformers"][0]["tap_pos"] = serde_json::json!(99);
    let grid = dir.path().join("bad.json");
    fs::write(&grid, doc.to_string()).unwrap();
    let res = sgim(&["validate".as_ref(), grid.as_os_str()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stdout).contains("tap-range"));
}

#[test]
fn plan_prints_the_report() {
    let out = tempfile::tempdir().unwrap();
    let g = fixture("grid_12bus");
    let b = fixture("blueprint_default");
    let res = sgim(&[
        "plan".as_ref(),
        g.as_os_str(),
        b.as_os_str(),
        "-o".as_ref(),
        out.path().as_os_str(),
        "--paradigm".as_ref(),
        "plc".as_ref(),
    ]);
    assert!(res.status.success());
    assert!(out.path().join("planning.txt").exists());
    let planned = fs::read_to_string(out.path().join("planning.txt")).unwrap();
    assert!(String::from_utf8_lossy(&res.stdout).contains(planned.lines().next().unwrap()));
}

#[test]
fn benchmark_prints_one_row_per_grid() {
    let g1 = fixture("grid_4bus");
    let g2 = fixture("grid_12bus");
    let b = fixture("blueprint_default");
    let res = sgim(&[
        "benchmark".as_ref(),
        g1.as_os_str(),
        g2.as_os_str(),
        "-b".as_ref(),
        b.as_os_str(),
        "-r".as_ref(),
        "1".as_ref(),
    ]);
    assert!(res.status.success());
    let text = String::from_utf8_lossy(&res.stdout);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("grid_4bus") && rows[0].trim_end().ends_with("38"));
    assert!(rows[1].trim_end().ends_with("124"));
}

#[test]
fn bad_flags_are_usage_errors() {
    let res = sgim(&["generate".as_ref()]);
    assert_eq!(res.status.code(), Some(2));
    let g = fixture("grid_4bus");
    let b = fixture("blueprint_default");
    let res = sgim(&[
        "generate".as_ref(),
        g.as_os_str(),
        b.as_os_str(),
        "--stage".as_ref(),
        "deploy".as_ref(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}
