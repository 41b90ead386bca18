use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

const Z2Z2: &str = "factor cyclic 2\nfactor cyclic 2\n";

fn wlab(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wlab"));
    cmd.current_dir(dir).args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn setup(spec: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.grp"), spec).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ball_stream_is_deterministic() {
    let dir = setup(Z2Z2);
    let a = wlab(dir.path(), &["-g", "g.grp", "-R", "4", "ball"], &[]);
    let b = wlab(dir.path(), &["-g", "g.grp", "-R", "4", "ball"], &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let lines: Vec<Value> = stdout(&a).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines[0]["config_hash"].is_string());
    assert_eq!(lines[1]["code"], "(e, e)");
    assert_eq!(lines[1]["norm"], 2);
    assert!(lines[1..].iter().any(|l| l["norm"] == 4));
}

#[test]
fn ball_below_minimal_radius_is_input_error() {
    let dir = setup(Z2Z2);
    let o = wlab(dir.path(), &["-g", "g.grp", "-R", "1", "ball"], &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn ball_cap_is_resource_error() {
    let dir = setup(Z2Z2);
    let o = wlab(dir.path(), &["-g", "g.grp", "--cap-ball", "2", "-R", "8", "ball"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn full_verify_passes_with_manifest() {
    let dir = setup(Z2Z2);
    let o = wlab(dir.path(), &["-g", "g.grp", "--out", "out", "verify"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 11);
    let out = dir.path().join("out");
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 13);
    for f in files {
        let bytes = fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.join("verify/stabilizers.json")).unwrap()).unwrap();
    assert_eq!(report["config_hash"], manifest["config_hash"]);
    assert_eq!(report["report"]["passed"], true);
}

#[test]
fn single_suite_flag() {
    let dir = setup(Z2Z2);
    let o = wlab(dir.path(), &["-g", "g.grp", "--out", "out", "verify", "--suite", "local-contractibility"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<_> = fs::read_dir(dir.path().join("out/verify")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec!["local-contractibility.json"]);
}

#[test]
fn environment_mirrors_flags() {
    let dir = setup(Z2Z2);
    let flags = wlab(dir.path(), &["-g", "g.grp", "-R", "6", "ball"], &[]);
    let env = wlab(dir.path(), &["ball"], &[("WLAB_GROUP", "g.grp"), ("WLAB_RADIUS", "6")]);
    assert_eq!(flags.stdout, env.stdout);
    let o = wlab(dir.path(), &["verify"], &[("WLAB_SUITE", "homology")]);
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn corrupted_table_fails_at_load() {
    let dir = setup("factor cyclic 2\nfactor table T 3\n0 1 2\n1 2 0\n2 1 0\n");
    let o = wlab(dir.path(), &["-g", "g.grp", "verify"], &[]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("factor 2"), "{err}");
}

#[test]
fn unknown_suite_is_input_error() {
    let dir = setup(Z2Z2);
    let o = wlab(dir.path(), &["-g", "g.grp", "verify", "--suite", "nope"], &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn reduce_paths() {
    let dir = setup(Z2Z2);
    let id = wlab(dir.path(), &["-g", "g.grp", "reduce", "[[],[]]"], &[]);
    assert_eq!(stdout(&id).lines().count(), 1);
    let one = wlab(dir.path(), &["-g", "g.grp", "reduce", "[[],[[1,1]]]"], &[]);
    let lines: Vec<String> = stdout(&one).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].ends_with("w0 4"));
    assert!(lines[1].ends_with("(e, e)  w0 2"));
    let a = wlab(dir.path(), &["-g", "g.grp", "--seed", "5", "reduce", "--random", "8"], &[]);
    let b = wlab(dir.path(), &["-g", "g.grp", "--seed", "5", "reduce", "--random", "8"], &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_basis_is_input_error() {
    let dir = setup(Z2Z2);
    let o = wlab(dir.path(), &["-g", "g.grp", "reduce", "[[[7,1]]]"], &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn trees_and_fixed() {
    let dir = setup("factor cyclic 2\nfactor cyclic 2\nfactor cyclic 2\n");
    let t = wlab(dir.path(), &["trees", "-n", "3"], &[]);
    assert_eq!(stdout(&t).lines().count(), 19);
    let f = wlab(dir.path(), &["-g", "g.grp", "--out", "out", "fixed"], &[]);
    assert_eq!(f.status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/fixed.json")).unwrap()).unwrap();
    assert_eq!(report["subgroups"].as_array().unwrap().len(), 4);
}
