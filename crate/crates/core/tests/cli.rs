use std::fs;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;
use std::process::{Command, Stdio};

use pirsi::cli::run;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pirsi").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pirsi-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

#[test]
fn construct_pac_prints_block_matrix() {
    let (code, out, _) = run_cli(&["construct", "pac", "--k", "6", "--m", "2", "--q", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out, "2 2 6\n1 1 1 0 0 0\n0 0 0 1 1 1\n");
}

#[test]
fn privacy_audit_reports_uniform_law() {
    let (code, out, _) = run_cli(&["audit", "privacy", "--scheme", "simplex7", "--m", "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("uniform 1/5040 : PASS\n"));
    assert!(out.contains("p = 1/5040\n"));
}

#[test]
fn demo_example_is_reproducible() {
    let args = [
        "demo", "--k", "6", "--m", "2", "--q", "2", "--w", "4", "--s", "1,2", "--seed", "7",
    ];
    let (code, first, _) = run_cli(&args);
    assert_eq!(code, 0);
    let (_, second, _) = run_cli(&args);
    assert_eq!(first, second);
    assert!(first.contains("recovered X4="));
    assert!(first.ends_with("check=PASS\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(run_cli(&["frobnicate"]).0, 2);
    assert_eq!(
        run_cli(&["demo", "--k", "6", "--m", "9", "--w", "1", "--seed", "1"]).0,
        2
    );
    assert_eq!(
        run_cli(&[
            "demo", "--scheme", "grs", "--k", "4", "--m", "2", "--q", "5", "--mode", "W", "--w", "1", "--s", "2,3",
            "--seed", "1"
        ])
        .0,
        2
    );
    assert_eq!(run_cli(&["--help"]).0, 0);
    // locality 1 fails on the (6,4) code
    let e = temp_file("e.txt", "2 2 6\n1 1 1 0 0 0\n0 0 0 1 1 1\n");
    let (code, out, _) = run_cli(&["verify", "--matrix", e.to_str().unwrap(), "--r", "1"]);
    assert_eq!(code, 1);
    assert!(out.contains("result=FAIL"));
    let (code, out, _) = run_cli(&["verify", "--matrix", e.to_str().unwrap(), "--r", "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("R(1)={2,3}"));
}

#[test]
fn bounds_and_transforms() {
    let e = temp_file("pac.txt", "2 2 6\n1 1 1 0 0 0\n0 0 0 1 1 1\n");
    let path = e.to_str().unwrap();
    let (code, out, _) = run_cli(&["bounds", "--matrix", path, "--r", "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("distance_bound=2 PASS"));
    assert!(out.contains("max_size_bound=16 PASS"));
    assert!(out.contains("rate_bound=2/3 PASS"));
    let (code, out, _) = run_cli(&["transform", "pir-to-lrc", "--matrix", path, "--m", "2"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("verified all-symbol locality 2\ncode 6 4 2\n"));
    let (code, out, _) = run_cli(&["transform", "lrc-to-pir", "--matrix", path, "--m", "2"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.matches("result=PASS").count(), 3);
    let (code, out, _) = run_cli(&["transform", "extract", "--k", "6", "--m", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("size=16\nfloor=16\n"));
    let zero = temp_file("zero.txt", "2 1 3\n1 0 1\n");
    let (code, out, _) = run_cli(&[
        "transform",
        "pir-to-lrc",
        "--matrix",
        zero.to_str().unwrap(),
        "--m",
        "1",
    ]);
    assert_eq!(code, 1);
    assert!(out.contains("column 2"));
}

#[test]
fn ws_audit_names_offending_side_set() {
    let (code, out, _) = run_cli(&[
        "audit",
        "ws-privacy",
        "--scheme",
        "grs",
        "--k",
        "4",
        "--m",
        "2",
        "--q",
        "5",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("column_sets_checked=6"));
    let (code, _, err) = run_cli(&[
        "audit",
        "ws-privacy",
        "--scheme",
        "grs",
        "--k",
        "9",
        "--m",
        "2",
        "--q",
        "5",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("GF(5)"));
}

#[test]
fn socket_session_matches_demo() {
    let db = temp_file("db.txt", "2 6\n1 0 1 1 0 0\n");
    let db = db.to_str().unwrap();
    let bin = env!("CARGO_BIN_EXE_pirsi");
    let mut server = Command::new(bin)
        .args([
            "serve",
            "--k",
            "6",
            "--m",
            "2",
            "--db",
            db,
            "--port",
            "0",
            "--sessions",
            "1",
        ])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(server.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let port = line.trim().rsplit(':').next().unwrap().to_string();
    let request = [
        "--k", "6", "--m", "2", "--db", db, "--w", "4", "--s", "1,2", "--seed", "11",
    ];
    let fetched = Command::new(bin)
        .arg("fetch")
        .args(request)
        .args(["--port", &port])
        .output()
        .unwrap();
    assert!(server.wait().unwrap().success());
    assert!(fetched.status.success());
    let (_, local, _) = run_cli(&[&["demo"][..], &request[..]].concat());
    assert_eq!(String::from_utf8(fetched.stdout).unwrap(), local);
}
