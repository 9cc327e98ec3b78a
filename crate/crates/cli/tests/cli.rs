use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use singer_lattice::ball::BallComplex;
use singer_lattice::diffsets::{canonical_singer, is_difference_set, DifferenceMatrix};
use singer_lattice::exotic::{CensusContext, CensusFile};
use singer_lattice::permgrp::Permutation;
use singer_lattice::plane::{verify_plane_axioms, IncidenceStructure};
use singer_lattice::Exec;

fn singer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singer")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn classical_file(dir: &Path, q: u64) -> String {
    let path = dir.join(format!("classical_q{q}.dm"));
    let m = DifferenceMatrix::constant(&canonical_singer(q).unwrap().sorted_vector());
    fs::write(&path, m.to_text()).unwrap();
    path.to_str().unwrap().to_string()
}

fn parse_set(line: &str) -> (Vec<u64>, u64) {
    let (body, m) = line.trim().split_once(" mod ").unwrap();
    let elems = body
        .trim_matches(|c| c == '{' || c == '}')
        .split(", ")
        .map(|x| x.parse().unwrap())
        .collect();
    (elems, m.parse().unwrap())
}

#[test]
fn gen_singer() {
    let o = singer(&["gen-singer", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "{0, 1, 3} mod 7\n");

    let o = singer(&["gen-singer", "6"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not a prime power"));

    let o = singer(&["gen-singer", "8"]);
    assert_eq!(code(&o), 0);
    let (elems, m) = parse_set(&stdout(&o));
    assert_eq!((elems.len(), m), (9, 73));
    assert!(is_difference_set(&elems, 8).unwrap());

    assert_eq!(code(&singer(&["gen-singer", "11"])), 3);
}

#[test]
fn verify_ds() {
    assert_eq!(code(&singer(&["verify-ds", "2", "0", "1", "3"])), 0);
    assert_eq!(code(&singer(&["verify-ds", "2", "0", "1", "2"])), 2);
    assert_eq!(code(&singer(&["verify-ds", "2", "0", "1", "9"])), 2);
    assert_eq!(code(&singer(&["verify-ds", "3", "0", "1", "3", "9"])), 0);
}

#[test]
fn build_plane_round_trips() {
    let o = singer(&["build-plane", "3"]);
    assert_eq!(code(&o), 0);
    let s = IncidenceStructure::from_text(&stdout(&o)).unwrap();
    assert_eq!(s.num_points(), 13);
    assert!(verify_plane_axioms(&s));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plane.txt");
    let o = singer(&["build-plane", "2", "3", "0", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("axioms hold"));
    let s = IncidenceStructure::from_text(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(s.label(0, 3), Some(1));
}

#[test]
fn bounds_table() {
    let o = singer(&["bounds", "2", "3", "4", "5"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<(String, String)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    let expected = [("2", "4"), ("3", "64"), ("4", "400"), ("5", "1600")];
    assert_eq!(rows.len(), 4);
    for (r, e) in rows.iter().zip(expected) {
        assert_eq!((r.0.as_str(), r.1.as_str()), e);
    }
    assert!(text.lines().nth(1).unwrap().contains("\t2/9\t"));
    assert_eq!(code(&singer(&["bounds", "6"])), 2);
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let classical = classical_file(dir.path(), 2);
    let o = singer(&["certify", &classical]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "Inconclusive");
    assert_eq!(code(&singer(&["certify", "--expect-candidate", &classical])), 0);

    let ctx = CensusContext::new(5, Exec::Parallel).unwrap();
    let t = Permutation::from_cycles(6, &[&[0, 1]]).unwrap();
    let t = if ctx.g0.contains(&t) { Permutation::from_cycles(6, &[&[0, 2]]).unwrap() } else { t };
    assert!(!ctx.g0.contains(&t));
    let exotic = dir.path().join("exotic.dm");
    fs::write(&exotic, ctx.normalized(t, Permutation::identity(6)).decode().to_text()).unwrap();
    let exotic = exotic.to_str().unwrap();
    let o = singer(&["certify", exotic]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("CertifiedExotic"));
    assert_eq!(code(&singer(&["certify", "--expect-candidate", exotic])), 1);
}

#[test]
fn malformed_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.dm", "{\"q\": 2,\n \"modulus\": 7,\n \"columns\": [[0, 1, 3]", "line 3"),
        ("modulus.dm", "{\"q\": 2, \"modulus\": 8, \"columns\": [[0,1,3],[0,1,3],[0,1,3]]}", "modulus"),
        ("count.dm", "{\"q\": 2, \"modulus\": 7, \"columns\": [[0,1,3],[0,1,3]]}", "columns"),
        ("entry.dm", "{\"q\": 2, \"modulus\": 7, \"columns\": [[0,1,3],[0,1,2],[0,1,3]]}", "columns[1]"),
    ];
    for (name, text, needle) in cases {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        let o = singer(&["certify", path.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{name}");
        assert!(stderr(&o).contains(needle), "{name}: {}", stderr(&o));
    }
    assert_eq!(code(&singer(&["certify", "/nonexistent/file.dm"])), 2);
}

#[test]
fn classify_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = singer(&["--threads", threads, "classify", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        assert!(stdout(&o).starts_with("576 matrices processed"));
        let census = fs::read_to_string(out.join("census.json")).unwrap();
        let file = CensusFile::from_text(&census).unwrap();
        assert_eq!(file.total, 576);
        assert_eq!(file.to_text(), census);
        texts.push((census, fs::read_to_string(out.join("summary.tsv")).unwrap()));
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn classify_caps() {
    assert_eq!(code(&singer(&["classify", "7"])), 3);
    let o = singer(&["classify", "7", "--candidates-only"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\t0\t"));
    assert_eq!(code(&singer(&["classify", "6"])), 2);
    assert_eq!(code(&singer(&["classify", "2", "--extra-moves"])), 0);
}

#[test]
fn ball_export() {
    let dir = tempfile::tempdir().unwrap();
    let m = classical_file(dir.path(), 2);
    let out = dir.path().join("ball.json");
    let o = singer(&["ball", &m, "-r", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("113 vertices, 343 edges, 231 chambers"));
    let text = fs::read_to_string(&out).unwrap();
    let ball = BallComplex::from_text(&text).unwrap();
    assert_eq!(ball.to_text(), text);
    assert_eq!(code(&singer(&["ball", &m, "-r", "3"])), 3);
    let m4 = classical_file(dir.path(), 4);
    assert_eq!(code(&singer(&["ball", &m4, "-r", "2"])), 3);
}
