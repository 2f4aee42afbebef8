use std::path::PathBuf;
use std::process::{Command, Output};

use toroidal::families::make_slanted;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toroidal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Compare with tests/golden/<name>; `UPDATE_GOLDEN=1` rewrites the file.
fn golden(name: &str, args: &[&str]) {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &out.stdout).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(stdout(&out), want, "{name}");
}

#[test]
fn state_counts() {
    assert_eq!(stdout(&run(&["states", "--family", "fock", "--bound", "3"])).lines().count(), 7);
    assert_eq!(stdout(&run(&["states", "--family", "vector", "--bound", "1"])).lines().count(), 3);
    let f = make_slanted(1).unwrap();
    let cc = f.concave_convex(&f.reference()).unwrap();
    let out = stdout(&run(&["states", "--family", "slanted", "--m", "1", "--bound", "1"]));
    assert_eq!(out.lines().count(), 1 + cc.total());
}

#[test]
fn states_are_sorted_json_lines() {
    let out = stdout(&run(&["states", "--family", "macmahon", "--bound", "4", "--json"]));
    let rows: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let keys: Vec<(i64, String)> = rows
        .iter()
        .map(|r| (r["deg0"].as_i64().unwrap() + r["deg1"].as_i64().unwrap(), r["state"].as_str().unwrap().to_string()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(rows.len(), 24);
}

#[test]
fn golden_outputs() {
    golden("states_fock_3.jsonl", &["states", "--family", "fock", "--bound", "3", "--json"]);
    golden("lweight_fock_421.txt", &["lweight", "--family", "fock", "--state", "4,2,1"]);
    golden("lweight_fock_421.json", &["lweight", "--family", "fock", "--state", "4,2,1", "--json"]);
    golden("lweight_macmahon_empty.txt", &["lweight", "--family", "macmahon", "--state", "∅"]);
    golden("lweight_verma_empty.txt", &["lweight", "--family", "verma", "--state", "∅|∅"]);
    golden("lweight_fock_evaluation.txt", &["lweight", "--family", "fock", "--specialize", "d=q^-2", "--state", "∅"]);
    golden("act_fock_21_f0.txt", &["act", "--family", "fock", "--state", "2,1", "--op", "F0"]);
    golden("character_relaxed.txt", &["character", "--family", "relaxed"]);
    golden("character_macmahon_5.txt", &["character", "--family", "macmahon", "--window", "5"]);
    golden("character_fock_5.txt", &["character", "--family", "fock", "--window", "5"]);
    golden("verify_fock_3.json", &["verify", "--family", "fock", "--bound", "3", "--json"]);
}

#[test]
fn character_series() {
    let out = stdout(&run(&["character", "--family", "relaxed"]));
    assert!(out.contains("support line: 1,4,14,40"), "{out}");
    assert!(stdout(&run(&["character", "--family", "macmahon", "--window", "5"])).contains("diagonal: 1,1,3,6,13,24"));
    assert!(stdout(&run(&["character", "--family", "fock", "--window", "5"])).contains("diagonal: 1,1,2,3,5,7"));
}

#[test]
fn deterministic_output() {
    for args in [
        vec!["verify", "--family", "macmahon", "--bound", "4", "--json", "--seed", "7"],
        vec!["character", "--family", "slanted", "--m", "2", "--json"],
        vec!["states", "--family", "relaxed", "--bound", "4", "--json"],
    ] {
        let a = run(&args);
        let mut parallel = args.clone();
        parallel.extend(["--jobs", "3"]);
        let b = run(&parallel);
        let c = run(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, c.stdout, "{args:?}");
    }
}

#[test]
fn verify_exit_codes() {
    assert_eq!(run(&["verify", "--family", "fock", "--bound", "5"]).status.code(), Some(0));

    let broken = run(&["verify", "--family", "unstacked-layers", "--bound", "3", "--json"]);
    assert_eq!(broken.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(stdout(&broken).lines().next().unwrap()).unwrap();
    assert_eq!(report["assumptions"]["status"]["A2"], false);
    let witnesses = report["assumptions"]["witnesses"].as_array().unwrap();
    assert!(witnesses.iter().any(|w| w["assumption"] == "A2" && w["detail"].as_str().unwrap().contains("order 2")));

    let mutated = run(&["verify", "--family", "fock", "--bound", "3", "--mutate-coefficient", "0"]);
    assert_eq!(mutated.status.code(), Some(1));
}

#[test]
fn report_file_is_written() {
    let path = std::env::temp_dir().join(format!("toroidal-report-{}.json", std::process::id()));
    let out = run(&["verify", "--family", "vector", "--bound", "4", "--report", path.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(stdout(&out).contains(&format!("report: {}", path.display())));
    std::fs::remove_file(path).ok();
}

#[test]
fn config_and_state_errors() {
    let config = [
        vec!["states", "--family", "nope"],
        vec!["states", "--color", "2"],
        vec!["states", "--family", "slanted", "--m", "0"],
        vec!["states", "--specialize", "d=zz"],
        vec!["states", "--shift", "q^x"],
        vec!["states", "--family", "restricted", "--prohibited", "1,1,1"],
        vec!["character", "--window", "3:1,0:2"],
        vec!["character", "--family", "slanted", "--m", "2", "--window", "0:9,0:9"],
        vec!["compare", "--family", "g0"],
        vec!["compare", "--kind", "bogus"],
        vec!["act", "--state", "1", "--op", "G0"],
        vec!["verify", "--bound", "2", "--mutate-coefficient", "999"],
        vec!["frobnicate"],
    ];
    for args in config {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    for args in [
        vec!["lweight", "--family", "fock", "--state", "1,3"],
        vec!["lweight", "--family", "relaxed", "--state", "garbage|x"],
        vec!["act", "--family", "macmahon", "--state", "1/2", "--op", "E0"],
        vec!["lweight", "--family", "vector", "--state", "[{\"x\":1}]"],
    ] {
        assert_eq!(run(&args).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn compare_reports_mismatch() {
    let out = run(&["compare", "--family", "fock", "--kind", "macmahon-diagonal", "--window", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("degree 2: enumerated 2, expected 3"));
}
