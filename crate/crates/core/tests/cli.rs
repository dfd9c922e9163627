//! End-to-end runs of the `dodgson` binary.

mod common;

use common::*;
use dodgson::election::{parse_election, VotingSituation};
use dodgson::experiments::Model;
use dodgson::generators::{enumerate_situations, Seed};
use std::path::Path;
use std::process::{Command, Output};

fn dodgson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dodgson")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_h(dir: &Path) -> String {
    let path = dir.join("h.elec");
    std::fs::write(&path, EXAMPLE_H).unwrap();
    path.to_str().unwrap().to_string()
}

fn split_stream(text: &str) -> Vec<VotingSituation> {
    text.split("---\n").map(|chunk| parse_election(chunk).unwrap()).collect()
}

#[test]
fn score_table_for_example_h() {
    let dir = tempfile::tempdir().unwrap();
    let h = write_h(dir.path());
    let o = dodgson(&["score", "--input", &h]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("dq       12  17  13   54\n"), "{text}");
    assert!(text.contains("dodgson  14  17  13   54\n"), "{text}");
    assert!(text.contains("dq winners: a\n"));
    assert!(text.contains("dodgson winners: c\n"));
    assert!(text.contains("certificate (dc): maybe (gap 1, threshold 49)"));
    assert_eq!(dodgson(&["score", "--input", &h]).stdout, o.stdout);
}

#[test]
fn score_csv_to_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let h = write_h(dir.path());
    let csv = dir.path().join("h.csv");
    let printed = dodgson(&["score", "--input", &h, "--rules", "tideman,dq,dodgson", "--format", "csv"]);
    let written =
        dodgson(&["score", "--input", &h, "--rules", "tideman,dq,dodgson", "--output", csv.to_str().unwrap()]);
    assert!(printed.status.success() && written.status.success());
    let file = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(file, stdout(&printed));
    // fixed columns, unrequested rules left empty
    assert_eq!(file.lines().next().unwrap(), "alternative,simpson,tideman,dq,dc,dr,damp,dodgson");
    assert!(file.contains("\nc,,26,13,,,,13\n"), "{file}");
}

#[test]
fn winners_by_rule() {
    let dir = tempfile::tempdir().unwrap();
    let h = write_h(dir.path());
    for (rule, expected) in [("dq", "a\n"), ("tideman", "a\n"), ("dc", "c\n"), ("dodgson", "c\n")] {
        let o = dodgson(&["winners", "--input", &h, "--rule", rule]);
        assert_eq!(stdout(&o), expected, "{rule}");
    }
    let small = dir.path().join("small.elec");
    std::fs::write(&small, "alternatives: a b c\n1: a b c\n2: b c a\n").unwrap();
    let brute =
        dodgson(&["winners", "--input", small.to_str().unwrap(), "--rule", "dodgson", "--backend", "brute-force"]);
    assert_eq!(stdout(&brute), "b\n");
}

#[test]
fn gen_stream_and_files_agree_with_library() {
    let dir = tempfile::tempdir().unwrap();
    let o = dodgson(&["--seed", "77", "gen", "--model", "iac", "--m", "4", "--n", "30", "--trials", "3"]);
    assert!(o.status.success());
    let stream = split_stream(&stdout(&o));
    assert_eq!(stream.len(), 3);
    for (t, e) in stream.iter().enumerate() {
        assert_eq!(*e, Model::Iac.generate(4, 30, Seed::new(77, t as u64)).unwrap());
    }
    let out_dir = dir.path().join("trials");
    let o = dodgson(&[
        "gen",
        "--seed",
        "77",
        "--model",
        "iac",
        "--m",
        "4",
        "--n",
        "30",
        "--trials",
        "3",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    for (t, e) in stream.iter().enumerate() {
        let text = std::fs::read_to_string(out_dir.join(format!("trial-{t:04}.elec"))).unwrap();
        assert_eq!(parse_election(&text).unwrap(), *e);
    }
}

#[test]
fn gen_pe_with_urn_file() {
    let dir = tempfile::tempdir().unwrap();
    let h = write_h(dir.path());
    let o = dodgson(&["--seed", "5", "gen", "--model", "pe", "--a", "0", "--urn", &h, "--m", "4", "--n", "50"]);
    assert!(o.status.success());
    let e = parse_election(&stdout(&o)).unwrap();
    let urn = parse_election(EXAMPLE_H).unwrap();
    assert_eq!(e.num_agents(), 50);
    assert!(e.ballots().all(|(order, _)| urn.count(order) > 0));
}

#[test]
fn experiment_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("study.toml");
    std::fs::write(&config, "model = \"ic\"\nm = 3\nn = [5, 9]\ntrials = 40\nseed = 3\n").unwrap();
    let csv = dir.path().join("out.csv");
    let o =
        dodgson(&["experiment", "agreement", "--config", config.to_str().unwrap(), "--output", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n,trials,skipped,"));
    assert_eq!(text.lines().count(), 3);
    let manifest = std::fs::read_to_string(dir.path().join("out.csv.manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 3"), "{manifest}");

    let c = config.to_str().unwrap();
    let a = dodgson(&["experiment", "agreement", "--config", c]);
    assert_eq!(stdout(&a), text);
    let reseeded = dodgson(&["--seed", "4", "experiment", "agreement", "--config", c]);
    assert_ne!(reseeded.stdout, a.stdout);
    let cert = dodgson(&["experiment", "certificate", "--config", c]);
    assert!(stdout(&cert).starts_with("n,trials,definitely,definitely_rate\n"));
}

#[test]
fn enumerate_counts_and_prints() {
    assert_eq!(stdout(&dodgson(&["enumerate", "--m", "3", "--n", "2"])), "21 situations\n");
    let printed = stdout(&dodgson(&["enumerate", "--m", "2", "--n", "3", "--print"]));
    assert_eq!(split_stream(&printed).len(), 4);
}

#[test]
fn audit_cell_matches_direct_count() {
    let o = dodgson(&["audit", "--m", "3", "--n", "4", "--k", "1", "--pair", "a,b", "--rule", "tideman"]);
    assert!(o.status.success());
    let all: Vec<VotingSituation> = enumerate_situations(3, 4, 1000).unwrap().collect();
    let hits = all.iter().filter(|e| naive_tideman(e, 0) - naive_tideman(e, 1) == 1).count();
    let text = stdout(&o);
    assert!(text.starts_with(&format!("tideman a-b = 1: {hits}/{} = ", all.len())), "{text}");
    assert!(text.trim_end().ends_with("holds"));
}

#[test]
fn enumerate_audit_reports_every_pair() {
    let o = dodgson(&["enumerate", "--m", "3", "--n", "2", "--audit", "--k", "0", "--rule", "t"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 6);
}

#[test]
fn exit_codes() {
    let missing = dodgson(&["score", "--input", "/nonexistent/file.elec"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());
    assert_eq!(dodgson(&["score", "--bogus"]).status.code(), Some(1));
    assert_eq!(dodgson(&["gen", "--model", "ic", "--m", "3", "--n", "4"]).status.code(), Some(1));
    let capped = dodgson(&["enumerate", "--m", "4", "--n", "20", "--cap", "10"]);
    assert_eq!(capped.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let h = write_h(dir.path());
    let brute = dodgson(&["winners", "--input", &h, "--rule", "dodgson", "--backend", "brute-force"]);
    assert_eq!(brute.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&brute.stderr).contains("over 2^64"));
    assert_eq!(dodgson(&["--help"]).status.code(), Some(0));
}
