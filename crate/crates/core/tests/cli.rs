use std::path::Path;
use std::process::{Command, Output};

use mms_core::pipeline::Trace;
use mms_core::rational::{default_alpha, frac};
use mms_core::{verify_allocation, Allocation, Instance, Pattern};

fn mms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mms")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_worked_examples() {
    let out = mms(&["gen", "--family", "paper-example-1"]);
    assert!(out.status.success());
    let inst = Instance::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(inst.row(0), [7, 7, 4, 3, 3, 1, 1].map(|x| frac(x, 13)).as_slice());

    let out = mms(&["gen", "--family", "paper-example-2"]);
    let inst = Instance::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!((inst.agents(), inst.goods()), (5, 17));
    assert_eq!(inst.value(3, 0), &frac(11, 21));
}

#[test]
fn gen_is_deterministic() {
    let a = mms(&["gen", "--family", "uniform", "--n", "3", "--m", "12", "--seed", "7"]);
    let b = mms(&["gen", "--family", "uniform", "--n", "3", "--m", "12", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(mms(&["gen", "--n", "0"]).status.code(), Some(3));
    assert_eq!(mms(&["gen", "--family", "nope"]).status.code(), Some(3));
}

#[test]
fn run_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..12 {
        let inst = dir.path().join("inst.json");
        let alloc = dir.path().join("alloc.json");
        let trace = dir.path().join("trace.json");
        let report = dir.path().join("report.json");
        let family = if seed % 2 == 0 { "uniform" } else { "clustered" };
        let n = (2 + seed % 3).to_string();
        let s = seed.to_string();
        assert!(mms(&["gen", "--family", family, "--n", &n, "--m", "11", "--seed", &s, "--out", p(&inst)])
            .status
            .success());
        let run = mms(&["run", p(&inst), "--out", p(&alloc), "--trace", p(&trace)]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        let ver = mms(&["verify", p(&inst), p(&alloc), "--out", p(&report)]);
        assert_eq!(ver.status.code(), Some(0));

        // The file report matches one computed in process.
        let i = Instance::load(&inst).unwrap();
        let a = Allocation::load(&alloc).unwrap();
        let here = verify_allocation(&i, &a, &default_alpha()).unwrap();
        assert_eq!(std::fs::read_to_string(&report).unwrap(), here.to_json().unwrap() + "\n");

        let t = Trace::from_json(&std::fs::read_to_string(&trace).unwrap()).unwrap();
        assert_eq!(t.allocation, a);
    }
}

#[test]
fn tampered_allocation_fails() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let alloc = dir.path().join("alloc.json");
    Instance::from_rows(vec![vec![frac(1, 5); 10]; 2]).unwrap().save(&inst).unwrap();
    assert!(mms(&["run", p(&inst), "--out", p(&alloc)]).status.success());
    assert_eq!(mms(&["verify", p(&inst), p(&alloc)]).status.code(), Some(0));

    let mut a = Allocation::load(&alloc).unwrap();
    a.bundles[0].pop();
    a.save(&alloc).unwrap();
    let out = mms(&["verify", p(&inst), p(&alloc)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn example_two_trace() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let trace = dir.path().join("trace.json");
    assert!(mms(&["gen", "--family", "paper-example-2", "--out", p(&inst)]).status.success());
    assert!(mms(&["run", p(&inst), "--trace", p(&trace)]).status.success());
    let t = Trace::from_json(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    let steps: Vec<(Pattern, Vec<usize>)> =
        t.primary_steps.iter().map(|s| (s.pattern, s.bundle.clone())).collect();
    assert_eq!(
        steps,
        vec![(Pattern::R2, vec![8, 9, 12]), (Pattern::R1, vec![3, 4]), (Pattern::T1, vec![0, 15])]
    );
}

#[test]
fn single_agent_and_empty_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let alloc = dir.path().join("alloc.json");
    std::fs::write(&inst, r#"{"agents": 1, "goods": 3, "values": [["1/2", 3, "0"]]}"#).unwrap();
    assert!(mms(&["run", p(&inst), "--out", p(&alloc)]).status.success());
    assert_eq!(Allocation::load(&alloc).unwrap().bundles, vec![vec![0, 1, 2]]);

    std::fs::write(&inst, r#"{"agents": 1, "goods": 0, "values": [[]]}"#).unwrap();
    assert!(mms(&["run", p(&inst), "--out", p(&alloc)]).status.success());
    assert_eq!(mms(&["verify", p(&inst), p(&alloc)]).status.code(), Some(0));
}

#[test]
fn input_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    std::fs::write(&inst, "{not json").unwrap();
    assert_eq!(mms(&["run", p(&inst)]).status.code(), Some(3));

    std::fs::write(&inst, r#"{"agents": 1, "goods": 2, "values": [["1/0", "1"]]}"#).unwrap();
    assert_eq!(mms(&["run", p(&inst)]).status.code(), Some(3));

    assert!(mms(&["gen", "--n", "2", "--m", "30", "--out", p(&inst)]).status.success());
    assert_eq!(mms(&["run", p(&inst)]).status.code(), Some(3));
    assert_eq!(mms(&["run", p(&inst), "--oracle-limit", "40"]).status.code(), Some(0));

    assert_eq!(mms(&["run", p(&inst), "--alpha", "3/2"]).status.code(), Some(3));
}

#[test]
fn lemma_check_reports() {
    let out = mms(&["lemma-check", "--lemma", "W", "--trials", "20", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lemma"], "W");
    assert_eq!(v["trials"], 20);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    assert_eq!(mms(&["lemma-check", "--lemma", "Q"]).status.code(), Some(3));
}
