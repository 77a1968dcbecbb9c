//! The eight acceptance criteria, one pass/fail line each.
//!
//! Every comparison is an exact rational comparison; the tolerance constants
//! below are pinned at zero and exist so the contract is visible in code.

mod common;

use std::process::Command;

use mms_core::calibration::{self, CalibrationFn, Family as Lemma};
use mms_core::gen::{example_1, example_2};
use mms_core::oracle::{mms_value, DEFAULT_ORACLE_LIMIT};
use mms_core::pipeline::{normalize, run, Branch, RunConfig};
use mms_core::rational::{default_alpha, frac, int, parse};
use mms_core::reduction::{
    classify_agents, finalize_matching, perfect_primary_sequence, static_part, Feasibility, Pattern,
    WorkingState,
};
use mms_core::verify::{check_reduction_monotonicity, verify_allocation};
use mms_core::{Error, Instance, Rational};
use rand::{Rng, SeedableRng};

type Criterion = (&'static str, fn() -> Outcome);
use rand_chacha::ChaCha8Rng;

/// Allowed number of agents below `alpha` times their share.
const GUARANTEE_VIOLATIONS_ALLOWED: usize = 0;
/// Allowed share decreases across share-preserving reductions.
const MONOTONICITY_VIOLATIONS_ALLOWED: usize = 0;
/// Allowed calibrated-bound counterexamples per lemma row.
const LEMMA_VIOLATIONS_ALLOWED: usize = 0;
/// Allowed disagreements between the two oracles.
const ORACLE_MISMATCHES_ALLOWED: usize = 0;
/// Allowed shape-property failures for calibration functions.
const SHAPE_VIOLATIONS_ALLOWED: usize = 0;

const MAIN_TRIALS: usize = 1000;
const MONOTONICITY_TRIALS: usize = 500;
const LEMMA_TRIALS: usize = 300;
const ORACLE_TRIALS: usize = 200;
const SHAPE_PARAMETERS: usize = 50;
const GRID_POINTS: i64 = 1000;

/// Instance that defeats bag-filling at alpha = 99/100 but not at 10/13.
const ADVERSARIAL: &str = r#"{"agents": 2, "goods": 8, "values": [
  ["3/5", "11/5", "7/10", "0", "7/10", "1", "14/5", "0"],
  ["9/10", "5/2", "11/10", "1/5", "4/5", "13/10", "13/5", "0"]]}"#;

type Outcome = Result<String, String>;

fn criterion_1() -> Outcome {
    let alpha = default_alpha();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = Vec::new();
    let mut failures = 0;
    let mut branches = [0usize; 3];
    let mut min_ratio: Option<Rational> = None;
    for t in 0..MAIN_TRIALS {
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(n..=14);
        let inst = if t % 2 == 0 {
            common::random_instance(n, m, &mut rng)
        } else {
            common::correlated_instance(n, m, &mut rng)
        };
        match run(&inst, &RunConfig::default()) {
            Ok(out) => {
                let report = verify_allocation(&inst, &out.allocation, &alpha).map_err(|e| e.to_string())?;
                let below = report.agents.iter().filter(|a| !a.pass).count();
                branches[match out.trace.branch {
                    Some(Branch::Case1) => 0,
                    Some(Branch::Case2) => 1,
                    None => 2,
                }] += 1;
                if let Some(r) = report.min_ratio {
                    if min_ratio.as_ref().is_none_or(|m| &r < m) {
                        min_ratio = Some(r);
                    }
                }
                if !report.disjoint || below > GUARANTEE_VIOLATIONS_ALLOWED {
                    bad.push(inst.to_json().unwrap());
                }
            }
            Err(Error::ApproximationFailure { .. }) => failures += 1,
            Err(e) => return Err(format!("trial {t}: {e}")),
        }
    }
    if failures > 0 || !bad.is_empty() {
        return Err(format!(
            "{failures} approximation failures, {} guarantee violations; first: {:?}",
            bad.len(),
            bad.first()
        ));
    }
    Ok(format!(
        "{MAIN_TRIALS} instances (case 1: {}, case 2: {}, trivial: {}), smallest ratio {}",
        branches[0],
        branches[1],
        branches[2],
        min_ratio.map_or("-".into(), |r| mms_core::rational::format(&r))
    ))
}

fn criterion_2() -> Outcome {
    let inst = example_1();
    let st = WorkingState::new(&inst);
    let alpha = default_alpha();
    let bundle = |p: Pattern| -> Option<Vec<usize>> {
        let x = st.find_dynamic_index(p, &alpha, Feasibility::MatchingSaturating)?;
        let mut b: Vec<usize> = static_part(p, st.n_hat).into_iter().map(|q| st.good_at(q).unwrap()).collect();
        b.push(st.good_at(x)?);
        Some(b.into_iter().map(|g| g + 1).collect())
    };
    let got = (bundle(Pattern::R1), bundle(Pattern::R2), bundle(Pattern::T1));
    let want = (Some(vec![2, 5]), Some(vec![3, 4, 6]), Some(vec![1, 6]));
    if got == want {
        Ok("R1 {g2,g5}, R2 {g3,g4,g6}, T1 {g1,g6}".into())
    } else {
        Err(format!("got {got:?}"))
    }
}

fn criterion_3() -> Outcome {
    let inst = example_2();
    let alpha = default_alpha();
    let st = perfect_primary_sequence(&inst, &alpha);
    let steps: Vec<(Pattern, Vec<usize>)> = st
        .steps
        .iter()
        .map(|s| (s.pattern, s.bundle.iter().map(|g| g + 1).collect()))
        .collect();
    let want = vec![
        (Pattern::R2, vec![9, 10, 13]),
        (Pattern::R1, vec![4, 5]),
        (Pattern::T1, vec![1, 16]),
    ];
    if steps != want {
        return Err(format!("primary steps {steps:?}"));
    }
    let (green, red) = classify_agents(&st, &alpha);
    if green != vec![0, 1, 3, 4] || red != vec![2] {
        return Err(format!("green {green:?}, red {red:?}"));
    }
    let m = finalize_matching(&st, &[false, false, true, false, false]).map_err(|e| e.to_string())?;
    if m.assign[1] != 2 {
        return Err(format!("matching {:?}", m.assign));
    }
    // The full run must get through as well.
    run(&inst, &RunConfig::default()).map_err(|e| e.to_string())?;
    Ok("steps, classes and red-priority matching match the worked example".into())
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    let mut violations = Vec::new();
    for t in 0..MONOTONICITY_TRIALS {
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(n..=12);
        let inst = if t % 2 == 0 {
            common::random_instance(n, m, &mut rng)
        } else {
            common::correlated_instance(n, m, &mut rng)
        };
        let out = match run(&inst, &RunConfig::default()) {
            Ok(o) => o,
            Err(e) => return Err(format!("trial {t}: {e}")),
        };
        if out.trace.branch.is_none() {
            continue;
        }
        let norm = normalize(&inst, DEFAULT_ORACLE_LIMIT).map_err(|e| e.to_string())?;
        let work = &norm.work;
        let local = |g: usize| norm.active.iter().position(|&a| a == g).unwrap();

        let mut live: Vec<usize> = (0..work.goods()).collect();
        let everyone: Vec<usize> = (0..work.agents()).collect();
        for step in &out.trace.primary_steps {
            if step.pattern.is_share_preserving() {
                checked += 1;
                if !check_reduction_monotonicity(work, &everyone, &live, step, DEFAULT_ORACLE_LIMIT)
                    .map_err(|e| e.to_string())?
                {
                    violations.push((t, step.clone()));
                }
            }
            live.retain(|g| !step.bundle.contains(g));
        }
        let matched: Vec<usize> = out.trace.primary_matching.iter().map(|&(_, a)| local(a)).collect();
        let mut remaining: Vec<usize> = everyone.iter().copied().filter(|a| !matched.contains(a)).collect();
        for s in &out.trace.secondary_steps {
            let step = mms_core::ReductionStep {
                pattern: s.pattern,
                bundle: s.bundle.clone(),
                dynamic_position: 0,
                n_at_step: s.n_at_step,
            };
            if step.pattern.is_share_preserving() {
                checked += 1;
                if !check_reduction_monotonicity(work, &remaining, &live, &step, DEFAULT_ORACLE_LIMIT)
                    .map_err(|e| e.to_string())?
                {
                    violations.push((t, step.clone()));
                }
            }
            live.retain(|g| !step.bundle.contains(g));
            remaining.retain(|&a| a != local(s.agent));
        }
    }
    if violations.len() > MONOTONICITY_VIOLATIONS_ALLOWED {
        return Err(format!("{} of {checked} steps lowered a share: {:?}", violations.len(), violations.first()));
    }
    if checked == 0 {
        return Err("no share-preserving step was emitted".into());
    }
    Ok(format!("{checked} share-preserving steps over {MONOTONICITY_TRIALS} instances"))
}

fn criterion_5() -> Outcome {
    let alpha = default_alpha();
    let ring = CalibrationFn::f_ring(alpha.clone()).map_err(|e| e.to_string())?;
    let h = CalibrationFn::h(alpha.clone()).map_err(|e| e.to_string())?;
    let p1 = ring.eval(&(&alpha / int(3))).unwrap();
    let p2 = h.eval(&frac(1, 2)).unwrap();
    if p1 != frac(3, 13) || p2 != frac(35, 78) {
        return Err(format!("point checks gave {p1} and {p2}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut summary = Vec::new();
    for lemma in [Lemma::F, Lemma::H, Lemma::W, Lemma::Z] {
        let rep = calibration::lemma_sweep(lemma, &alpha, LEMMA_TRIALS, DEFAULT_ORACLE_LIMIT, &mut rng)
            .map_err(|e| e.to_string())?;
        if rep.violations.len() > LEMMA_VIOLATIONS_ALLOWED {
            return Err(format!(
                "{lemma:?}: {} violations, first {}",
                rep.violations.len(),
                serde_json::to_string(&rep.violations[0]).unwrap()
            ));
        }
        summary.push(format!("{lemma:?}:{}", rep.trials));
    }
    Ok(format!("{} trials, no violations; f(a/3) = 3/13, h(1/2) = 35/78", summary.join(" ")))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = Vec::new();
    for _ in 0..ORACLE_TRIALS {
        let m = rng.gen_range(1..=10);
        let v = common::random_row(m, &mut rng);
        let size = rng.gen_range(0..=m.min(8));
        let mut goods: Vec<usize> = (0..m).collect();
        for i in 0..size {
            let j = rng.gen_range(i..m);
            goods.swap(i, j);
        }
        goods.truncate(size);
        let d = rng.gen_range(1..=3);
        if goods.is_empty() {
            continue;
        }
        let fast = mms_value(&v, d, &goods).map_err(|e| e.to_string())?;
        let slow = common::naive_mms(&v, d, &goods);
        let witness_ok = fast
            .partition
            .iter()
            .map(|p| mms_core::oracle::bundle_value(&v, p))
            .min()
            .unwrap()
            == fast.value;
        if fast.value != slow || !witness_ok {
            mismatches.push((v, d, goods));
        }
    }
    if mismatches.len() > ORACLE_MISMATCHES_ALLOWED {
        return Err(format!("{} mismatches, first {:?}", mismatches.len(), mismatches[0]));
    }
    Ok(format!("{ORACLE_TRIALS} random sets, exact agreement with full enumeration"))
}

fn shape_ok(f: &CalibrationFn) -> bool {
    let mut prev: Option<Rational> = None;
    for k in 0..GRID_POINTS {
        let x = frac(k, GRID_POINTS - 1);
        let y = f.eval(&x).unwrap();
        if y > x || prev.as_ref().is_some_and(|p| &y < p) {
            return false;
        }
        prev = Some(y);
    }
    true
}

fn criterion_7() -> Outcome {
    let alpha = default_alpha();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let mut count = 0;
    for family in [Lemma::F, Lemma::H, Lemma::W, Lemma::Z] {
        for i in 0..SHAPE_PARAMETERS {
            let f = match family {
                // h has no parameter; vary alpha across its valid window instead.
                Lemma::H => {
                    let a = frac(3, 4) + (frac(6, 7) - frac(3, 4)) * frac(i as i64, SHAPE_PARAMETERS as i64 - 1);
                    CalibrationFn::h(a)
                }
                _ => CalibrationFn::new(family, calibration::sample_lambda(family, &alpha, &mut rng), alpha.clone()),
            }
            .map_err(|e| e.to_string())?;
            count += 1;
            if !shape_ok(&f) {
                failures.push(f);
            }
        }
    }
    if failures.len() > SHAPE_VIOLATIONS_ALLOWED {
        return Err(format!("{} functions failed, first {:?}", failures.len(), failures[0]));
    }
    Ok(format!("{count} functions monotone and below identity on a {GRID_POINTS}-point grid"))
}

fn criterion_8() -> Outcome {
    let inst = Instance::from_json(ADVERSARIAL).unwrap();
    let strict = parse("99/100").unwrap();
    match run(&inst, &RunConfig::with_alpha(strict)) {
        Err(Error::ApproximationFailure { .. }) => {}
        other => return Err(format!("library run at 99/100 returned {other:?}")),
    }
    run(&inst, &RunConfig::default()).map_err(|e| format!("failed at 10/13: {e}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("adversarial.json");
    inst.save(&path).map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_mms"))
        .arg("run")
        .arg(&path)
        .args(["--alpha", "99/100", "--out"])
        .arg(dir.path().join("alloc.json"))
        .status()
        .map_err(|e| e.to_string())?;
    if status.code() != Some(2) {
        return Err(format!("cli exited with {status}"));
    }
    // Criteria 1 and 3 already fail loudly on any approximation failure.
    Ok("failure raised at 99/100 with exit status 2, absent at 10/13".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 main guarantee", criterion_1),
        ("2 example 1 dynamic indices", criterion_2),
        ("3 example 2 primary sequence", criterion_3),
        ("4 reduction monotonicity", criterion_4),
        ("5 calibration lemma sweep", criterion_5),
        ("6 oracle cross-check", criterion_6),
        ("7 calibration shapes", criterion_7),
        ("8 approximation failure path", criterion_8),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                println!("FAIL criterion {name}: {msg}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
