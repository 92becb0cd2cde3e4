use std::process::Command;
use std::time::{Duration, Instant};

use nbtree::report::{criterion, CriterionResult};

const SEED: u64 = 0;

fn run(id: u32, limit: Option<Duration>) -> CriterionResult {
    let start = Instant::now();
    let result = criterion(id, SEED).expect("criterion runs");
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let verdict = if result.pass && in_time { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} [{}]: {verdict}", result.name);
    if !result.pass {
        println!("  detail: {}", result.detail);
    }
    if !in_time {
        println!("  took {elapsed:?}, limit {:?}", limit.unwrap());
    }
    assert!(result.pass, "criterion {id} failed: {}", result.detail);
    assert!(in_time, "criterion {id} exceeded its time limit");
    result
}

#[test]
fn criterion_01_bound_formulas() {
    run(1, Some(Duration::from_secs(1)));
}

#[test]
fn criterion_02_norm_against_bound() {
    run(2, Some(Duration::from_secs(60)));
}

#[test]
fn criterion_03_certificate() {
    run(3, Some(Duration::from_secs(120)));
}

#[test]
fn criterion_04_walk_counts() {
    run(4, None);
}

#[test]
fn criterion_05_oracle_agreement() {
    run(5, None);
}

#[test]
fn criterion_06_bound_compliance_sweep() {
    run(6, Some(Duration::from_secs(300)));
}

#[test]
fn criterion_07_sharpness_order() {
    run(7, None);
}

#[test]
fn criterion_08_orbit_averaging() {
    run(8, None);
}

#[test]
fn criterion_09_polarization() {
    run(9, None);
}

#[test]
fn criterion_10_edge_homogeneity() {
    run(10, None);
}

#[test]
fn criterion_11_universal_roundtrip() {
    run(11, None);
}

#[test]
fn criterion_12_report_determinism() {
    let report = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_nbtree"))
            .args(["report", "--seed", "0"])
            .env("NBTREE_THREADS", threads)
            .output()
            .expect("binary runs");
        assert!(out.status.code().is_some_and(|c| c <= 1), "report exited with {:?}", out.status);
        out.stdout
    };
    let one = report("1");
    let eight = report("8");
    let same = !one.is_empty() && one == eight;
    println!("criterion 12 [report determinism]: {}", if same { "PASS" } else { "FAIL" });
    assert!(same, "report output differs between 1 and 8 threads");
}
