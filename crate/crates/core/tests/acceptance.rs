//! The thirteen acceptance checks, one test each.
//!
//! Run with `--nocapture` to see the per-check line and its detail. The seed
//! defaults to 7 and can be changed with `LOSSAV_SEED`.

use loss_aversion::battery::{run_criterion, Budget};

fn seed() -> u64 {
    std::env::var("LOSSAV_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(7)
}

fn check(id: u8) {
    let r = run_criterion(id, Budget::Default, seed()).expect("known id");
    let detail = r.detail.iter().map(|d| format!("\n      {d}")).collect::<String>();
    println!("{r}{detail}");
    assert!(r.passed, "check {id} ({}) failed:{detail}", r.key);
}

#[test]
fn c01_dfpa_closed_form() {
    check(1);
}

#[test]
fn c02_fpa_no_loss_averse() {
    check(2);
}

#[test]
fn c03_hierarchy() {
    check(3);
}

#[test]
fn c04_multi_leximin_exists() {
    check(4);
}

#[test]
fn c05_dfpa_min_max_regret() {
    check(5);
}

#[test]
fn c06_mixed_nature_collapse() {
    check(6);
}

#[test]
fn c07_aim_big_refinement() {
    check(7);
}

#[test]
fn c08_vcg_sybil_claims() {
    check(8);
}

#[test]
fn c09_vcg_example_e1() {
    check(9);
}

#[test]
fn c10_vcg_example_e2() {
    check(10);
}

#[test]
fn c11_facility_location() {
    check(11);
}

#[test]
fn c12_voting() {
    check(12);
}

#[test]
fn c13_oracle_equivalence() {
    check(13);
}
