//! One test per acceptance criterion. Each prints a PASS/FAIL line with
//! expected and observed values before asserting.

use ftag::verify::{run_one, VerifyContext};

fn check(id: u32) {
    let row = run_one(id, &VerifyContext::default());
    println!("{}", row.line());
    assert!(row.passed, "{}", row.line());
}

#[test]
fn criterion_1_opt_feasibility_pair() {
    check(1);
}

#[test]
fn criterion_2_patience_upper_bound() {
    check(2);
}

#[test]
fn criterion_3_nearby_invariant() {
    check(3);
}

#[test]
fn criterion_4_lower_bound_k1() {
    check(4);
}

#[test]
fn criterion_5_lower_bound_k2() {
    check(5);
}

#[test]
fn criterion_6_construction_invariants() {
    check(6);
}

#[test]
fn criterion_7_r_identity() {
    check(7);
}

#[test]
fn criterion_8_solver_oracle() {
    check(8);
}

#[test]
fn criterion_9_engine_properties() {
    check(9);
}

fn corrupted_r_bound(k: u32) -> f64 {
    // off by a small amount from k = 3 on
    ftag_core::r_bound(k) + if k >= 3 { 1e-6 } else { 0.0 }
}

#[test]
fn corrupted_r_bound_fails_its_row() {
    let ctx = VerifyContext {
        r_bound: corrupted_r_bound,
    };
    let row = run_one(7, &ctx);
    println!("mutation check: {}", row.line());
    assert!(!row.passed);
}

#[test]
fn inflated_r_bound_fails_lower_bound_rows() {
    fn too_high(_: u32) -> f64 {
        3.0
    }
    let ctx = VerifyContext { r_bound: too_high };
    assert!(!run_one(4, &ctx).passed);
    assert!(!run_one(5, &ctx).passed);
}
