mod common;

use common::*;

#[test]
fn periodicity_agrees_with_brute_force() {
    let t = periodicity_oracle(12);
    assert!(t.checks >= 20_000, "{}", t.summary());
    eprintln!("{}", t.summary());
    assert!(t.passed(), "{}", t.summary());
}

#[test]
fn fix_d_structure_invariants() {
    let t = structure_suite("fix_d", 10_000, &[1]);
    eprintln!("{}", t.summary());
    assert!(t.passed(), "{}", t.summary());
}

#[test]
fn fix_e_structure_invariants() {
    let t = structure_suite("fix_e", 10_000, &[1, 2]);
    eprintln!("{}", t.summary());
    assert!(t.passed(), "{}", t.summary());
}

#[test]
fn fix_e_anatomy_goldens_in_window_and_prefix() {
    let t = fix_e_goldens();
    eprintln!("{}", t.summary());
    assert!(t.passed(), "{}", t.summary());
}
