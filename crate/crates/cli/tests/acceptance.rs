//! One test per release criterion. Each prints its verdict line, so the
//! captured output reads as the complete checklist.

use schatten_widths_cli::acceptance::{self, CriterionOutcome};

fn check(outcome: CriterionOutcome) {
    println!(
        "criterion {:>2}  {}  {}  ({:.1}s)  {}",
        outcome.id,
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.name,
        outcome.elapsed_seconds,
        outcome.detail
    );
    assert!(
        outcome.passed,
        "criterion {} ({}) failed: {}",
        outcome.id, outcome.name, outcome.detail
    );
}

#[test]
fn criterion_01_norm_inequalities() {
    check(acceptance::criterion_01());
}

#[test]
fn criterion_02_sequence_ratio_comparison() {
    check(acceptance::criterion_02());
}

#[test]
fn criterion_03_threshold_identity() {
    check(acceptance::criterion_03());
}

#[test]
fn criterion_04_flat_top_certificates() {
    check(acceptance::criterion_04());
}

#[test]
fn criterion_05_flat_top_ratio_floor() {
    check(acceptance::criterion_05());
}

#[test]
fn criterion_06_orbit_orthogonality() {
    check(acceptance::criterion_06());
}

#[test]
fn criterion_07_width_endpoints() {
    check(acceptance::criterion_07());
}

#[test]
fn criterion_08_width_sandwich() {
    check(acceptance::criterion_08());
}

#[test]
fn criterion_09_gaussian_scaling() {
    check(acceptance::criterion_09());
}

#[test]
fn criterion_10_subspace_concentration() {
    check(acceptance::criterion_10());
}

#[test]
fn criterion_11_envelope_algebra() {
    check(acceptance::criterion_11());
}

#[test]
fn criterion_12_duality_gap() {
    check(acceptance::criterion_12());
}

#[test]
fn criterion_13_reproducibility() {
    check(acceptance::criterion_13());
}
