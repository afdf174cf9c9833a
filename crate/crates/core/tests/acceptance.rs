//! End-to-end acceptance gate: runs every verification criterion at its
//! stated tolerance and prints one pass/fail line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use mtfa_core::verify::{run_suite, Suite, VerifyConfig};

#[test]
fn acceptance_criteria() {
    let cfg = VerifyConfig::default();
    let results = run_suite(Suite::All, &cfg);
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(
        failed.is_empty(),
        "criteria failed: {}",
        failed.join(", ")
    );
}
