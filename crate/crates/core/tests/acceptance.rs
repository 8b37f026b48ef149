//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout.

use std::process::ExitCode;

use magspec_core::verify::{run_criterion, VerifyConfig, ALL};

fn main() -> ExitCode {
    let cfg = VerifyConfig::default();
    let mut failed = Vec::new();
    for id in ALL {
        let r = run_criterion(id, &cfg).expect("known criterion");
        println!("{}", r.line());
        if !r.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: {}/{} criteria passed", ALL.len(), ALL.len());
        ExitCode::SUCCESS
    } else {
        println!(
            "acceptance: {}/{} criteria passed, failing {failed:?}",
            ALL.len() - failed.len(),
            ALL.len()
        );
        ExitCode::FAILURE
    }
}
