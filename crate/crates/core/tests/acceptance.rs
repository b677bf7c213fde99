//! Acceptance criteria, one pass/fail line each.

use std::process::ExitCode;

use envest::acceptance::{AcceptanceConfig, AcceptanceSuite, CRITERIA};

fn main() -> ExitCode {
    // `cargo test -- --list` and similar harness queries
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let suite = AcceptanceSuite::new(AcceptanceConfig::default());
    let mut failed = Vec::new();
    for (id, _) in CRITERIA {
        let result = suite.run(id);
        println!("{}", result.line());
        if !result.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", CRITERIA.len(), CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
