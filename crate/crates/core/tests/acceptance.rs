//! Runs the twelve acceptance criteria with the default seed and prints one
//! line per criterion. A criterion is green only if its check passes and it
//! finishes inside its runtime budget.

use std::process::ExitCode;

use coarselab::{run_suite, SuiteConfig};

fn main() -> ExitCode {
    let report = match run_suite(&SuiteConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("acceptance: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut red = 0;
    for check in &report.checks {
        let over = if check.within_budget() { "" } else { " OVER BUDGET" };
        println!("{}{over}", check.line());
        if !check.passed() || !check.within_budget() {
            red += 1;
        }
    }
    println!("acceptance: {} of {} criteria green in {:.1} s", report.checks.len() - red, report.checks.len(), report.seconds);
    if red == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
