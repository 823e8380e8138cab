//! Runs every acceptance criterion and prints one line per criterion.
//! No libtest harness, so the lines show up without `--nocapture`.

use std::process::ExitCode;

use vstatic_core::sampling::DEFAULT_SEED;
use vstatic_core::suite::{criterion_line, run_suite, SuiteConfig};

fn main() -> ExitCode {
    let summary = run_suite(&SuiteConfig::new(DEFAULT_SEED));
    for c in &summary.criteria {
        println!("{}", criterion_line(c));
    }
    for r in summary.reports.iter().filter(|r| !r.pass) {
        println!("  {}", r.line());
    }
    println!("overall: {} in {:.1} s", if summary.overall_pass { "PASS" } else { "FAIL" }, summary.wall_time);
    let failed: Vec<usize> = summary.criteria.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    if summary.criteria.len() != 11 || !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
