//! Runs every acceptance criterion for charges 2 through 5 and prints one
//! line per criterion. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use instanton_lab::suite::{run_suite, SuiteConfig};

fn main() -> ExitCode {
    let cfg = SuiteConfig::new(vec![2, 3, 4, 5], 0);
    let start = Instant::now();
    println!("\nrunning acceptance criteria 1-10 (k = 2..5, seed {})", cfg.seed);
    let report = match run_suite(&cfg, |r| println!("{}  [{:.1}s]", r.line(), r.elapsed_s)) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance: could not start: {e}");
            return ExitCode::FAILURE;
        }
    };
    if report.aborted {
        println!("acceptance: aborted after a synthetic tensor passed certification");
    }
    let failed: Vec<u8> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    println!(
        "acceptance: {} passed, {} failed in {:.1}s\n",
        report.criteria.len() - failed.len(),
        failed.len(),
        start.elapsed().as_secs_f64()
    );
    if report.passed() && report.criteria.len() == 10 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
